"""Zeros of Phi by the argument principle, subdivision and Newton polishing.

Counting tracks the argument of Phi along each edge with adaptive
sampling (consecutive samples differ by less than pi/2 in log Phi) and
cross-checks the tracked integer against a Gauss-Legendre quadrature of
Phi'/Phi on the same mesh.  The quadrature value is the pre-rounding
winding number and must sit within 0.25 of an integer.
"""

from dataclasses import dataclass, field

import numpy as np

from .charfn import ReducedProblem, phi_derivative, phi_with_derivative
from .errors import (
    ContourError,
    IsolationError,
    ParameterError,
    PrecisionError,
    RefinementError,
)

THETA = 1e-8
MAX_RETRIES = 5
DILATION = 1e-4
MIN_SEGMENT = 1e-12
MULT_TOL = 1e-6
NEWTON_ITERS = 50

_GL_X, _GL_W = np.polynomial.legendre.leggauss(8)
# off-centre split fractions; never 1/2 so that split lines miss lattice points
_SPLITS = (0.5137, 0.4719, 0.5461, 0.4283, 0.5829)


@dataclass(frozen=True)
class Rectangle:
    re_min: float
    re_max: float
    im_min: float
    im_max: float

    def __post_init__(self):
        if not (self.re_min < self.re_max and self.im_min < self.im_max):
            raise ParameterError("rectangle needs re_min < re_max and im_min < im_max")

    @classmethod
    def centred(cls, n, b):
        """R_{n,b} = [-n - 1/2, n + 1/2] x [-b, b]."""
        return cls(-n - 0.5, n + 0.5, -b, b)

    @classmethod
    def square(cls, center, half):
        center = complex(center)
        return cls(center.real - half, center.real + half, center.imag - half, center.imag + half)

    @property
    def width(self):
        return self.re_max - self.re_min

    @property
    def height(self):
        return self.im_max - self.im_min

    @property
    def diameter(self):
        return float(np.hypot(self.width, self.height))

    @property
    def center(self):
        return complex(0.5 * (self.re_min + self.re_max), 0.5 * (self.im_min + self.im_max))

    @property
    def corners(self):
        """Counter-clockwise from the lower-left corner."""
        return (
            complex(self.re_min, self.im_min),
            complex(self.re_max, self.im_min),
            complex(self.re_max, self.im_max),
            complex(self.re_min, self.im_max),
        )

    def contains(self, z, pad=0.0):
        z = complex(z)
        return (
            self.re_min - pad <= z.real <= self.re_max + pad
            and self.im_min - pad <= z.imag <= self.im_max + pad
        )

    def dilate(self, eps):
        return Rectangle(self.re_min - eps, self.re_max + eps, self.im_min - eps, self.im_max + eps)

    def split(self, fx=0.5, fy=0.5):
        """Four children, counter-clockwise from lower-left."""
        xm = self.re_min + fx * self.width
        ym = self.im_min + fy * self.height
        return (
            Rectangle(self.re_min, xm, self.im_min, ym),
            Rectangle(xm, self.re_max, self.im_min, ym),
            Rectangle(xm, self.re_max, ym, self.im_max),
            Rectangle(self.re_min, xm, ym, self.im_max),
        )

    def as_dict(self):
        return {
            "re_min": self.re_min,
            "re_max": self.re_max,
            "im_min": self.im_min,
            "im_max": self.im_max,
        }


@dataclass(frozen=True)
class LocatedZero:
    value: complex
    multiplicity: int
    residual: float
    enclosure: object = None
    provenance: str = "rectangle-subdivision"

    def __post_init__(self):
        if self.multiplicity < 1:
            raise ParameterError("multiplicity must be positive")

    @property
    def sort_key(self):
        return (round(self.value.real, 10), round(self.value.imag, 10))


@dataclass
class ContourResult:
    count: int
    value: complex  # pre-rounding (2 pi i)^{-1} int Phi'/Phi
    moment: complex  # (2 pi i)^{-1} int z Phi'/Phi, the sum of the zeros
    rect: Rectangle
    evaluations: int = 0


class _Target:
    """Uniform access to Phi and its derivatives."""

    def __init__(self, obj):
        if isinstance(obj, ReducedProblem):
            self.red = obj
            self._fd = lambda z: phi_with_derivative(obj, z)
            self._deriv = lambda z, k: phi_derivative(obj, z, k)
        elif isinstance(obj, tuple):
            # (f, df, derivative(z, k)) of plain vectorized callables
            self.red = None
            f, df = obj[0], obj[1]
            self._fd = lambda z: (f(z), df(z))
            self._deriv = obj[2] if len(obj) > 2 else None
        else:
            raise ParameterError("target must be a ReducedProblem or a tuple of callables")
        self.evals = 0

    def f(self, z):
        return self.fd(z)[0]

    def fd(self, z):
        z = np.asarray(z, dtype=complex)
        self.evals += z.size
        return self._fd(z)

    def deriv(self, z, k):
        if k == 0:
            return complex(self.f(np.array([z]))[0])
        if self._deriv is None:
            raise ParameterError("derivatives beyond the first are unavailable")
        return complex(self._deriv(z, k))


class _NearZero(Exception):
    pass


def _edge(target, a, b, theta):
    """Tracked argument change and contour integrals along the segment a -> b."""
    length = abs(b - a)
    n0 = max(8, int(np.ceil(8 * length)))
    t = np.linspace(0.0, 1.0, n0 + 1)
    F = target.f(a + t * (b - a))
    for _ in range(80):
        if np.min(np.abs(F)) < theta:
            raise _NearZero
        d = np.log(F[1:] / F[:-1])
        bad = np.abs(d) >= np.pi / 2
        if not bad.any():
            break
        idx = np.nonzero(bad)[0]
        if np.min(t[idx + 1] - t[idx]) * length < MIN_SEGMENT:
            raise _NearZero
        tm = 0.5 * (t[idx] + t[idx + 1])
        Fm = target.f(a + tm * (b - a))
        t = np.insert(t, idx + 1, tm)
        F = np.insert(F, idx + 1, Fm)
    else:
        raise _NearZero
    tracked = float(np.sum(np.imag(d)))
    # composite Gauss-Legendre on the final mesh
    lo, hi = t[:-1, None], t[1:, None]
    tq = lo + (hi - lo) * (_GL_X[None, :] + 1) / 2
    wq = (hi - lo) * _GL_W[None, :] / 2 * (b - a)
    zq = a + tq * (b - a)
    Fq, dFq = target.fd(zq.ravel())
    if np.min(np.abs(Fq)) < theta:
        raise _NearZero
    ratio = (dFq / Fq).reshape(zq.shape) * wq
    return tracked, complex(ratio.sum()), complex((ratio * zq).sum())


def _contour(target, rect, theta, cache=None):
    tracked = 0.0
    i0 = 0j
    i1 = 0j
    corners = rect.corners
    for j in range(4):
        a, b = corners[j], corners[(j + 1) % 4]
        key = (a, b)
        if cache is not None and key in cache:
            res = cache[key]
        elif cache is not None and (b, a) in cache:
            tr, r0, r1 = cache[(b, a)]
            res = (-tr, -r0, -r1)
        else:
            res = _edge(target, a, b, theta)
            if cache is not None:
                cache[key] = res
        tracked += res[0]
        i0 += res[1]
        i1 += res[2]
    value = i0 / (2j * np.pi)
    moment = i1 / (2j * np.pi)
    count = int(round(tracked / (2 * np.pi)))
    nearest = round(value.real)
    if abs(value - nearest) > 0.25 or nearest != count:
        raise PrecisionError(
            f"winding integral {value:.6g} disagrees with tracked count {count}",
            value=value,
            tracked=count,
        )
    if count < 0:
        raise PrecisionError("negative winding for an entire function", value=value, tracked=count)
    return ContourResult(count, value, moment, rect, target.evals)


def count_zeros(red, rect, theta=THETA, retries=MAX_RETRIES, cache=None):
    """Winding count with boundary dilation; returns a ContourResult."""
    target = red if isinstance(red, _Target) else _Target(red)
    current = rect
    for attempt in range(retries + 1):
        try:
            return _contour(target, current, theta, cache)
        except _NearZero:
            current = current.dilate(DILATION * (1 + attempt))
    raise ContourError(
        f"|Phi| < {theta:g} on the boundary of {rect} after {retries} dilations"
    )


def winding_count(red, rect, theta=THETA):
    """Number of zeros of Phi inside ``rect`` counted with multiplicity."""
    return count_zeros(red, rect, theta).count


def _scaled(lam, value):
    # |Phi| relative to the size of the exponential term it balances
    return abs(value) / (1.0 + abs(np.exp(2j * np.pi * lam)))


def _deflation_term(lam, n):
    """1/(lam - n) - f'/f for f = 1 - exp(2 pi i lam), regular at lam = n."""
    u = lam - n
    w = 2j * np.pi * u
    if abs(w) < 1e-2:
        return 2j * np.pi * (-0.5 - w / 12 + w ** 3 / 720)
    return 1.0 / u - 2j * np.pi - 2j * np.pi / np.expm1(w)


def _newton_step(target, lam, f, df, mult, n):
    if target.red is None or n is None:
        return mult * f / df
    # Newton on G = Phi (lam - n) / f: same zeros near n, nearly affine
    log_deriv = df / f + _deflation_term(lam, n)
    return mult / log_deriv


def refine_zero(red, lambda0, mult=1, tol=1e-10):
    """Modified Newton refinement of a zero of Phi near ``lambda0``.

    The iteration is lam <- lam - m G/G' with G(lam) = Phi(lam)(lam - n)/f(lam),
    n the integer nearest to Re lambda0 and f(lam) = 1 - exp(2 pi i lam).
    Dividing out f (all of whose zeros except n become poles) leaves a
    function that is close to affine near n, so starting points anywhere in
    the unit strip around n converge; G and Phi share zeros and
    multiplicities there.  Convergence is judged on
    |Phi| / (1 + |exp(2 pi i lam)|), equal to |Phi| up to a factor of at
    most 2 for Im lam >= 0.  The best iterate is returned, so the residual
    never increases.
    """
    target = red if isinstance(red, _Target) else _Target(red)
    lam = complex(lambda0)
    n = int(np.round(lam.real)) if abs(lam.imag) < 2.0 else None

    def evaluate(z):
        f, df = target.fd(np.array([z]))
        return complex(f[0]), complex(df[0])

    f, df = evaluate(lam)
    best, best_res = lam, _scaled(lam, f)
    stalls = 0
    for _ in range(NEWTON_ITERS):
        if f == 0 or df == 0 and n is None:
            break
        try:
            step = _newton_step(target, lam, f, df, mult, n)
        except ZeroDivisionError:
            break
        lam = lam - step
        if not np.isfinite(lam) or abs(lam.imag) > 100:
            break
        f, df = evaluate(lam)
        res = _scaled(lam, f)
        if res < best_res:
            best, best_res = lam, res
            stalls = 0
        else:
            stalls += 1
        if best_res < tol and (stalls or abs(step) < 1e-15 * (1 + abs(lam))):
            break
    if best_res >= tol:
        raise RefinementError(
            f"Newton did not reach tolerance {tol:g} from {lambda0}", best=best, residual=best_res
        )
    return best


def _multiplicity_ok(target, lam, m):
    scale = max(1.0, abs(np.exp(2j * np.pi * lam)))
    for j in range(m):
        if abs(target.deriv(lam, j)) >= MULT_TOL * scale:
            return False
    return abs(target.deriv(lam, m)) > MULT_TOL


def _resolve_leaf(target, res, tol):
    rect, m = res.rect, res.count
    guess = res.moment / m
    try:
        lam = refine_zero(target, guess, m, tol)
    except RefinementError:
        return None
    if m > 1 and target._deriv is not None:
        # polish on Phi^(m-1), which has a simple zero there
        g = lam
        for _ in range(8):
            num = target.deriv(g, m - 1)
            den = target.deriv(g, m)
            if den == 0:
                break
            step = num / den
            g -= step
            if abs(step) < 1e-15 * (1 + abs(g)):
                break
        if abs(g - lam) < 1e-4:
            lam = g
    if not rect.contains(lam, pad=1e-9):
        return None
    if not _multiplicity_ok(target, lam, m):
        return None
    fval = complex(target.f(np.array([lam]))[0])
    return [LocatedZero(lam, m, abs(fval), rect, "rectangle-subdivision")]


def _subdivide(target, res, theta, cache):
    for fx, fy in zip(_SPLITS, _SPLITS[::-1]):
        kids = res.rect.split(fx, fy)
        try:
            out = [count_zeros(target, k, theta, retries=0, cache=cache) for k in kids]
        except (ContourError, PrecisionError):
            continue
        if sum(o.count for o in out) == res.count:
            return out
    raise PrecisionError(
        f"no admissible split of {res.rect} reproduces the count {res.count}",
        value=res.value,
        tracked=res.count,
    )


def isolate_zeros(red, rect, tol=1e-10, m_cap=3, leaf_diameter=0.1, max_depth=40, theta=THETA):
    """All zeros of Phi inside ``rect`` with multiplicities.

    Multiplicities of the returned zeros sum to the winding count of the
    (possibly dilated) rectangle.  Output is sorted by (Re, Im).
    """
    target = red if isinstance(red, _Target) else _Target(red)
    cache = {}
    root = count_zeros(target, rect, theta, cache=cache)
    found = []
    stack = [(root, 0)]
    while stack:
        res, depth = stack.pop()
        if res.count == 0:
            continue
        if res.count <= m_cap and res.rect.diameter < leaf_diameter:
            leaf = _resolve_leaf(target, res, tol)
            if leaf is not None:
                found.extend(leaf)
                continue
        if depth >= max_depth:
            raise IsolationError(f"depth {max_depth} reached around {res.rect.center}")
        for kid in _subdivide(target, res, theta, cache):
            stack.append((kid, depth + 1))
    found.sort(key=lambda z: (z.value.real, z.value.imag))
    total = sum(z.multiplicity for z in found)
    if total != root.count:
        raise IsolationError(f"found multiplicity {total}, expected {root.count}")
    return found
