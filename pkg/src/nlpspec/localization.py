"""Enclosures for the zeros of Phi and assembly of the full spectrum.

Around every integer n the zero of Phi is compared with the zero of
f(lam) = 1 - exp(2 pi i lam) by Rouche's theorem:

    Phi / f - 1 = -c_n / (sqrt(2 pi) (lam - n)) - R_n(lam),

with c_n = <psi_n, K>.  On the circle |lam - n| = |c_n| the first term has
modulus 1/sqrt(2 pi), so one zero sits in the disk of radius |c_n| as soon
as the sampled ratio stays below one.  Finitely many integers fail; they
are collected in the rectangle R_{N,b}, counted by the argument principle.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from .charfn import CoeffSequence, phi_eval
from .errors import (
    AssemblyError,
    ParameterError,
    SingularityError,
    StateError,
    ThresholdNotFoundError,
)
from .funcspace import SQRT_2PI, TWO_PI
from .rootfinder import (
    THETA,
    LocatedZero,
    Rectangle,
    _Target,
    count_zeros,
    isolate_zeros,
    refine_zero,
)

RADIUS_LIMIT = 0.5
ZERO_RADIUS = 1e-12
CIRCLE_POINTS = 64
B_GROWTH = 1.25
B_LIMIT = 40.0
WINDING_RATIO = 0.5


@dataclass(frozen=True)
class DiskCheck:
    n: int
    radius: float
    ratio: float
    winding: int

    @property
    def passed(self):
        return self.radius < RADIUS_LIMIT and self.ratio < 1.0 and self.winding == 1


@dataclass(frozen=True)
class ThresholdReport:
    N: int
    n_max: int
    failures: tuple  # integers n with a failed certificate


@dataclass(frozen=True)
class Spectrum:
    eigenvalues: tuple
    tail_threshold: int
    rectangle: Rectangle
    disks: dict
    eta_shift: complex = None
    b_requested: float = None
    b_certified: float = None
    window: int = None
    certified_up_to: int = None

    def __len__(self):
        return len(self.eigenvalues)

    @property
    def values(self):
        return np.array([z.value for z in self.eigenvalues], dtype=complex)

    @property
    def multiplicities(self):
        return np.array([z.multiplicity for z in self.eigenvalues], dtype=int)

    def in_rectangle(self):
        return [z for z in self.eigenvalues if z.provenance == "rectangle-subdivision"]

    def unshifted(self):
        """Eigenvalues of P_{1,K} regardless of any recorded shift."""
        shift = 0 if self.eta_shift is None else self.eta_shift
        return self.values - shift


def disk_radius(red, n):
    """|<psi_n, K>|, the radius of the disk around n holding one zero."""
    return float(abs(red.disk_coeff(int(n))))


def hilbert_row(a, eta, n):
    """Row n of the Hilbert-type matrix applied to a: sum_m a_m / (m + n + eta)."""
    if not isinstance(a, CoeffSequence):
        a = CoeffSequence(np.asarray(a, dtype=complex))
    m = a.m
    active = a.values != 0
    denom = m[active] + n + complex(eta)
    if np.any(denom == 0):
        raise SingularityError(f"m + n + eta vanishes for n = {n}")
    return complex(np.sum(a.values[active] / denom))


def _ratio_on_circles(red, ns, radii):
    theta = np.linspace(0.0, TWO_PI, CIRCLE_POINTS, endpoint=False)
    rr = np.where(radii < ZERO_RADIUS, 0.5, radii)
    pts = ns[:, None] + rr[:, None] * np.exp(1j * theta)[None, :]
    phi = phi_eval(red, pts)
    f = -np.expm1(TWO_PI * 1j * (pts - ns[:, None]))
    return np.max(np.abs(phi / f - 1.0), axis=1), rr


def threshold_report(red, n_max=256, theta=THETA):
    """Certificates for every 1 <= |n| <= n_max.

    A disk passes when its radius is below 1/2, the ratio |Phi/f - 1| stays
    below one on 64 points of its boundary circle (radius 1/2 when the
    coefficient vanishes), and the winding count over its bounding square
    is one.  The winding cross-check runs only on marginal disks, those
    whose sampled ratio exceeds WINDING_RATIO; below it the sampled ratio
    leaves a wide margin for Rouche.
    """
    # coefficients are only resolved for |n| < N/2
    n_max = min(int(n_max), red.grid.n // 2 - 1)
    ns = np.concatenate([np.arange(-n_max, 0), np.arange(1, n_max + 1)])
    radii = np.abs(red.disk_coeff(ns))
    ratios, rr = _ratio_on_circles(red, ns, radii)
    target = _Target(red)
    failures = []
    for n, r, q, half in zip(ns, radii, ratios, rr):
        if r >= RADIUS_LIMIT or q >= 1.0:
            failures.append(int(n))
            continue
        if q < WINDING_RATIO:
            continue
        try:
            w = count_zeros(target, Rectangle.square(n, half), theta, retries=0).count
        except Exception:
            w = -1
        if w != 1:
            failures.append(int(n))
    N = max((abs(n) for n in failures), default=0)
    return ThresholdReport(N, n_max, tuple(sorted(failures)))


def tail_threshold(red, n_max=256, theta=THETA):
    """Smallest N such that every disk with N < |n| <= n_max is certified."""
    rep = threshold_report(red, n_max, theta)
    if rep.N >= rep.n_max:
        raise ThresholdNotFoundError(
            f"disk certificates fail up to |n| = {rep.n_max}; raise n_max or the grid size"
        )
    return rep.N


def edges_ratio(red, rect, density=64):
    """max |Phi/f - 1| sampled along the boundary of ``rect``."""
    zs = []
    for a, b in zip(rect.corners, rect.corners[1:] + rect.corners[:1]):
        npts = max(64, int(np.ceil(density * abs(b - a))))
        t = np.linspace(0.0, 1.0, npts, endpoint=False)
        zs.append(a + t * (b - a))
    z = np.concatenate(zs)
    f = -np.expm1(TWO_PI * 1j * z)
    return float(np.max(np.abs(phi_eval(red, z) / f - 1.0)))


def certify_height(red, N, b):
    """Smallest b' = b * 1.25^j with |Phi - f| < |f| on the boundary of R_{N,b'}."""
    cur = float(b)
    while cur <= B_LIMIT:
        if edges_ratio(red, Rectangle.centred(N, cur)) < 1.0:
            return cur
        cur *= B_GROWTH
    raise AssemblyError(f"no height b <= {B_LIMIT} passes the boundary check for N = {N}")


def assemble_spectrum(red, b=1.0, window=32, n_max=256, tol=1e-10, N=None, theta=THETA,
                      m_cap=3, leaf_diameter=0.1, max_depth=40):
    """Every eigenvalue of P_{1,K} in R_{N,b} and in the disks N < |n| <= window.

    ``N`` may be given to enlarge the rectangle beyond the certified
    threshold (never to shrink it).
    """
    N_cert = tail_threshold(red, n_max, theta)
    if N is None:
        N = N_cert
    elif N < N_cert:
        raise ParameterError(f"N = {N} is below the certified threshold {N_cert}")
    if window < N:
        window = N
    b_cert = certify_height(red, N, b)
    rect = Rectangle.centred(N, b_cert)
    zeros = isolate_zeros(red, rect, tol, m_cap=m_cap, leaf_diameter=leaf_diameter,
                          max_depth=max_depth, theta=theta)
    total = sum(z.multiplicity for z in zeros)
    if total != 2 * N + 1:
        rect = Rectangle.centred(N, 2 * b_cert)
        zeros = isolate_zeros(red, rect, tol, m_cap=m_cap, leaf_diameter=leaf_diameter,
                              max_depth=max_depth, theta=theta)
        total = sum(z.multiplicity for z in zeros)
        if total != 2 * N + 1:
            raise AssemblyError(f"rectangle holds {total} zeros, expected {2 * N + 1}")
    disks = {}
    tail = []
    for n in [s * j for j in range(N + 1, window + 1) for s in (-1, 1)]:
        r = disk_radius(red, n)
        disks[n] = r
        if r < ZERO_RADIUS:
            lam = complex(n)
        else:
            start = n + red.disk_coeff(n) / SQRT_2PI
            lam = refine_zero(red, start, 1, tol)
            if abs(lam - n) > r + 1e-9:
                raise AssemblyError(f"refined zero {lam} left the disk around {n}")
        res = abs(phi_eval(red, lam))
        tail.append(LocatedZero(lam, 1, res, ("disk", n, r), "disk-certified"))
    allz = sorted(zeros + tail, key=lambda z: (z.value.real, z.value.imag))
    return Spectrum(
        tuple(allz), N, rect, disks, None, float(b), b_cert, window, min(n_max, red.grid.n // 2 - 1)
    )


def map_spectrum(spec, eta):
    """Translate every eigenvalue by eta (P_{1,K} + eta -> A_{rho,k})."""
    if spec.eta_shift is not None:
        raise StateError("spectrum is already shifted")
    eta = complex(eta)
    moved = tuple(replace(z, value=z.value + eta) for z in spec.eigenvalues)
    return replace(spec, eigenvalues=moved, eta_shift=eta)


def spectrum_of(spec, window=None, b=None, N=None):
    """Spectrum of A_{rho,k}: reduce, assemble with the problem's own controls, shift by eta."""
    from .charfn import reduce

    c = spec.controls
    red = reduce(spec)
    s = assemble_spectrum(
        red,
        b=c.b if b is None else b,
        window=c.window if window is None else window,
        n_max=c.n_max,
        tol=c.tol,
        N=c.n if N is None else N,
        theta=c.theta,
        m_cap=c.m_cap,
        leaf_diameter=c.leaf_diameter,
        max_depth=c.max_depth,
    )
    return map_spectrum(s, red.eta), red
