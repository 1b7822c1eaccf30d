"""The characteristic function and the similarity reduction.

For the operator A_{rho,k} f = i f' + V f + f(2pi) k with f(0) = rho f(2pi),
``reduce`` produces the similar operator P_{1,K} + eta, whose eigenvalues
are eta plus the zeros of

    Phi(lam) = 1 - exp(2 pi i lam) + i int_0^{2pi} exp(i lam t) K(t) dt.

Phi is evaluated two independent ways:

* ``phi_eval(..., backend="closed")`` splits K = r + q (see
  ``funcspace.JumpSplit``).  The smooth periodic part contributes
  f(lam) * sum_m a~_m / (lam + m) over every mode the grid resolves,
  written through the moment
  mu_0(lam + m) so that the removable singularities at integers cost
  nothing; the polynomial part is integrated exactly through moments
  mu_d(z) = int_0^{2pi} t^d exp(i z t) dt.
* ``backend="quadrature"`` applies the Gregory-corrected trapezoid rule to
  the samples of exp(i lam t) K(t).  Accurate for moderate |lam| only.
"""

from dataclasses import dataclass, field, replace
from functools import cached_property, lru_cache

import numpy as np

from .errors import ParameterError, UnsupportedReductionError
from .funcspace import (
    DEFAULT_M,
    DEFAULT_N,
    SQRT_2PI,
    TWO_PI,
    Grid,
    GridFunction,
    antiderivative,
    fourier_coeff,
    integrate,
)

MAX_ORDER = 6
IM_GUARD = 100.0  # exp(2 pi * 100) is close to the double range

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(64)
_GL_T = np.pi * (_GL_NODES + 1.0)
_GL_W = np.pi * _GL_WEIGHTS
_GL_RADIUS = 30.0


@dataclass(frozen=True)
class Controls:
    """Numerical knobs shared by every stage of the pipeline."""

    grid: int = DEFAULT_N
    modes: int = DEFAULT_M
    b: float = 1.0
    window: int = 32
    n_max: int = 256
    tol: float = 1e-10
    theta: float = 1e-8
    m_cap: int = 3
    max_depth: int = 40
    leaf_diameter: float = 0.1
    tol_range: float = 1e-12
    real_tol: float = 1e-6
    n: int = None  # rectangle index override, never below the certified N

    def __post_init__(self):
        for name in ("tol", "theta", "leaf_diameter", "tol_range", "real_tol", "b"):
            if not getattr(self, name) > 0:
                raise ParameterError(f"control {name} must be positive")
        if self.grid < 4 * self.modes + 4:
            raise ParameterError("grid must satisfy N >= 4M + 4")

    def replace(self, **kw):
        return replace(self, **kw)


@dataclass(frozen=True)
class ProblemSpec:
    """Operator data (V, rho, k) defining A_{rho,k}."""

    V: GridFunction
    rho: complex
    k: GridFunction
    controls: Controls = field(default_factory=Controls)

    def __post_init__(self):
        object.__setattr__(self, "rho", complex(self.rho))
        if self.V.grid.n != self.k.grid.n:
            raise ParameterError("V and k must share a grid")

    @classmethod
    def from_callables(cls, V, rho, k, controls=None):
        controls = controls or Controls()
        grid = Grid(controls.grid)
        return cls(
            GridFunction.from_callable(V, grid),
            rho,
            GridFunction.from_callable(k, grid),
            controls,
        )

    @classmethod
    def momentum(cls, K, controls=None):
        """P_{1,K} written as A_{1,K} with V = 0."""
        controls = controls or Controls(grid=K.grid.n)
        return cls(GridFunction.constant(0.0, K.grid), 1.0, K, controls)

    @property
    def grid(self):
        return self.V.grid

    @property
    def V_R(self):
        return self.V.real

    @property
    def V_I(self):
        return self.V.imag

    @cached_property
    def V_int(self):
        """int_0^x V dt."""
        return antiderivative(self.V)

    def integrating_factor(self, lam):
        """I_{V,lam}(x) = exp(-i int_0^x V + i lam x), shape (..., N+1)."""
        lam = np.asarray(lam, dtype=complex)
        return np.exp(-1j * self.V_int.values + 1j * lam[..., None] * self.grid.x)


@dataclass(frozen=True)
class CoeffSequence:
    """a_m = <psi_{-m}, K> for |m| <= M."""

    values: np.ndarray

    @property
    def support(self):
        return len(self.values) // 2

    @property
    def m(self):
        s = self.support
        return np.arange(-s, s + 1)

    def __getitem__(self, m):
        s = self.support
        if abs(m) > s:
            return 0j
        return complex(self.values[m + s])

    @classmethod
    def from_modes(cls, modes, support=None):
        if support is None:
            support = max([abs(m) for m in modes] + [0])
        vals = np.zeros(2 * support + 1, dtype=complex)
        for m, c in modes.items():
            vals[m + support] = c
        return cls(vals)


@dataclass(frozen=True, eq=False)
class ReducedProblem:
    """P_{1,K} + eta together with the multiplier W."""

    eta: complex
    W: GridFunction
    K: GridFunction
    modes: int = DEFAULT_M

    @classmethod
    def from_K(cls, K, eta=0.0, modes=DEFAULT_M):
        return cls(complex(eta), GridFunction.constant(1.0, K.grid), K, modes)

    @property
    def grid(self):
        return self.K.grid

    @cached_property
    def a(self):
        m = np.arange(-self.modes, self.modes + 1)
        return CoeffSequence(fourier_coeff(self.K, -m))

    @cached_property
    def _closed_data(self):
        # every resolved mode of the smooth remainder, minus the negligible ones
        split = self.K.split
        half = self.grid.n // 2
        m = np.arange(-half + 1, half)
        atil = split.remainder_coeff(-m)
        mags = np.abs(atil)
        # FFT round-off of a smooth remainder sits near 1e-16 of its peak
        keep = mags > 2e-15 * max(mags.max(initial=0.0), 1e-300)
        return m[keep], atil[keep], split.poly

    def disk_coeff(self, n):
        """<psi_n, K> for any |n| < N/2."""
        return fourier_coeff(self.K, n)

    def truncation_bound(self, lam, modes=None):
        """Error bound for a closed form cut at |m| <= modes (default M)."""
        modes = self.modes if modes is None else modes
        split = self.K.split
        half = self.grid.n // 2
        m = np.concatenate([np.arange(-half + 1, -modes), np.arange(modes + 1, half)])
        tail = np.abs(split.remainder_coeff(-m))
        lam = complex(lam)
        dist = np.maximum(np.abs(lam + m), 0.5)
        grow = 1.0 + np.exp(-TWO_PI * lam.imag)
        return float(grow * np.sum(tail / dist) / SQRT_2PI)


def _check_lambda(lam):
    lam = np.asarray(lam, dtype=complex)
    if lam.size and np.max(np.abs(lam.imag)) > IM_GUARD:
        raise ParameterError(f"|Im lambda| > {IM_GUARD} overflows double precision")
    return lam


def mu0(z):
    """int_0^{2pi} exp(i z t) dt, stable through z = 0."""
    z = np.asarray(z, dtype=complex)
    w = TWO_PI * 1j * z
    small = np.abs(w) < 1e-300
    safe = np.where(small, 1.0, w)
    return np.where(small, TWO_PI, TWO_PI * np.expm1(safe) / safe)


@lru_cache(maxsize=None)
def _gl_powers(dmax):
    """Weighted node powers w_j t_j^d, shape (64, dmax + 1)."""
    return (_GL_W[:, None] * _GL_T[:, None] ** np.arange(dmax + 1)).astype(complex)


def moments(z, dmax):
    """mu_d(z) = int_0^{2pi} t^d exp(i z t) dt for d = 0..dmax.

    Gauss-Legendre (64 nodes) for |2 pi z| < 30, upward recursion
    mu_d = (2pi^d e^{2 pi i z} - d mu_{d-1}) / (i z) beyond, where it is
    stable for the orders used here (dmax <= 12).
    """
    z = np.asarray(z, dtype=complex)
    out = np.empty(z.shape + (dmax + 1,), dtype=complex)
    small = np.abs(TWO_PI * z) < _GL_RADIUS
    if np.any(small):
        zs = z[small]
        e = np.exp(1j * zs[:, None] * _GL_T)
        out[small] = e @ _gl_powers(dmax)
    big = ~small
    if np.any(big):
        zb = z[big]
        e2 = np.exp(TWO_PI * 1j * zb)
        iz = 1j * zb
        cur = (e2 - 1.0) / iz
        res = [cur]
        for d in range(1, dmax + 1):
            cur = (TWO_PI ** d * e2 - d * cur) / iz
            res.append(cur)
        out[big] = np.stack(res, axis=-1)
    return out


def _series_moments(lam, m, kmax, E):
    """mu_d(lam + m) for d = 0..kmax as a list of (L, len(m)) arrays.

    exp(2 pi i (lam + m)) = exp(2 pi i lam) for integer m, so the upward
    recursion shares E; the few entries with small |lam + m| use quadrature.
    """
    z = lam[:, None] + m[None, :]
    near = np.abs(TWO_PI * z) < _GL_RADIUS
    iz = 1j * np.where(near, 1.0, z)
    E = E[:, None]
    cur = (E - 1.0) / iz
    out = [cur]
    for d in range(1, kmax + 1):
        cur = ((TWO_PI ** d) * E - d * cur) / iz
        out.append(cur)
    if np.any(near):
        exact = moments(z[near], kmax)
        for d in range(kmax + 1):
            out[d][near] = exact[:, d]
    return out


def _phi_closed(red, lam, orders=(0,)):
    """Closed-form Phi^(k) for each k in ``orders``; returns a list."""
    lam = _check_lambda(lam)
    m, atil, poly = red._closed_data
    shape = lam.shape
    flat = lam.reshape(-1)
    E = np.exp(TWO_PI * 1j * flat)
    kmax = max(orders)
    series = None
    if len(m):
        series = _series_moments(flat, m, kmax, E)
    deg = int(np.max(np.nonzero(poly)[0])) if np.any(poly) else -1
    pmom = moments(flat, deg + kmax) if deg >= 0 else None
    res = []
    for k in orders:
        base = 1.0 - E if k == 0 else -((TWO_PI * 1j) ** k) * E
        acc = np.zeros(flat.shape, dtype=complex)
        if series is not None:
            acc += series[k] @ atil / SQRT_2PI
        if pmom is not None:
            acc += pmom[:, k: k + deg + 1] @ poly[: deg + 1]
        res.append((base + (1j ** (k + 1)) * acc).reshape(shape))
    return res


def _phi_quadrature(red, lam, order=0):
    lam = _check_lambda(lam)
    x = red.grid.x
    w = red.grid.weights * red.K.values
    if order:
        w = w * (1j * x) ** order
    shape = lam.shape
    flat = lam.reshape(-1)
    integral = np.exp(1j * flat[:, None] * x[None, :]) @ w
    e2 = np.exp(TWO_PI * 1j * flat)
    base = 1.0 - e2 if order == 0 else -((TWO_PI * 1j) ** order) * e2
    return (base + 1j * integral).reshape(shape)


def _scalar(lam, out):
    return complex(out) if np.ndim(lam) == 0 else out


def phi_eval(red, lam, backend="closed"):
    """Phi(lam) for scalar or array ``lam``."""
    if backend == "closed":
        out = _phi_closed(red, lam)[0]
    elif backend == "quadrature":
        out = _phi_quadrature(red, lam)
    else:
        raise ParameterError(f"unknown backend {backend!r}")
    return _scalar(lam, out)


def phi_derivative(red, lam, order=1, backend="closed"):
    """Phi^(order)(lam) for 1 <= order <= 6."""
    if not 1 <= order <= MAX_ORDER:
        raise ParameterError(f"derivative order must be in 1..{MAX_ORDER}")
    if backend == "closed":
        out = _phi_closed(red, lam, (order,))[0]
    elif backend == "quadrature":
        out = _phi_quadrature(red, lam, order)
    else:
        raise ParameterError(f"unknown backend {backend!r}")
    return _scalar(lam, out)


def phi_with_derivative(red, lam):
    """(Phi, Phi') sharing one pass over the modes; array in, arrays out."""
    f, df = _phi_closed(red, np.asarray(lam), (0, 1))
    return f, df


def log_rho(rho):
    """ln|rho| + i*phi with phi in [0, 2pi)."""
    rho = complex(rho)
    phase = np.angle(rho) % TWO_PI
    if phase >= TWO_PI:
        phase = 0.0
    return complex(np.log(abs(rho)), phase)


def reduce(spec):
    """Similarity data (eta, W, K) turning A_{rho,k} into P_{1,K} + eta."""
    if spec.rho == 0:
        raise UnsupportedReductionError(
            "rho = 0 has no similarity reduction; use char_residual directly"
        )
    x = spec.grid.x
    eta = (integrate(spec.V) - 1j * log_rho(spec.rho)) / TWO_PI
    W = GridFunction(np.exp(-1j * spec.V_int.values + 1j * eta * x), spec.grid)
    K = W * spec.k / W.end
    return ReducedProblem(eta, W, K, spec.controls.modes)


def char_residual(spec, lam):
    """Left side of the eigenvalue equation minus one; zero at eigenvalues."""
    lam = _check_lambda(lam)
    I = spec.integrating_factor(lam)
    w = spec.grid.weights
    inner = I @ (w * spec.k.values)
    lhs = (1j * inner + spec.rho) / I[..., -1]
    return _scalar(lam, lhs - 1.0)
