"""Complex functions on [0, 2*pi]: grids, quadrature, Fourier analysis.

Two representations are used:

* ``GridFunction`` -- samples on the closed uniform grid x_j = j*h,
  j = 0..N, h = 2*pi/N.  No periodicity is assumed.
* ``PeriodicFunction`` -- a band-limited function given by its
  coefficients c_m in the basis psi_m(x) = (2*pi)**-0.5 * exp(-i*m*x),
  |m| <= M, together with its samples on the same grid.

Fourier coefficients of non-periodic samples are computed with an
endpoint-jump split: f = r + q where q is a polynomial (a combination of
Bernoulli polynomials) carrying the jumps f^(l)(2*pi) - f^(l)(0) for
l < JUMP_ORDER, and r is periodic with continuous derivatives up to that
order.  The coefficients of q are known in closed form and those of r come
from the periodic trapezoid rule (FFT), which is then rapidly convergent.
"""

from dataclasses import dataclass
from functools import cached_property
from math import comb, factorial

import numpy as np

from ._stencils import (
    bernoulli_numbers,
    cell_integral_weights,
    derivative_weights,
    gregory_corrections,
)
from .errors import DimensionError, ParameterError

TWO_PI = 2.0 * np.pi
SQRT_2PI = np.sqrt(TWO_PI)

DEFAULT_N = 1024
DEFAULT_M = 64

GREGORY_ORDER = 8
CUMULATIVE_STENCIL = 10
DERIVATIVE_STENCIL = 11
JUMP_ORDER = 4
JUMP_STENCIL = 8


@dataclass(frozen=True)
class Grid:
    """Closed uniform grid with ``n`` cells on [0, 2*pi]."""

    n: int = DEFAULT_N

    def __post_init__(self):
        if self.n < 2 * max(GREGORY_ORDER, DERIVATIVE_STENCIL):
            raise ParameterError(f"grid too small: n={self.n}")

    @cached_property
    def x(self):
        return np.linspace(0.0, TWO_PI, self.n + 1)

    @property
    def h(self):
        return TWO_PI / self.n

    @cached_property
    def weights(self):
        """Gregory end-corrected trapezoid weights (exact to degree 7)."""
        w = np.full(self.n + 1, self.h)
        w[0] = w[-1] = 0.5 * self.h
        c = gregory_corrections(GREGORY_ORDER) * self.h
        w[: len(c)] += c
        w[-len(c):] += c[::-1]
        return w


def _as_grid(grid):
    if grid is None:
        return Grid()
    if isinstance(grid, int):
        return Grid(grid)
    return grid


class GridFunction:
    """Samples of a complex function on the closed grid (N + 1 values)."""

    def __init__(self, values, grid=None):
        grid = _as_grid(grid)
        values = np.asarray(values, dtype=complex)
        if values.shape == ():
            values = np.full(grid.n + 1, complex(values))
        if values.shape != (grid.n + 1,):
            raise DimensionError(
                f"expected {grid.n + 1} samples, got shape {values.shape}"
            )
        values = values.copy()
        values.flags.writeable = False
        self.values = values
        self.grid = grid

    @classmethod
    def from_callable(cls, fn, grid=None):
        grid = _as_grid(grid)
        return cls(np.broadcast_to(fn(grid.x), grid.x.shape), grid)

    @classmethod
    def constant(cls, c, grid=None):
        return cls(complex(c), grid)

    def __repr__(self):
        return f"{type(self).__name__}(n={self.grid.n})"

    def _check(self, other):
        if isinstance(other, GridFunction):
            if other.grid.n != self.grid.n:
                raise DimensionError(
                    f"grid mismatch: {self.grid.n} vs {other.grid.n}"
                )
            return other.values
        return other

    def __add__(self, other):
        return GridFunction(self.values + self._check(other), self.grid)

    __radd__ = __add__

    def __sub__(self, other):
        return GridFunction(self.values - self._check(other), self.grid)

    def __rsub__(self, other):
        return GridFunction(self._check(other) - self.values, self.grid)

    def __mul__(self, other):
        return GridFunction(self.values * self._check(other), self.grid)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return GridFunction(self.values / self._check(other), self.grid)

    def __rtruediv__(self, other):
        return GridFunction(self._check(other) / self.values, self.grid)

    def __neg__(self):
        return GridFunction(-self.values, self.grid)

    def conj(self):
        return GridFunction(np.conj(self.values), self.grid)

    @property
    def real(self):
        return GridFunction(self.values.real, self.grid)

    @property
    def imag(self):
        return GridFunction(self.values.imag, self.grid)

    @property
    def start(self):
        return complex(self.values[0])

    @property
    def end(self):
        return complex(self.values[-1])

    @cached_property
    def split(self):
        return JumpSplit.of(self)


class PeriodicFunction(GridFunction):
    """Band-limited function sum_{|m|<=M} coeffs[m] * psi_m."""

    def __init__(self, coeffs, grid=None):
        grid = _as_grid(grid)
        coeffs = np.asarray(coeffs, dtype=complex)
        if coeffs.ndim != 1 or len(coeffs) % 2 != 1:
            raise ParameterError("coeffs must have odd length 2M+1")
        order = len(coeffs) // 2
        if grid.n < 4 * order + 4:
            raise ParameterError(f"grid n={grid.n} too small for M={order}")
        super().__init__(synthesize(coeffs, grid), grid)
        coeffs = coeffs.copy()
        coeffs.flags.writeable = False
        self.coeffs = coeffs

    @property
    def order(self):
        return len(self.coeffs) // 2

    @classmethod
    def from_modes(cls, modes, order=None, grid=None):
        """Build from a mapping {m: coefficient of psi_m}."""
        if order is None:
            order = max([abs(int(m)) for m in modes] + [0])
        coeffs = np.zeros(2 * order + 1, dtype=complex)
        for m, c in modes.items():
            coeffs[int(m) + order] = c
        return cls(coeffs, grid)

    @classmethod
    def from_samples(cls, f, order=DEFAULT_M):
        """Truncate the Fourier series of ``f`` to |m| <= order."""
        m = np.arange(-order, order + 1)
        return cls(fourier_coeff(f, m), f.grid)

    def coeff(self, m):
        if abs(m) > self.order:
            return 0j
        return complex(self.coeffs[m + self.order])


def synthesize(coeffs, grid):
    order = len(coeffs) // 2
    m = np.arange(-order, order + 1)
    return np.exp(-1j * np.outer(grid.x, m)) @ coeffs / SQRT_2PI


def psi(n, grid=None):
    """The Fourier basis function psi_n = (2*pi)**-0.5 * exp(-i*n*x)."""
    return PeriodicFunction.from_modes({n: 1.0}, order=abs(n), grid=grid)


def bernoulli_poly_monomials(j):
    """Monomial coefficients (in t) of beta_j(t) = (2pi)^j/(j+1)! B_{j+1}(t/2pi).

    beta_j has unit jump in its j-th derivative between t = 0 and t = 2*pi
    and continuous derivatives of every other order.
    """
    n = j + 1
    bern = bernoulli_numbers(n)
    out = np.zeros(n + 1)
    for k in range(n + 1):
        d = n - k
        out[d] += comb(n, k) * float(bern[k]) * TWO_PI ** (j - d) / factorial(n)
    return out


def poly_eval(coeffs, t):
    return np.polynomial.polynomial.polyval(t, coeffs)


@dataclass(frozen=True)
class JumpSplit:
    """f = r + q with q a jump-carrying polynomial and r smooth-periodic."""

    jumps: np.ndarray
    poly: np.ndarray  # monomial coefficients of q in t
    fft: np.ndarray  # sqrt(2pi) * ifft(r) -> <psi_n, r> at index n mod N

    @classmethod
    def of(cls, f, order=JUMP_ORDER):
        grid = f.grid
        v = f.values
        scale = max(np.max(np.abs(v)), 1e-300)
        jumps = np.zeros(order, dtype=complex)
        jumps[0] = v[-1] - v[0]
        for l in range(1, order):
            w = derivative_weights(JUMP_STENCIL, l, 0) / grid.h ** l
            left = w @ v[:JUMP_STENCIL]
            right = (-1) ** l * (w @ v[::-1][:JUMP_STENCIL])
            noise = 1e3 * np.finfo(float).eps * scale * np.sum(np.abs(w))
            jumps[l] = 0.0 if abs(right - left) < noise else right - left
        if abs(jumps[0]) < 1e3 * np.finfo(float).eps * scale:
            jumps[0] = 0.0
        poly = np.zeros(order + 1, dtype=complex)
        for l, jl in enumerate(jumps):
            if jl != 0:
                b = bernoulli_poly_monomials(l)
                poly[: len(b)] += jl * b
        r = v[:-1] - poly_eval(poly, grid.x[:-1])
        return cls(jumps, poly, SQRT_2PI * np.fft.ifft(r))

    def remainder_coeff(self, n):
        """<psi_n, r> by the periodic trapezoid rule."""
        n = np.asarray(n)
        return self.fft[np.mod(n, len(self.fft))]

    def poly_coeff(self, n):
        """<psi_n, q> in closed form."""
        n = np.asarray(n)
        out = np.zeros(n.shape, dtype=complex)
        nz = n != 0
        nn = n[nz].astype(float)
        for l, jl in enumerate(self.jumps):
            if jl != 0:
                # int_0^{2pi} q e^{int} dt = -sum_l J_l / (-i n)^(l+1)
                out[nz] -= jl / (-1j * nn) ** (l + 1)
        return out / SQRT_2PI

    def coeff(self, n):
        return self.remainder_coeff(n) + self.poly_coeff(n)


def _same_grid(*fs):
    n = fs[0].grid.n
    for f in fs[1:]:
        if f.grid.n != n:
            raise DimensionError(f"grid mismatch: {n} vs {f.grid.n}")


def fourier_coeff(f, n):
    """<psi_n, f> = (2pi)^-1/2 int_0^{2pi} e^{inx} f(x) dx.

    Periodic trapezoid rule on the smooth part plus the closed-form
    contribution of the endpoint jumps; ``n`` may be an int or an array.
    """
    scalar = np.ndim(n) == 0
    nn = np.atleast_1d(np.asarray(n, dtype=int))
    if np.any(np.abs(nn) >= f.grid.n // 2):
        raise ParameterError(f"|n| must be below N/2 = {f.grid.n // 2}")
    out = f.split.coeff(nn)
    return complex(out[0]) if scalar else out


def integrate(f):
    """int_0^{2pi} f dx with Gregory end corrections."""
    return complex(f.grid.weights @ f.values)


def inner_product(f, g):
    """<f, g>, antilinear in f."""
    _same_grid(f, g)
    return complex(f.grid.weights @ (np.conj(f.values) * g.values))


def l2_norm(f):
    ip = inner_product(f, f)
    if abs(ip.imag) > 1e-10 * max(1.0, abs(ip.real)):
        raise ArithmeticError(f"non-real squared norm {ip}")
    return float(np.sqrt(max(ip.real, 0.0)))


def _sliding(values, size):
    return np.lib.stride_tricks.sliding_window_view(values, size)


def antiderivative(f):
    """F(x) = int_0^x f dt on the grid.

    Each cell is integrated exactly against the degree-9 interpolant on a
    10-point stencil (centred where possible), so the global error is
    O(h^10) for smooth f.
    """
    v = f.values
    n = f.grid.n
    size = CUMULATIVE_STENCIL
    w = cell_integral_weights(size)
    half = size // 2 - 1
    cells = np.empty(n, dtype=complex)
    windows = _sliding(v, size)  # windows[s] covers nodes s..s+size-1
    interior = np.arange(half, n - size + half + 1)
    cells[interior] = windows[interior - half] @ w[half]
    for k in range(n):
        if k < half:
            cells[k] = w[k] @ v[:size]
        elif k > n - size + half:
            s = k - (n - size + 1)
            cells[k] = w[s] @ v[n + 1 - size:]
    out = np.concatenate([[0.0], np.cumsum(cells)]) * f.grid.h
    return GridFunction(out, f.grid)


def derivative(f, order=1):
    """f^(order) by 11-point finite differences (one-sided near the ends)."""
    v = f.values
    n = f.grid.n
    size = DERIVATIVE_STENCIL
    mid = size // 2
    out = np.empty(n + 1, dtype=complex)
    wc = derivative_weights(size, order, mid)
    out[mid: n + 1 - mid] = _sliding(v, size) @ wc
    for j in range(mid):
        out[j] = derivative_weights(size, order, j) @ v[:size]
        out[n - j] = derivative_weights(size, order, size - 1 - j) @ v[n + 1 - size:]
    return GridFunction(out / f.grid.h ** order, f.grid)
