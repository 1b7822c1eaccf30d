"""Eigenfunctions, root chains, the resolvent and expansion diagnostics.

Notation: I(x) = exp(-i int_0^x V + i lam x) is the integrating factor,
so that (I f)' = -i I (i f' + (V - lam) f).  Everything below follows
from integrating that identity once.
"""

from dataclasses import dataclass
from math import factorial

import numpy as np
from scipy.optimize import linear_sum_assignment

from .charfn import ProblemSpec, char_residual, phi_derivative, reduce
from .errors import (
    CoverageError,
    DegenerateNormalizationError,
    NearSingularError,
    NotAnEigenvalueError,
    ParameterError,
)
from .funcspace import (
    SQRT_2PI,
    GridFunction,
    antiderivative,
    derivative,
    inner_product,
    l2_norm,
    psi,
)

EIGEN_TOL = 1e-6
SINGULAR_TOL = 1e-6


@dataclass(frozen=True)
class EigenPair:
    lam: complex
    phi: GridFunction
    phi_adj: GridFunction
    normalization: complex
    multiplicity: int = 1
    chain: tuple = ()  # primal root chain u_0 = phi, u_1, ... for multiplicity > 1
    adj_chain: tuple = ()  # adjoint root space basis

    @property
    def unit_phi(self):
        return self.phi / l2_norm(self.phi)


@dataclass(frozen=True)
class RootChain:
    lam: complex
    functions: tuple

    def __len__(self):
        return len(self.functions)


def apply_operator(spec, f):
    """A f = i f' + V f + f(2pi) k (boundary condition not enforced)."""
    return 1j * derivative(f) + spec.V * f + f.end * spec.k


def _residual_scale(spec, lam):
    # char_residual is (rho + i int I k) / I(2pi) - 1; its natural size
    I_end = spec.integrating_factor(np.array([lam]))[0, -1]
    return 1.0 + abs(spec.rho / I_end)


def eigenfunction(spec, lam, tol=EIGEN_TOL):
    """phi(x) = (2pi)^{-1/2} (i int_0^x I k + rho) / I(x) at an eigenvalue lam."""
    lam = complex(lam)
    res = abs(char_residual(spec, lam))
    if res > tol * _residual_scale(spec, lam):
        raise NotAnEigenvalueError(f"|char_residual({lam})| = {res:.3g}")
    I = GridFunction(spec.integrating_factor(np.array([lam]))[0], spec.grid)
    h = 1j * antiderivative(I * spec.k) + spec.rho
    return h / I / SQRT_2PI


def adjoint_eigenfunction(spec, lam):
    """exp(-i conj(lam) x + i int_0^x conj V), eigenfunction of A* at conj(lam)."""
    lam = complex(lam)
    x = spec.grid.x
    vals = np.exp(-1j * np.conj(lam) * x + 1j * np.conj(spec.V_int.values))
    return GridFunction(vals, spec.grid)


def eigen_residual(spec, lam, phi):
    """(||A phi - lam phi|| / ||phi||, |phi(0) - rho phi(2pi)|)."""
    r = apply_operator(spec, phi) - complex(lam) * phi
    return l2_norm(r) / l2_norm(phi), abs(phi.start - spec.rho * phi.end)


def adjoint_root_chain(lam, mult, grid=None):
    """x^j exp(-i conj(lam) x), j < mult: the adjoint root space of P_{1,K}."""
    if mult < 1:
        raise ParameterError("multiplicity must be positive")
    base = GridFunction.from_callable(lambda x: np.exp(-1j * np.conj(lam) * x), grid)
    x = base.grid.x
    return RootChain(complex(lam), tuple(GridFunction(x ** j * base.values, base.grid) for j in range(mult)))


def adjoint_boundary_defect(red, f):
    """f(2pi) - f(0) - <iK, f>: vanishes exactly on the adjoint domain of P_{1,K}.

    For f = x^j exp(-i conj(lam) x) the defect D_j satisfies
    Phi^(j)(lam) = -i^j conj(D_j).
    """
    return f.end - f.start - inner_product(1j * red.K, f)


def _p_chain(red, mu, mult):
    """u_j = (1/j!) d^j/dmu^j [exp(-i mu x)(1 + i int_0^x exp(i mu t) K dt)]."""
    x = red.grid.x
    E = np.exp(-1j * mu * x)
    hs = [1.0 + 1j * antiderivative(GridFunction(np.exp(1j * mu * x), red.grid) * red.K).values]
    for r in range(1, mult):
        integrand = GridFunction((1j * x) ** r * np.exp(1j * mu * x), red.grid) * red.K
        hs.append(1j * antiderivative(integrand).values)
    out = []
    for j in range(mult):
        acc = np.zeros_like(x, dtype=complex)
        for l in range(j + 1):
            acc += (-1j * x) ** l / factorial(l) * E * hs[j - l] / factorial(j - l)
        out.append(GridFunction(acc / SQRT_2PI, red.grid))
    return out


def root_chain(spec, lam, mult):
    """Jordan chain u_0..u_{m-1} of A with (A - lam) u_j = u_{j-1}.

    Built on the reduced operator, where the chain is a lam-derivative of
    the eigenfunction family, and transported back by rho / W.
    """
    red = reduce(spec)
    mu = complex(lam) - red.eta
    scale = spec.rho / red.W
    return tuple(scale * u for u in _p_chain(red, mu, mult))


def adjoint_chain(spec, lam, mult):
    """Adjoint root space of A at conj(lam): conj(W) x^j exp(-i conj(lam - eta) x)."""
    red = reduce(spec)
    base = adjoint_root_chain(complex(lam) - red.eta, mult, spec.grid)
    return tuple(red.W.conj() * f for f in base.functions)


def eigenpair(spec, lam, mult=1, tol=EIGEN_TOL):
    phi = eigenfunction(spec, lam, tol)
    adj = adjoint_eigenfunction(spec, lam)
    norm = inner_product(adj, phi)
    chain, adj_chain = (), ()
    if mult > 1:
        chain = root_chain(spec, lam, mult)
        adj_chain = adjoint_chain(spec, lam, mult)
    return EigenPair(complex(lam), phi, adj, norm, mult, chain, adj_chain)


def eigenpairs(spec, spectrum, tol=EIGEN_TOL):
    return [eigenpair(spec, z.value, z.multiplicity, tol) for z in spectrum.eigenvalues]


def _resolvent_parts(spec, lam):
    lam = complex(lam)
    I = GridFunction(spec.integrating_factor(np.array([lam]))[0], spec.grid)
    h = 1j * antiderivative(I * spec.k) + spec.rho
    denom = I.end - h.end  # = -I(2pi) * char_residual
    res = abs(denom / I.end)
    if res < SINGULAR_TOL * _residual_scale(spec, lam):
        raise NearSingularError(f"{lam} is within the eigenvalue tolerance", distance=res)
    return I, h, denom


def apply_resolvent(spec, lam, g):
    """(A - lam)^{-1} g by the integrating-factor formula."""
    I, h, denom = _resolvent_parts(spec, lam)
    Ig = antiderivative(I * g)
    c = -1j * Ig.end / denom  # = f(2pi)
    return (c * h - 1j * Ig) / I


def hs_norm(spec, lam):
    """Hilbert-Schmidt norm of (A - lam)^{-1}.

    The kernel is G(x, t) = -i I(t)/I(x) [h(x)/D + 1_{t<x}], so the t
    integral reduces to J(x) = int_0^x |I|^2 and

        ||G||^2 = int |I(x)|^-2 ( |h/D|^2 J(2pi) + (2 Re(h/D) + 1) J(x) ) dx.
    """
    I, h, denom = _resolvent_parts(spec, lam)
    q = h / denom
    absI2 = GridFunction(np.abs(I.values) ** 2, spec.grid)
    J = antiderivative(absI2)
    qv = q.values
    integrand = (np.abs(qv) ** 2 * J.end.real + (2 * qv.real + 1) * J.values.real) / absI2.values.real
    val = float(spec.grid.weights @ integrand)
    return float(np.sqrt(max(val, 0.0)))


def resolvent_kernel(spec, lam):
    """Dense kernel G(x_i, t_j) on the grid (brute force, for cross-checks)."""
    I, h, denom = _resolvent_parts(spec, lam)
    Iv = I.values
    x = spec.grid.x
    step = (x[None, :] < x[:, None]).astype(float)
    step[np.arange(len(x)), np.arange(len(x))] = 0.5
    return -1j * (Iv[None, :] / Iv[:, None]) * ((h.values / denom)[:, None] + step)


def hs_norm_bruteforce(spec, lam):
    """2-D trapezoid (Gregory weights) over the dense kernel."""
    G = resolvent_kernel(spec, lam)
    w = spec.grid.weights
    return float(np.sqrt(w @ (np.abs(G) ** 2) @ w))


def biorthogonal_coeffs(spectrum, pairs, f):
    """c_n = <phi_adj_n, f> / <phi_adj_n, phi_n> and the reconstruction error."""
    coeffs = []
    recon = GridFunction.constant(0.0, f.grid)
    for p in pairs:
        scale = l2_norm(p.phi_adj) * l2_norm(p.phi)
        if abs(p.normalization) < 1e-10 * scale:
            raise DegenerateNormalizationError(
                f"<phi_adj, phi> vanishes at {p.lam}; multiplicity > 1 suspected"
            )
        c = inner_product(p.phi_adj, f) / p.normalization
        coeffs.append(c)
        recon = recon + c * p.phi
    return np.array(coeffs), l2_norm(recon - f)


def block_coeffs(pair, f):
    """Coordinates of the spectral projection of f onto the root space of ``pair``."""
    if pair.multiplicity == 1:
        return np.array([inner_product(pair.phi_adj, f) / pair.normalization])
    G = np.array([[inner_product(v, u) for u in pair.chain] for v in pair.adj_chain])
    rhs = np.array([inner_product(v, f) for v in pair.adj_chain])
    return np.linalg.solve(G, rhs)


def pair_with_integers(values, ns):
    """Assign eigenvalues to integer slots by minimal total distance.

    Ties prefer smaller |Im|; returns a dict n -> index into values.
    """
    values = np.asarray(values, dtype=complex)
    ns = np.asarray(ns)
    cost = np.abs(values[:, None] - ns[None, :]) ** 2 + 1e-9 * np.abs(values.imag)[:, None]
    rows, cols = linear_sum_assignment(cost)
    return {int(ns[c]): int(r) for r, c in zip(rows, cols)}


def quadratic_closeness(red, spectrum, N_terms):
    """S_J = sum_{|n|<=J} ||psi_n - phi_n||^2 for J = 1..N_terms (J = 0 first).

    phi_n is the eigenfunction of P_{1,K} with the (2pi)^{-1/2} prefactor
    kept, paired to n by its disk for |n| > N and by a distance-minimizing
    assignment inside the rectangle.  Returns an array of length N_terms + 1.
    """
    vals = spectrum.unshifted()
    N = spectrum.tail_threshold
    ns = np.arange(-N_terms, N_terms + 1)
    inner = [n for n in ns if abs(n) <= N]
    boxed = []  # rectangle eigenvalues repeated by multiplicity
    slots = {}
    for z, v in zip(spectrum.eigenvalues, vals):
        if z.provenance == "disk-certified":
            slots[z.enclosure[1]] = v
        else:
            boxed.extend([v] * z.multiplicity)
    if inner and boxed:
        for n, r in pair_with_integers(boxed, inner).items():
            slots[n] = boxed[r]
    missing = [int(n) for n in ns if n not in slots]
    if missing:
        raise CoverageError(f"no eigenvalue paired with n = {missing[:5]}")
    spec = ProblemSpec.momentum(red.K)
    terms = {}
    for n in ns:
        phi = eigenfunction(spec, slots[n], tol=1e-4)
        terms[int(n)] = l2_norm(psi(int(n), red.grid) - phi) ** 2
    out = [terms[0]]
    for J in range(1, N_terms + 1):
        out.append(out[-1] + terms[J] + terms[-J])
    return np.array(out)


def resolvent_difference_rank(spec1, spec2, lam, probes=12, seed=0, modes=8):
    """Singular values of (R1 - R2) applied to random band-limited probes."""
    rng = np.random.default_rng(seed)
    grid = spec1.grid
    cols = []
    for _ in range(probes):
        c = rng.normal(size=2 * modes + 1) + 1j * rng.normal(size=2 * modes + 1)
        g = GridFunction(sum(ci * psi(m, grid).values for ci, m in zip(c, range(-modes, modes + 1))), grid)
        d = apply_resolvent(spec1, lam, g) - apply_resolvent(spec2, lam, g)
        cols.append(d.values * np.sqrt(grid.weights))
    return np.linalg.svd(np.array(cols).T, compute_uv=False)
