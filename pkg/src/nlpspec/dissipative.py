"""Maximal dissipativity, the real-eigenvalue construction and its census.

A_{rho,k} with Im V = V_I >= 0 is maximally dissipative exactly when k
lies in the range of V_I^{1/2} and

    1 - |rho|^2 >= (1/2) || V_I^{-1/2} k ||^2.

On the equality surface at most one real eigenvalue can occur, and for a
prescribed real lam the pair (rho, k) producing it is explicit.
"""

from dataclasses import dataclass, field

import numpy as np

from .charfn import ProblemSpec
from .errors import HypothesisViolationError, ParameterError, TheoremViolationError
from .funcspace import GridFunction, antiderivative

NEGATIVE_TOL = 1e-12
MARGIN_TOL = 1e-10


@dataclass(frozen=True)
class DissipativityReport:
    admissible: bool
    margin: float
    range_ok: bool
    details: dict = field(default_factory=dict)


@dataclass(frozen=True)
class RealCensus:
    count: int
    witnesses: tuple


def _check_hypothesis(V):
    vi = V.values.imag
    worst = float(vi.min())
    if worst < -NEGATIVE_TOL:
        raise HypothesisViolationError(f"Im V reaches {worst:.3g} < 0")
    return vi


def check_dissipative(spec, tol_range=1e-12):
    """Dissipativity margin and the range proxy for k in ran(V_I^{1/2}).

    Points with V_I < tol_range are excluded from the weighted norm and
    must carry |k| < tol_range.
    """
    vi = _check_hypothesis(spec.V)
    k = spec.k.values
    good = vi >= tol_range
    ratio = np.zeros_like(vi)
    ratio[good] = np.abs(k[good]) ** 2 / vi[good]
    weighted = float(spec.grid.weights @ ratio)
    bad_k = np.abs(k[~good])
    range_ok = bool(np.all(bad_k < tol_range))
    margin = (1.0 - abs(spec.rho) ** 2) - 0.5 * weighted
    details = {
        "weighted_norm_sq": weighted,
        "min_V_I": float(vi.min()),
        "cut_points": int(np.count_nonzero(~good)),
        "max_k_on_cut": float(bad_k.max()) if bad_k.size else 0.0,
        "V_I_support": bool(np.any(good)),
    }
    admissible = range_ok and margin >= -MARGIN_TOL
    return DissipativityReport(bool(admissible), float(margin), range_ok, details)


def construct_real_eigen(V, lam):
    """(rho, k, g) making lam a real eigenvalue on the equality surface.

    g(x) = (2/i) exp(-i int_x^{2pi} conj V + (2pi - x) i lam),
    rho = (i/2) g(0), k = V_I g.
    """
    lam = complex(lam)
    if abs(lam.imag) > 0:
        raise ParameterError("the constructed eigenvalue must be real")
    lam = lam.real
    vi = _check_hypothesis(V)
    x = V.grid.x
    Vint = antiderivative(V).values
    tail = np.conj(Vint[-1] - Vint)  # int_x^{2pi} conj V
    g = GridFunction(-2j * np.exp(-1j * tail + 1j * lam * (2 * np.pi - x)), V.grid)
    rho = 0.5j * g.start
    k = GridFunction(vi * g.values, V.grid)
    return rho, k, g


def constructed_spec(V, lam, controls=None):
    rho, k, _ = construct_real_eigen(V, lam)
    if controls is None:
        return ProblemSpec(V, rho, k)
    return ProblemSpec(V, rho, k, controls)


def real_eigen_census(spectrum, tol=None):
    """Eigenvalues with |Im lam| below tol (default 1e-6 (1 + |lam|))."""
    wit = []
    for z in spectrum.eigenvalues:
        t = 1e-6 * (1 + abs(z.value)) if tol is None else tol
        if abs(z.value.imag) < t:
            wit.extend([z.value] * z.multiplicity)
    if len(wit) >= 2:
        raise TheoremViolationError(f"{len(wit)} real eigenvalues found: {wit}")
    return RealCensus(len(wit), tuple(wit))
