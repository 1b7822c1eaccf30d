"""Spectral evolution under exp(i A t) and operator-norm decay.

Initial data are expanded in the computed root functions; a Jordan block
(A - lam) u_j = u_{j-1} evolves as

    exp(i A t) u_j = exp(i lam t) sum_l (i t)^l / l! u_{j-l}.

Operator norms are taken on the span of the computed root functions:
with weighted QR of the frame U = Q R, the restriction of exp(i A t) has
matrix R D(t) R^{-1} in an orthonormal basis, and its 2-norm is exact.
"""

from dataclasses import dataclass
from math import factorial

import numpy as np

from .dissipative import real_eigen_census
from .eigensystem import block_coeffs
from .errors import NumericsAlarm, TheoremViolationError, TruncationError
from .funcspace import GridFunction, l2_norm

RECON_LIMIT = 0.05
CONTRACTION_SLACK = 1e-6


@dataclass(frozen=True)
class SemigroupTrace:
    times: np.ndarray
    norms: np.ndarray
    regime: str  # "decay-to-zero" or "converges-to-projection"
    zeta: float
    fitted_rate: float
    raw_norms: np.ndarray = None  # uncorrected norms in the projection regime


def spectral_gap(spectrum, tol=None):
    """min Im lam over the non-real computed eigenvalues."""
    ims = []
    for z in spectrum.eigenvalues:
        t = 1e-6 * (1 + abs(z.value)) if tol is None else tol
        if abs(z.value.imag) >= t:
            ims.append(z.value.imag)
    if not ims:
        raise TheoremViolationError("no non-real eigenvalue in the computed window")
    return float(min(ims))


def _blocks(pair):
    return pair.chain if pair.multiplicity > 1 else (pair.phi,)


def _block_evolution(mult, lam, t):
    """Matrix of exp(i A t) on a Jordan chain basis (columns u_0..u_{m-1})."""
    D = np.zeros((mult, mult), dtype=complex)
    for j in range(mult):
        for l in range(j + 1):
            D[j - l, j] = (1j * t) ** l / factorial(l)
    return np.exp(1j * lam * t) * D


class SpectralExpansion:
    """f expanded over the root functions of ``pairs``."""

    def __init__(self, pairs, f):
        self.pairs = list(pairs)
        self.coeffs = [block_coeffs(p, f) for p in self.pairs]
        self.f = f
        self.residual = l2_norm(self.at(0.0) - f)

    def at(self, t):
        out = np.zeros_like(self.f.values)
        for p, c in zip(self.pairs, self.coeffs):
            cc = _block_evolution(p.multiplicity, p.lam, t) @ c
            for u, a in zip(_blocks(p), cc):
                out = out + a * u.values
        return GridFunction(out, self.f.grid)


def evolve(spec, spectrum, pairs, f, t):
    """exp(i A t) f by the spectral expansion over ``pairs``."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    exp = SpectralExpansion(pairs, f)
    if exp.residual > RECON_LIMIT * l2_norm(f):
        raise TruncationError(
            f"expansion misses {exp.residual:.3g} of ||f|| = {l2_norm(f):.3g} at t = 0"
        )
    return exp.at(t)


def _frame(pairs):
    cols, lams, mults = [], [], []
    for p in pairs:
        for u in _blocks(p):
            cols.append(u.values)
        lams.append(p.lam)
        mults.append(p.multiplicity)
    return np.array(cols).T, lams, mults


def _evolution_matrix(lams, mults, t):
    size = sum(mults)
    D = np.zeros((size, size), dtype=complex)
    pos = 0
    for lam, m in zip(lams, mults):
        D[pos: pos + m, pos: pos + m] = _block_evolution(m, lam, t)
        pos += m
    return D


def _fit_rate(times, norms, tail=0.5):
    times = np.asarray(times, dtype=float)
    norms = np.asarray(norms, dtype=float)
    sel = times >= times[0] + (1 - tail) * (times[-1] - times[0])
    sel &= norms > 1e-300
    if sel.sum() < 2:
        return float("nan")
    slope, _ = np.polyfit(times[sel], np.log(norms[sel]), 1)
    return float(slope)


def norm_decay(spec, spectrum, pairs, times, census_tol=None):
    """Operator norms of exp(i A t), corrected by the real-eigenvalue projection when present."""
    times = np.asarray(times, dtype=float)
    if np.any(np.diff(times) < 0) or np.any(times < 0):
        raise ValueError("times must be nonnegative and increasing")
    census = real_eigen_census(spectrum, census_tol)
    regime = "converges-to-projection" if census.count == 1 else "decay-to-zero"
    U, lams, mults = _frame(pairs)
    sw = np.sqrt(spec.grid.weights)
    Q, R = np.linalg.qr(U * sw[:, None])
    Rinv = np.linalg.inv(R)
    proj = None
    if census.count == 1:
        lam0 = census.witnesses[0]
        idx = int(np.argmin([abs(l - lam0) for l in lams]))
        real_pair = pairs[idx]
        q = real_pair.phi.values * sw
        q = q / np.linalg.norm(q)
        r = Q.conj().T @ q
        proj = (lams[idx], np.outer(r, r.conj()))
    raw, corrected = [], []
    for t in times:
        M = R @ _evolution_matrix(lams, mults, t) @ Rinv
        raw.append(np.linalg.norm(M, 2))
        if proj is not None:
            lam0, P = proj
            corrected.append(np.linalg.norm(M - np.exp(1j * lam0 * t) * P, 2))
    raw = np.array(raw)
    if np.any(np.diff(raw) > CONTRACTION_SLACK):
        raise NumericsAlarm("operator norm increased along the trace")
    norms = np.array(corrected) if proj is not None else raw
    gap = spectral_gap(spectrum, census_tol)
    return SemigroupTrace(times, norms, regime, gap, _fit_rate(times, norms), raw if proj is not None else None)
