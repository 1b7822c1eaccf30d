"""Independent reference computations (mpmath quadrature, closed forms)."""

import mpmath as mp
import numpy as np

from nlpspec.funcspace import Grid, GridFunction, psi

KT = (1 - 1j) / 2

# zeros of Phi for K~ = (1-i)/2 (t - pi) with Re >= 0, by mpmath findroot at 30 digits;
# the spectrum is symmetric under lam -> -lam
KTILDE_ZEROS = [
    0j,
    1.6168441818855 - 0.194945803135934j,
    1.61869340721316 - 1.22360382731928j,
    2.79553048487918 - 0.167789234784697j,
    3.86047251255108 - 0.126814911829527j,
    4.89288664286343 - 0.101145277444542j,
    5.91264817703354 - 0.0840522768552492j,
]
KTILDE_PHI_PRIME_0 = -10.3354255600999400584921050224 + 4.05224025292035358156681825581j


def phi_mp(K, lam, dps=20):
    """Phi(lam) = 1 - e^{2 pi i lam} + i int e^{i lam t} K(t) dt by mpmath quadrature."""
    with mp.workdps(dps):
        lam = mp.mpc(lam)
        val = 1 - mp.exp(2j * mp.pi * lam) + 1j * mp.quad(
            lambda t: mp.exp(1j * lam * t) * K(t), [0, mp.pi / 2, mp.pi, 3 * mp.pi / 2, 2 * mp.pi]
        )
        return complex(val)


def phi_constant(c, lam):
    """Factorization (1 - e^{2 pi i lam})(1 - c / lam) for K = c."""
    lam = np.asarray(lam, dtype=complex)
    return (1 - np.exp(2j * np.pi * lam)) * (1 - c / lam)


def band_limited(rng, grid, modes, scale=1.0):
    c = (rng.normal(size=2 * modes + 1) + 1j * rng.normal(size=2 * modes + 1)) * scale
    vals = sum(ci * psi(m, grid).values for ci, m in zip(c, range(-modes, modes + 1)))
    return GridFunction(vals, grid), dict(zip(range(-modes, modes + 1), c))


def double_zero_K(lam_star=0.4 + 0.3j, grid=None):
    """K = alpha + beta cos t with Phi(lam*) = Phi'(lam*) = 0.

    Phi is affine in K, so the two conditions are a 2x2 linear system
    whose entries are moments computed here by mpmath.
    """
    grid = grid or Grid(1024)
    with mp.workdps(30):
        l = mp.mpc(lam_star)
        E = mp.exp(2j * mp.pi * l)
        basis = [lambda t: 1, lambda t: mp.cos(t)]
        A = mp.matrix(2, 2)
        for j, b in enumerate(basis):
            A[0, j] = 1j * mp.quad(lambda t: mp.exp(1j * l * t) * b(t), [0, mp.pi, 2 * mp.pi])
            A[1, j] = 1j * mp.quad(lambda t: 1j * t * mp.exp(1j * l * t) * b(t), [0, mp.pi, 2 * mp.pi])
        rhs = mp.matrix([-(1 - E), 2j * mp.pi * E])
        alpha, beta = [complex(v) for v in mp.lu_solve(A, rhs)]
    K = GridFunction.from_callable(lambda t: alpha + beta * np.cos(t), grid)
    return K, alpha, beta
