"""Spectral analysis of i f' + V f + f(2 pi) k with f(0) = rho f(2 pi)."""

__version__ = "0.1.0"

from .charfn import Controls, ProblemSpec, ReducedProblem, phi_derivative, phi_eval, reduce
from .dissipative import check_dissipative, construct_real_eigen, real_eigen_census
from .eigensystem import eigenfunction, eigenpair, eigenpairs, hs_norm, quadratic_closeness
from .errors import SpectralError
from .funcspace import Grid, GridFunction
from .localization import Spectrum, assemble_spectrum, spectrum_of
from .problem import load_problem
from .rootfinder import Rectangle, count_zeros, isolate_zeros, refine_zero
from .semigroup import evolve, norm_decay

__all__ = [
    "Controls", "ProblemSpec", "ReducedProblem", "phi_derivative", "phi_eval", "reduce",
    "check_dissipative", "construct_real_eigen", "real_eigen_census",
    "eigenfunction", "eigenpair", "eigenpairs", "hs_norm", "quadratic_closeness",
    "SpectralError", "Grid", "GridFunction", "Spectrum", "assemble_spectrum", "spectrum_of",
    "load_problem", "Rectangle", "count_zeros", "isolate_zeros", "refine_zero",
    "evolve", "norm_decay",
]
