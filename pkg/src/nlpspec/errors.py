"""Exception hierarchy shared across the package."""


class SpectralError(Exception):
    """Base class for all package errors."""


class DimensionError(SpectralError, ValueError):
    """Two functions live on different grids."""


class ParameterError(SpectralError, ValueError):
    """An argument is outside its supported range."""


class UnsupportedReductionError(SpectralError):
    """The similarity reduction needs rho != 0; use char_residual instead."""


class ContourError(SpectralError):
    """A contour passes too close to a zero even after dilation."""


class PrecisionError(SpectralError):
    """The argument-principle integral did not land near an integer."""

    def __init__(self, message, value=None, tracked=None):
        super().__init__(message)
        self.value = value
        self.tracked = tracked


class IsolationError(SpectralError):
    """Recursive subdivision hit its depth limit."""


class RefinementError(SpectralError):
    """Newton polishing did not converge; carries the best iterate."""

    def __init__(self, message, best=None, residual=None):
        super().__init__(message)
        self.best = best
        self.residual = residual


class SingularityError(SpectralError, ZeroDivisionError):
    """A Hilbert-matrix row hit a vanishing denominator."""


class ThresholdNotFoundError(SpectralError):
    """No tail threshold passes its certificate up to n_max."""


class AssemblyError(SpectralError):
    """The rectangle census disagrees with 2N+1."""


class StateError(SpectralError):
    """An operation was applied to an object in the wrong state."""


class NotAnEigenvalueError(SpectralError):
    """lambda does not satisfy the eigenvalue equation within tolerance."""


class NearSingularError(SpectralError):
    """lambda is too close to the spectrum for a resolvent evaluation."""

    def __init__(self, message, distance=None):
        super().__init__(message)
        self.distance = distance


class DegenerateNormalizationError(SpectralError):
    """<phi_adj, phi> vanishes, so the biorthogonal expansion is undefined."""


class CoverageError(SpectralError):
    """The spectrum does not cover the requested index range."""


class TruncationError(SpectralError):
    """The finite expansion does not reproduce its input well enough."""


class HypothesisViolationError(SpectralError):
    """Im V is negative somewhere, so the dissipative theory does not apply."""


class TheoremViolationError(SpectralError):
    """A computed result contradicts a proven structural property."""


class NumericsAlarm(SpectralError):
    """A monotonicity or contraction check failed."""
