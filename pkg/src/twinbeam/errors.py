"""Exception and warning types shared across the package."""


class TwinBeamError(Exception):
    """Base class for all package-specific errors."""


class GridMismatchError(TwinBeamError, ValueError):
    """Two objects sampled on different frequency grids were combined."""


class NumericalFailureError(TwinBeamError, RuntimeError):
    """A numerical routine (SVD, matrix exponential) failed to converge."""


class UndefinedMomentError(TwinBeamError, ArithmeticError):
    """A normalized moment was requested for a beam with zero mean photon number."""


class UndefinedConditionalError(TwinBeamError, ArithmeticError):
    """Click probability too small to condition on (< 1e-12)."""


class ConfigError(TwinBeamError, ValueError):
    """Scenario configuration failed to parse or validate.

    The message names the offending field using dotted-path notation,
    e.g. ``filters.signal.fwhm_nm``.
    """


class DegradedAccuracyWarning(UserWarning):
    """Result is still returned but a stated accuracy target may not hold."""
