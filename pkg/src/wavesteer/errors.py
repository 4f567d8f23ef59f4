"""Exception types shared across the package."""


class WavesteerError(Exception):
    """Base class for all package errors."""


class InvalidArgumentError(WavesteerError, ValueError):
    """An argument violates a documented precondition."""


class GridMismatchError(InvalidArgumentError):
    """Sampled data does not live on the expected time grid."""


class NotInH10Error(InvalidArgumentError):
    """A position target does not vanish at the spatial endpoints."""


class AliasingError(InvalidArgumentError):
    """Quadrature resolution too coarse for the requested mode cutoff."""


class InstabilityError(WavesteerError, RuntimeError):
    """A time-stepping solution exceeded the overflow guard."""


class IllConditionedError(WavesteerError, RuntimeError):
    """The Gram matrix is numerically singular."""

    def __init__(self, message, min_eigenvalue=None):
        super().__init__(message)
        self.min_eigenvalue = min_eigenvalue


class InternalConsistencyError(WavesteerError, RuntimeError):
    """A cross-check between two internal computations failed."""


class MeanZeroViolationError(WavesteerError, RuntimeError):
    """A density that must integrate to zero over [0, T] does not."""


class ConfigError(WavesteerError, ValueError):
    """A run configuration is missing keys or holds invalid values."""
