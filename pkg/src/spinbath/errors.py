"""Exception types raised by spinbath."""


class SpinBathError(Exception):
    """Base class for all package errors."""


class DomainError(SpinBathError, ValueError):
    """An argument lies outside the domain where a quantity is defined."""


class ResourceLimitError(SpinBathError):
    """A requested table or matrix exceeds the configured size cap."""


class ConvergenceError(SpinBathError):
    """An iterative procedure did not reach its tolerance."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class StepSizeError(SpinBathError):
    """Fixed-step integration disagreed with its step-halved rerun."""


class UndefinedTemperatureError(SpinBathError):
    """Apparent temperature requested for a dark state."""
