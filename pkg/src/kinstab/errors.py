"""Exception types shared across the package."""


class KinstabError(Exception):
    """Base class for all package errors."""


class ParameterError(KinstabError, ValueError):
    """A physical or numerical parameter is outside its admissible range."""


class DimensionError(KinstabError, ValueError):
    """Array lengths do not match the grid or each other."""


class NumericError(KinstabError, ArithmeticError):
    """Non-finite values appeared during a computation.

    ``step`` carries the (1-based) time step index when the failure happened
    inside a time loop.
    """

    def __init__(self, message, step=None):
        if step is not None:
            message = f"step {step}: {message}"
        super().__init__(message)
        self.step = step


class ConvergenceError(NumericError):
    """An inner nonlinear iteration failed to converge."""

    def __init__(self, message, residual, step=None):
        super().__init__(f"{message} (last residual {residual:.3e})", step=step)
        self.residual = residual


class ConfigError(KinstabError, ValueError):
    """Malformed experiment configuration."""
