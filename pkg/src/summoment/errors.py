"""Exception types shared across the package."""


class SumMomentError(Exception):
    """Base class for all package errors."""


class NumericError(SumMomentError):
    """A computation could not produce a valid number (CLI exit code 3)."""


class DomainError(NumericError, ValueError):
    """Argument outside the mathematical domain of a function."""


class ConvergenceError(NumericError, ArithmeticError):
    """An iterative solver hit its iteration cap."""


class NotPositiveSemidefiniteError(DomainError):
    """Matrix has an eigenvalue below the PSD clip tolerance."""

    def __init__(self, message, min_eigenvalue=None, max_eigenvalue=None):
        super().__init__(message)
        self.min_eigenvalue = min_eigenvalue
        self.max_eigenvalue = max_eigenvalue


class InfeasibleSpecError(NotPositiveSemidefiniteError):
    """Requested cross-covariance is too strong for the auto-covariances."""


class SingularMatrixError(NumericError, ArithmeticError):
    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


class DegenerateDataError(NumericError, ValueError):
    """Data carry no information for the requested fit."""


class LagGuardError(SumMomentError, ValueError):
    """Lag exceeds the k << N guard of the covariance estimators."""


class SpecValidationError(SumMomentError, ValueError):
    """Invalid configuration document; ``field`` names the offending entry."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field
