"""Exception types shared across the package.

The CLI maps these onto exit codes: DataError -> 2, NumericalError -> 3.
"""


class LevyFitError(Exception):
    """Base class for all package errors."""


class DataError(LevyFitError):
    """Raised when input data is missing, malformed, or violates invariants."""


class NumericalError(LevyFitError):
    """Raised when a computation cannot proceed (degenerate regressors,
    unusable characteristic function, no density dominance region, ...)."""
