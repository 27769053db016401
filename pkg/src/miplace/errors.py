"""Exception types shared across the package."""


class PlacementError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInputError(PlacementError, ValueError):
    """An argument violates an operation's preconditions."""


class SingularMatrixError(PlacementError):
    """Cholesky factorization failed even after diagonal jitter.

    ``pivot`` is the 0-based index of the first non-positive-definite
    leading minor reported by LAPACK.
    """

    def __init__(self, message, pivot=None):
        super().__init__(message)
        self.pivot = pivot


class FittingError(PlacementError):
    """Hyperparameter fitting could not score a single probe point."""


class DataError(PlacementError):
    """Base class for dataset ingestion failures."""


class DatasetParseError(DataError):
    """A dataset row could not be parsed; ``line`` is 1-based."""

    def __init__(self, message, line=None):
        super().__init__(message)
        self.line = line


class InsufficientDataError(DataError):
    """Too few samples to satisfy the requested operation."""


class DegenerateDataError(DataError):
    """Dataset field values have zero variance."""
