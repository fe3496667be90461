"""Exception hierarchy shared across the package."""


class GFSCError(Exception):
    """Base class for all package errors."""


class DatasetError(GFSCError):
    """Raised when a dataset or manifest fails validation."""


class DimensionError(GFSCError, ValueError):
    """Raised when array shapes disagree."""


class NumericsError(GFSCError, ArithmeticError):
    """Raised on non-finite input or a failed factorization/eigensolve."""


class MetricError(GFSCError, ValueError):
    """Raised when label vectors cannot be compared."""


class InputError(GFSCError, ValueError):
    """Raised on invalid arguments (e.g. more clusters than points)."""
