"""Exception types raised across the package."""


class InvalidParameterError(ValueError):
    """A parameter violates the precondition of the operation it was passed to."""


class NoPeakError(RuntimeError):
    """No filter-function peak could be found in the requested window."""
