"""Exception types shared across the package."""


class ThinSetsError(Exception):
    """Base class for all package errors."""


class InvalidInput(ThinSetsError, ValueError):
    """A precondition of an operation does not hold."""


class ResourceExceeded(ThinSetsError):
    """A search would exceed its configured memory or node budget.

    The answer of the interrupted computation is *unknown*; callers must not
    read it as a negative.
    """


class VerificationFailed(ThinSetsError):
    """A post-condition check failed beyond tolerance.

    ``result`` carries the partially verified object so callers can inspect
    which check failed.
    """

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class BlockOverflow(ThinSetsError, OverflowError):
    """An integer value exceeds the signed 64-bit range."""
