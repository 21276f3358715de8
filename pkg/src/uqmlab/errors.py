"""Exception types raised across the package."""


class UQMError(ValueError):
    """Base class for invalid inputs and undefined operations."""


class DimensionMismatchError(UQMError):
    pass


class NotHermitianError(UQMError):
    pass


class NotPositiveError(UQMError):
    pass


class BadTraceError(UQMError):
    pass


class ConvergenceError(UQMError):
    pass


class NotCompletelyPositiveError(UQMError):
    """The Choi matrix has an eigenvalue below the negative tolerance."""

    def __init__(self, min_eigenvalue, message=None):
        self.min_eigenvalue = float(min_eigenvalue)
        super().__init__(
            message or f"map is not completely positive (min Choi eigenvalue {self.min_eigenvalue:.3e})"
        )


class UnknownLabelError(UQMError, KeyError):
    pass


class ZeroProbabilityError(UQMError):
    pass


class BadPartitionError(UQMError):
    pass


class EmptyRunError(UQMError):
    pass
