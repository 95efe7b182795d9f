"""Exception hierarchy shared by all modules."""


class TeleportHVError(ValueError):
    """Base class for every error raised by this package."""


class InvalidDirectionError(TeleportHVError):
    pass


class UnsupportedDimensionError(TeleportHVError):
    pass


class NotHermitianError(TeleportHVError):
    pass


class ZeroProbabilityError(TeleportHVError):
    """Raised when a projection or conditioning has (numerically) zero weight."""


class ProductFormError(TeleportHVError):
    pass


class IntegrationError(TeleportHVError):
    """Raised when an integrand returns a non-finite value.

    Attributes:
        point: the hidden-variable point (or tuple of points) where it happened.
    """

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


class SymmetryViolationError(TeleportHVError):
    pass


class CandidateParseError(TeleportHVError):
    """Raised for malformed candidate-model files and expressions."""

    def __init__(self, message, line=None, column=None):
        where = ""
        if line is not None:
            where = f" (line {line}" + (f", column {column})" if column is not None else ")")
        super().__init__(message + where)
        self.line = line
        self.column = column
