"""Exception types raised across the package."""


class RFFError(Exception):
    """Base class for all package errors."""


class ValidationError(RFFError, ValueError):
    """A parameter failed validation."""


class DimensionMismatch(ValidationError):
    pass


class UnboundedSupport(RFFError):
    """The result needs a spectral measure with bounded support."""


class UnsupportedOrder(ValidationError):
    pass


class UnsupportedDimension(ValidationError):
    pass


class GridBudgetExceeded(RFFError):
    """The requested certificate needs more grid points than allowed."""


class InvalidDiameter(ValidationError):
    pass


class InvalidR(ValidationError):
    pass


class InvalidA(ValidationError):
    pass


class DegenerateInput(ValidationError):
    pass
