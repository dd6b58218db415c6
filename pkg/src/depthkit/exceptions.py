"""Exception hierarchy shared across depthkit."""


class DepthError(ValueError):
    """Base class for invalid input or parameters."""


class DimensionError(DepthError):
    """Raised when array dimensions do not agree."""


class DegenerateError(DepthError):
    """Raised when a numeric quantity is degenerate (singular, vanishing, empty)."""


class DegenerateCovarianceError(DegenerateError):
    """Raised when a covariance or shape matrix is not positive definite."""
