"""Exception types shared across the package."""


class InvalidCovarianceError(ValueError):
    """Raised when a matrix cannot serve as a covariance (not symmetric PSD,
    or factorization fails even after the jitter ladder)."""


class UnsupportedShapeError(ValueError):
    """Raised when an operation does not support the given tensor shape."""


class ResourceLimitError(RuntimeError):
    """Raised when a request exceeds the desk-scale guards
    (tensor entries > 1e8, or pairing order p > 12)."""
