"""Exception hierarchy shared by every tlmest module."""


class TlmestError(Exception):
    """Base class for all tlmest errors."""


class InvalidInputError(TlmestError, ValueError):
    """Non-finite values, negative thresholds, malformed responses or grids."""


class ShapeMismatchError(InvalidInputError):
    """Parameters or covariates of incompatible shapes were combined."""


class CapacityError(TlmestError):
    """A dense object would exceed the configured size cap."""


class UnsupportedModelError(TlmestError):
    """The (loss family, regularizer, shape) combination has no solver."""


class NumericError(TlmestError, ArithmeticError):
    """SVD failure, non positive-definite system or singular covariance."""


class ConfigError(TlmestError):
    """Invalid or unknown configuration key."""


class TuningError(TlmestError):
    """A fit inside cross validation or grid search failed."""


class StorageError(TlmestError, OSError):
    """A dataset file is malformed."""


__all__ = [
    "TlmestError",
    "InvalidInputError",
    "ShapeMismatchError",
    "CapacityError",
    "UnsupportedModelError",
    "NumericError",
    "ConfigError",
    "TuningError",
    "StorageError",
]
