"""Exception hierarchy shared across the package.

Every error raised by lsteeg derives from :class:`LsteegError` so callers can
catch the whole family, while the concrete classes stay distinguishable for
machine-readable reporting (the CLI emits the class name on failure).
"""


class LsteegError(Exception):
    """Base class for all lsteeg errors."""


class DimensionError(LsteegError, ValueError):
    """Array shape does not match the declared contract."""


class ConfigError(LsteegError, ValueError):
    """Invalid configuration value (sizes, rates, probabilities, ...)."""


class NumericError(LsteegError, ArithmeticError):
    """Non-finite values or numerically unstable state encountered."""


class UsageError(LsteegError, RuntimeError):
    """API misuse, e.g. a backward pass with a stale or foreign cache."""


class UndefinedMetricError(LsteegError, ValueError):
    """Metric is undefined for the given inputs (e.g. single-class AUC)."""


class FileFormatError(LsteegError, ValueError):
    """File is malformed or truncated."""


class VersionMismatchError(FileFormatError):
    """File was written by an incompatible format version."""


class ChecksumError(FileFormatError):
    """Stored checksum does not match the file contents."""
