"""Exception hierarchy shared by all tdcae modules."""


class TdcaeError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(TdcaeError):
    """Invalid configuration value or unusable argument combination."""


class DimensionError(TdcaeError):
    """Array shapes do not line up with what an operation requires."""


class IngestionError(TdcaeError):
    """Malformed input file (bad CSV cell, missing column, ragged row)."""


class NumericError(TdcaeError):
    """A non-finite value appeared where finite arithmetic is required."""
