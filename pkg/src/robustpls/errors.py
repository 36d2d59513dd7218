"""Exception types shared across the package."""


class RplsError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInputError(RplsError, ValueError):
    """Input data is malformed (non-finite entries, wrong rank, empty)."""


class ConfigError(RplsError, ValueError):
    """A configuration value or combination of values is invalid."""


class DimensionError(ConfigError):
    """Matrix dimensions are incompatible with each other or the config."""


class SolverError(RplsError, RuntimeError):
    """A numerical routine failed to converge."""


class ParseError(RplsError, ValueError):
    """A data file could not be parsed; message carries line/column context."""


class MetricError(RplsError, ValueError):
    """A metric is undefined for the given inputs (e.g. zero reference)."""


class DegenerateEllipseError(RplsError, ValueError):
    """Score covariance is singular; no confidence ellipse exists."""
