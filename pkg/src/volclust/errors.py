"""Exception hierarchy.

The CLI maps these onto exit codes: ``ConfigError`` -> 1, ``DataError`` -> 2,
``NumericalError`` -> 3.
"""


class VolclustError(Exception):
    """Base class for all package errors."""


class ConfigError(VolclustError, ValueError):
    """Inconsistent or invalid configuration / arguments."""


class DataError(VolclustError, ValueError):
    """Malformed or unusable input data."""

    def __init__(self, message, *, source=None, line=None):
        self.source = source
        self.line = line
        where = []
        if source is not None:
            where.append(str(source))
        if line is not None:
            where.append(f"line {line}")
        if where:
            message = f"{':'.join(where)}: {message}"
        super().__init__(message)


class NumericalError(VolclustError, ArithmeticError):
    """A numerical procedure could not produce a valid result."""


class DegenerateClusteringError(NumericalError):
    """A validity index is undefined for the given clustering."""
