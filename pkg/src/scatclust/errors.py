"""Exception types shared across the package."""


class ScatclustError(Exception):
    """Base class for all package errors."""


class FormatError(ScatclustError, ValueError):
    """A file does not match its documented on-disk layout."""


class ConsistencyError(ScatclustError, ValueError):
    """Two inputs that must agree (e.g. image/label counts) do not."""


class DimensionError(ScatclustError, ValueError):
    """An array shape is incompatible with the operation."""


class ParameterError(ScatclustError, ValueError):
    """A numeric parameter violates an operation's precondition."""


class InsufficientDataError(ScatclustError, ValueError):
    """Too few samples for the requested statistic."""


class DegeneracyError(ScatclustError, ValueError):
    """Numerically degenerate input (rank deficiency, zero spectrum)."""


class ConnectivityError(ScatclustError, ValueError):
    """The affinity graph has a zero-degree sample or representative."""
