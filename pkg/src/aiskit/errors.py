"""Exception hierarchy shared by every aiskit module."""


class AISError(Exception):
    """Base class for all aiskit errors."""


class DimensionError(AISError, ValueError):
    """Operands have incompatible lengths or shapes."""


class NoOverlapError(AISError):
    """Two vote profiles share no rated items."""


class InvalidObservationError(AISError, ValueError):
    """An observed packet contains wildcards or is otherwise not concrete."""


class UnsupportedMutationError(AISError, TypeError):
    """Hypermutation is not defined for the given encoding."""


class EmptyPoolError(AISError):
    """The candidate stream supplied no antibodies."""


class EmptySelfError(AISError, ValueError):
    """A self set would be empty."""


class NotFoundError(AISError, KeyError):
    """A requested user or item does not exist."""


class NoDataError(AISError):
    """No neighbour supplied a vote for the requested item."""


class EvaluationError(AISError, ValueError):
    """A log cannot be evaluated (e.g. records lack labels)."""


class DataFormatError(AISError, ValueError):
    """An input file is malformed; carries the offending line number."""

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where += f"{path}"
        if line is not None:
            where += f":{line}"
        super().__init__(f"{where}: {message}" if where else message)


class ConfigError(AISError, ValueError):
    """A configuration value is missing or violates its invariants."""


class BudgetExhaustedWarning(UserWarning):
    """Detector generation stopped before reaching the requested count."""
