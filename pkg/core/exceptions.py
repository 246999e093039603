"""Exceptions raised across the project.

Every error carries the exit code the command line maps it to, so management
commands never need a lookup table of their own.
"""

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_BACKEND = 3


class OtsError(Exception):
    """Base class of all domain errors."""
    exit_code = EXIT_DATA


class DataError(OtsError):
    """Bad input data or a request the data cannot satisfy."""
    exit_code = EXIT_DATA


class ParseError(DataError):
    """Malformed JSON, missing keys or wrongly typed fields."""


class ValidationError(DataError):
    """A domain invariant is violated. The message names the bus or line."""


class DisconnectedError(ValidationError):
    """The graph over all lines is not connected."""


class UnknownLine(DataError):
    """A line id that does not exist in the network."""


class MissingBounds(DataError):
    """Bounds do not cover every line of the network."""


class InconsistentFixing(DataError):
    """A line status is pinned to two different values."""


class TooLarge(DataError):
    """The network has too many lines for topology enumeration."""


class InfeasibleEverywhere(DataError):
    """No line topology admits a feasible dispatch."""


class ZeroWidth(DataError):
    """An initial bound interval has zero width, so reductions are undefined."""


class NoIncumbent(DataError):
    """A metric needs a feasible solution and none exists."""


class HeuristicError(DataError):
    """Not even the fallback cost cap can be computed."""


class BackendError(OtsError):
    """The solver failed. Wraps the backend diagnostics."""
    exit_code = EXIT_BACKEND
