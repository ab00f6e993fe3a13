"""Exception hierarchy shared by every webnav module.

The CLI maps these onto exit codes: ``UsageError`` -> 1, ``DataError`` (and
subclasses) -> 2, anything else -> 3.
"""


class WebNavError(Exception):
    """Base class for all errors raised by this package."""


class UsageError(WebNavError):
    """Bad command-line arguments or invalid API usage."""


class DataError(WebNavError):
    """Malformed or inconsistent input data (corpora, graphs, datasets)."""


class ParseError(DataError):
    """Markup that cannot be parsed; carries the byte offset of the defect."""

    def __init__(self, message: str, byte_offset: int):
        super().__init__(f"{message} (byte offset {byte_offset})")
        self.byte_offset = byte_offset


class GenerationError(WebNavError):
    """Dataset generation could not reach the requested example counts."""


class TrainingDiverged(WebNavError):
    """Training cost became non-finite."""


# --- navigation environment ---------------------------------------------

class EnvironmentError_(WebNavError):
    """Base class for episode-level errors; ``code`` is the wire-format name."""

    code = "EnvironmentError"


class BudgetExceeded(EnvironmentError_):
    """All peek slots at the current node are used up."""

    code = "BudgetExceeded"


class MoveUnexplored(EnvironmentError_):
    """Tried to follow an edge that was never peeked at."""

    code = "MoveUnexplored"


class EpisodeOver(EnvironmentError_):
    """Action submitted to a finished episode."""

    code = "EpisodeOver"


class SessionExpired(WebNavError):
    code = "SessionExpired"
