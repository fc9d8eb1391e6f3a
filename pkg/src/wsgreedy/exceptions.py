"""Exception types shared across the package.

Each class carries the process exit code the command-line front end maps it to.
"""


class WSGreedyError(Exception):
    exit_code = 1


class ConfigError(WSGreedyError, ValueError):
    """Invalid parameters or run configuration."""

    exit_code = 2


class InputParseError(WSGreedyError, ValueError):
    """Malformed matrix file."""

    exit_code = 3


class StallError(WSGreedyError):
    """No remaining element lowers the objective.

    ``partial`` optionally holds whatever the solver had built before stalling.
    """

    exit_code = 4

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class NoImprovingColumn(StallError):
    """Every unselected column lies in the span of the selected ones."""


class GroundSetExhausted(WSGreedyError):
    """The solution already contains every element of the ground set."""

    exit_code = 4


class GuardError(WSGreedyError):
    """An exhaustive enumeration would exceed its hard size limit."""

    exit_code = 5


class RankDeficientError(WSGreedyError, ValueError):
    """A full-column-rank design matrix was required."""

    exit_code = 2
