"""Exception hierarchy shared across the analyzer."""

from __future__ import annotations


class GameProbError(Exception):
    """Base class for all analyzer errors."""


class SourceError(GameProbError):
    """An error anchored to a source position."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{line}:{column}: {message}")
        self.line = line
        self.column = column


class ParseError(SourceError):
    pass


class TypecheckError(SourceError):
    pass


class UnsupportedConstraintError(GameProbError):
    """Raised when a guard falls outside linear integer arithmetic."""


class ResourceLimitError(GameProbError):
    """A configured exploration or counting cap was exceeded."""


class SimulationError(GameProbError):
    """Bad environment script handed to the concrete interpreter."""


class InternalInvariantError(GameProbError):
    """An internal consistency check failed; indicates an analyzer bug."""
