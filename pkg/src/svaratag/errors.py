"""Exception types shared across the toolkit."""

from __future__ import annotations


class SvaratagError(Exception):
    """Base class for all toolkit errors."""


class ContractError(SvaratagError):
    """A caller violated a documented precondition (bad shape, id, or argument)."""


class StructuralTextError(SvaratagError):
    """Input text violates accent placement rules (e.g. an accent mark with no base).

    Carries the codepoint offset of the offending position so callers can
    report the exact location.
    """

    def __init__(self, message: str, offset: int, verse_id: str | None = None):
        self.message = message
        self.offset = offset
        self.verse_id = verse_id
        where = f"verse {verse_id}, " if verse_id else ""
        super().__init__(f"{where}offset {offset}: {message}")


class RecordError(SvaratagError):
    """A corpus record is malformed.  Carries the 1-based line number."""

    def __init__(self, message: str, line: int):
        self.message = message
        self.line = line
        super().__init__(f"line {line}: {message}")


class TrainingDiverged(SvaratagError):
    """Loss became NaN or infinite during training."""
