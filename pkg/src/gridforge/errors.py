"""Exception hierarchy for the gridforge engine."""

from __future__ import annotations


class GridforgeError(Exception):
    """Base class for all gridforge domain errors."""


class GdySyntaxError(GridforgeError):
    """Malformed GDY source text (bad YAML, bad encoding, anchors/aliases)."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)


class SchemaError(GridforgeError):
    """Structurally valid input that violates the document or record schema."""

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        summary = "; ".join(f"{d.code} at {d.path}: {d.message}" for d in self.diagnostics)
        super().__init__(summary or "schema error")


class UnknownCharacterError(GridforgeError):
    """Level string character with no MapCharacter mapping."""

    def __init__(self, char: str, x: int, y: int):
        self.char = char
        self.x = x
        self.y = y
        super().__init__(f"unknown level character {char!r} at ({x}, {y})")


class EmptyLevelError(GridforgeError):
    """Level string with zero rows."""


class MissingAvatarError(GridforgeError):
    """Layout contains no avatar placement."""


class MultipleAvatarsError(GridforgeError):
    """Layout contains more than one avatar placement."""


class EpisodeOverError(GridforgeError):
    """step() called on a finished episode."""


class BadActionError(GridforgeError):
    """Action id outside the flattened action space."""


class HashMismatchError(GridforgeError):
    """Trajectory is bound to a different GDY document."""


class LevelUnavailableError(GridforgeError):
    """Level index out of range for the document."""


class NoLevelsError(GridforgeError):
    """Document has no levels and reset did not request a generator."""


class UnsatisfiableError(GridforgeError):
    """Level generator could not place the mandatory objects."""
