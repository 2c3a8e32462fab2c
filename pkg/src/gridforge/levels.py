"""Level references: the one-of-three way episodes name their starting level."""

from __future__ import annotations

from dataclasses import dataclass

from gridforge.errors import LevelUnavailableError, NoLevelsError
from gridforge.levelgen import GenParams, generate
from gridforge.model import GdyDocument
from gridforge.parser import LevelLayout, parse_level


@dataclass(frozen=True)
class LevelRef:
    """Exactly one of: a document level index, a literal level string, or
    generator params."""

    index: int | None = None
    string: str | None = None
    generator: GenParams | None = None

    def __post_init__(self):
        populated = sum(x is not None for x in (self.index, self.string, self.generator))
        if populated != 1:
            raise ValueError("a level ref needs exactly one of index, string, generator")


def resolve_level(document: GdyDocument, ref: LevelRef) -> tuple[LevelLayout, str]:
    """Materialize a ref into (layout, level string)."""
    if ref.index is not None:
        levels = document.environment.levels
        if not levels:
            raise NoLevelsError("document has no levels")
        if not 0 <= ref.index < len(levels):
            raise LevelUnavailableError(f"level index {ref.index} outside [0, {len(levels)})")
        text = levels[ref.index]
    elif ref.string is not None:
        text = ref.string
    else:
        text = generate(ref.generator)
    return parse_level(document, text), text
