"""Bundled GDY environments."""

from __future__ import annotations

from importlib import resources

from gridforge.model import GdyDocument
from gridforge.parser import parse_gdy

BUNDLED = ("sokoban", "escape_room")


def asset_text(name: str) -> str:
    """Raw GDY source of a bundled environment."""
    if name not in BUNDLED:
        raise KeyError(f"no bundled environment named {name!r}")
    return resources.files(__package__).joinpath(f"{name}.gdy").read_text("utf-8")


def load(name: str) -> GdyDocument:
    """Parse a bundled environment by name."""
    return parse_gdy(asset_text(name))
