"""Grid-world environment engine driven by GDY game descriptions.

The package is organised around a small pipeline:

- :mod:`gridforge.parser` turns GDY (YAML) text into a validated
  :class:`~gridforge.model.GdyDocument` and level strings into layouts.
- :mod:`gridforge.engine` executes the rule-based transition dynamics.
- :mod:`gridforge.observers` renders simulation state into observations.
- :mod:`gridforge.trajectory` records and replays deterministic episodes.
- :mod:`gridforge.levelgen` procedurally generates escape-room levels.
- :mod:`gridforge.env` is the episodic facade for programmatic consumers.
- :mod:`gridforge.cli` / :mod:`gridforge.server` expose everything to
  terminals and to the web IDE.
"""

from gridforge.model import GdyDocument, validate
from gridforge.parser import parse_gdy, parse_level, serialize_gdy, serialize_level

__all__ = [
    "GdyDocument",
    "parse_gdy",
    "parse_level",
    "serialize_gdy",
    "serialize_level",
    "validate",
]

__version__ = "0.1.0"
