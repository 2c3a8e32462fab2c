"""Recording, serialization, verification, and replay of action trajectories.

A record binds the document content hash, the level reference, the reset
seed, and the ordered action ids; that is enough to re-run the episode
bit-exactly.  The JSON schema is normative:

``{"version": 1, "gdy_hash": "<16 hex>",
   "level": {"index": N} | {"string": "..."} | {"generator": {"seed": S, "width": W, "height": H}},
   "seed": S, "actions": [...], "final_hash": "<16 hex>", "total_reward": R}``

Saved bytes are deterministic (sorted keys); unknown fields are rejected on
load.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass

from gridforge import engine
from gridforge.errors import HashMismatchError, SchemaError
from gridforge.levelgen import GenParams
from gridforge.levels import LevelRef, resolve_level
from gridforge.model import Diagnostic, GdyDocument

VERSION = 1


@dataclass(frozen=True)
class TrajectoryRecord:
    gdy_hash: str
    level: LevelRef
    seed: int
    actions: tuple[int, ...]
    final_hash: str | None = None
    total_reward: int | None = None
    version: int = VERSION


@dataclass(frozen=True)
class ReplayReport:
    total_reward: int
    status: str
    final_hash: str
    verified: bool


class Recorder:
    """Live recording session: reset once, feed actions, finish into a record.

    Owns its :class:`~gridforge.engine.GameState` exclusively, like any
    episode.
    """

    def __init__(self, document: GdyDocument, level: LevelRef, seed: int, game=None):
        if level.generator is not None and _generator_data(level.generator) is None:
            raise ValueError(
                "trajectories store only (seed, width, height) generator refs; "
                "record by level string when using custom generator knobs"
            )
        self.document = document
        self.level = level
        self.seed = seed
        layout, _ = resolve_level(document, level)
        self.state = engine.reset(game or document, layout, seed)
        self.actions: list[int] = []
        self.total_reward = 0

    def step(self, action_id: int) -> engine.StepResult:
        result = engine.step(self.state, action_id)
        self.actions.append(int(action_id))
        self.total_reward += result.reward
        return result

    def finish(self) -> TrajectoryRecord:
        return TrajectoryRecord(
            gdy_hash=self.document.source_hash_hex,
            level=self.level,
            seed=self.seed,
            actions=tuple(self.actions),
            final_hash=engine.state_hash_hex(self.state),
            total_reward=self.total_reward,
        )


def record(document: GdyDocument, level: LevelRef, seed: int, actions) -> TrajectoryRecord:
    """Run the actions through a live session and capture the record."""
    recorder = Recorder(document, level, seed)
    for action in actions:
        recorder.step(action)
    return recorder.finish()


def _generator_data(params: GenParams) -> dict | None:
    """Generator refs serialize only when every other knob is the default."""
    defaults = GenParams(width=params.width, height=params.height, seed=params.seed)
    if params != defaults:
        return None
    return {"seed": params.seed, "width": params.width, "height": params.height}


def save(record: TrajectoryRecord) -> str:
    if record.level.index is not None:
        level_data: dict = {"index": record.level.index}
    elif record.level.string is not None:
        level_data = {"string": record.level.string}
    else:
        data = _generator_data(record.level.generator)
        if data is None:
            raise ValueError("generator ref with custom knobs is not serializable")
        level_data = {"generator": data}
    payload: dict = {
        "version": record.version,
        "gdy_hash": record.gdy_hash,
        "level": level_data,
        "seed": record.seed,
        "actions": list(record.actions),
    }
    if record.final_hash is not None:
        payload["final_hash"] = record.final_hash
    if record.total_reward is not None:
        payload["total_reward"] = record.total_reward
    return json.dumps(payload, sort_keys=True)


def _schema_error(code: str, path: str, message: str) -> SchemaError:
    return SchemaError([Diagnostic("error", code, path, message)])


def _require(condition: bool, code: str, path: str, message: str) -> None:
    if not condition:
        raise _schema_error(code, path, message)


def _is_int(value) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def load(text: str) -> TrajectoryRecord:
    """Strict inverse of :func:`save`."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise _schema_error("BAD_JSON", "$", str(exc)) from exc
    _require(isinstance(data, dict), "BAD_TYPE", "$", "trajectory must be a JSON object")

    allowed = {"version", "gdy_hash", "level", "seed", "actions", "final_hash", "total_reward"}
    for key in data:
        _require(key in allowed, "UNKNOWN_FIELD", key, f"unknown field {key!r}")
    for key in ("version", "gdy_hash", "level", "seed", "actions"):
        _require(key in data, "MISSING_FIELD", key, f"missing field {key!r}")

    _require(data["version"] == VERSION, "UNSUPPORTED_VERSION", "version",
             f"unsupported version {data['version']!r}")
    _require(isinstance(data["gdy_hash"], str), "BAD_TYPE", "gdy_hash", "gdy_hash must be a string")
    _require(_is_int(data["seed"]), "BAD_TYPE", "seed", "seed must be an integer")
    _require(isinstance(data["actions"], list) and all(_is_int(a) for a in data["actions"]),
             "BAD_TYPE", "actions", "actions must be a list of integers")

    level_data = data["level"]
    _require(isinstance(level_data, dict) and len(level_data) == 1, "BAD_LEVEL", "level",
             "level must hold exactly one of index, string, generator")
    ((kind, value),) = level_data.items()
    if kind == "index":
        _require(_is_int(value), "BAD_TYPE", "level.index", "index must be an integer")
        level = LevelRef(index=value)
    elif kind == "string":
        _require(isinstance(value, str), "BAD_TYPE", "level.string", "string must be a string")
        level = LevelRef(string=value)
    elif kind == "generator":
        _require(isinstance(value, dict), "BAD_TYPE", "level.generator", "generator must be an object")
        for key in value:
            _require(key in ("seed", "width", "height"), "UNKNOWN_FIELD",
                     f"level.generator.{key}", f"unknown field {key!r}")
        for key in ("seed", "width", "height"):
            _require(_is_int(value.get(key)), "BAD_TYPE", f"level.generator.{key}",
                     f"{key} must be an integer")
        level = LevelRef(generator=GenParams(width=value["width"], height=value["height"],
                                             seed=value["seed"]))
    else:
        raise _schema_error("BAD_LEVEL", "level", f"unknown level ref {kind!r}")

    final_hash = data.get("final_hash")
    if final_hash is not None:
        _require(isinstance(final_hash, str), "BAD_TYPE", "final_hash", "final_hash must be a string")
    total_reward = data.get("total_reward")
    if total_reward is not None:
        _require(_is_int(total_reward), "BAD_TYPE", "total_reward", "total_reward must be an integer")

    return TrajectoryRecord(
        gdy_hash=data["gdy_hash"],
        level=level,
        seed=data["seed"],
        actions=tuple(data["actions"]),
        final_hash=final_hash,
        total_reward=total_reward,
    )


def replay(document: GdyDocument, record: TrajectoryRecord, game=None) -> ReplayReport:
    """Re-run a record against a document and verify the stored outcome.

    ``verified`` is true when the stored final hash and total reward (where
    present) match the recomputed values.
    """
    if record.gdy_hash != document.source_hash_hex:
        raise HashMismatchError(
            f"trajectory bound to {record.gdy_hash}, document is {document.source_hash_hex}"
        )
    layout, _ = resolve_level(document, record.level)
    state = engine.reset(game or document, layout, record.seed)
    total = 0
    for action in record.actions:
        total += engine.step(state, action).reward
    final_hash = engine.state_hash_hex(state)
    verified = (record.final_hash is None or record.final_hash == final_hash) and (
        record.total_reward is None or record.total_reward == total
    )
    return ReplayReport(total_reward=total, status=state.status, final_hash=final_hash,
                        verified=verified)


def as_dict(record: TrajectoryRecord) -> dict:
    """Record as the normative JSON object (for embedding in responses)."""
    return json.loads(save(record))


def from_dict(data: dict) -> TrajectoryRecord:
    return load(json.dumps(data))
