"""Validated in-memory object model for GDY documents.

A :class:`GdyDocument` is immutable after construction and safe to share
read-only across concurrent engine instances.  :func:`validate` is the single
source of truth for internal consistency; the parser refuses to return a
document with a nonempty diagnostic list.
"""

from __future__ import annotations

from dataclasses import dataclass, field

EMPTY = "_empty"
EMPTY_CHAR = "."

DIRECTIONAL = "directional"
UNARY = "unary"

ORIENTATIONS = ("left", "right", "up", "down")
DEFAULT_ORIENTATION = "down"

# Directional inputs in canonical order with their unit grid deltas.
DIRECTIONAL_INPUTS = (
    ("left", (-1, 0)),
    ("right", (1, 0)),
    ("down", (0, 1)),
    ("up", (0, -1)),
)
DELTAS = {name: delta for name, delta in DIRECTIONAL_INPUTS}

COMPARISON_OPS = frozenset({"eq", "neq", "lt", "lte", "gt", "gte"})
LOGICAL_OPS = frozenset({"and", "or"})
COMMAND_KINDS = frozenset(
    {"mov", "cascade", "remove", "spawn", "add", "sub", "set", "incr", "decr", "reward", "if"}
)
COUNTER_SUFFIX = ":count"
MAX_IF_DEPTH = 8


@dataclass(frozen=True)
class TileSpec:
    """How the UI draws an object: a flat tile key plus optional 16-way autotiling."""

    key: str
    autotile: bool = False


@dataclass(frozen=True)
class ObjectDef:
    name: str
    map_character: str
    z: int = 0
    initial_variables: dict[str, int] = field(default_factory=dict)
    tile: TileSpec | None = None

    def tile_spec(self) -> TileSpec:
        return self.tile if self.tile is not None else TileSpec(self.name)


@dataclass(frozen=True)
class Condition:
    """Comparison (2 operands: int literal, variable ref, or `<object>:count`)
    or logical combinator (operands are sub-conditions)."""

    op: str
    operands: tuple


@dataclass(frozen=True)
class Command:
    """One executable step inside a behaviour.

    ``args`` is kind-specific: ``mov``/``cascade`` -> ("_dest",),
    ``spawn`` -> (object_name,), ``reward`` -> (amount,),
    ``add``/``sub``/``set`` -> (variable, operand), ``incr``/``decr`` -> (variable,),
    ``remove`` -> ().  ``if`` uses the condition/branch fields instead.
    """

    kind: str
    args: tuple = ()
    conditions: tuple[Condition, ...] = ()
    on_true: tuple["Command", ...] = ()
    on_false: tuple["Command", ...] = ()


@dataclass(frozen=True)
class Behaviour:
    src_object: str
    dst_objects: tuple[str, ...]
    preconditions: tuple[Condition, ...] = ()
    src_commands: tuple[Command, ...] = ()
    dst_commands: tuple[Command, ...] = ()


@dataclass(frozen=True)
class ActionDef:
    name: str
    behaviours: tuple[Behaviour, ...]
    input_mapping: str = DIRECTIONAL


@dataclass(frozen=True)
class ObserverConfig:
    """Egocentric window and channel switches for the Vector/Entity observers."""

    window: tuple[int, int] | None = None
    rotate_with_avatar: bool = False
    include_orientation_channels: bool = False
    include_player_variable_channels: bool = False


@dataclass(frozen=True)
class EnvironmentDef:
    name: str
    avatar_object: str
    win_conditions: tuple[Condition, ...] = ()
    lose_conditions: tuple[Condition, ...] = ()
    max_steps: int | None = None
    player_variables: dict[str, int] = field(default_factory=dict)
    observer_config: ObserverConfig = ObserverConfig()
    levels: tuple[str, ...] = ()


@dataclass(frozen=True)
class GdyDocument:
    environment: EnvironmentDef
    actions: tuple[ActionDef, ...]
    objects: tuple[ObjectDef, ...]
    # FNV-1a 64 over the canonical serialized text; derived, so excluded from
    # equality.  The parser always fills it in.
    source_hash: int = field(default=0, compare=False)

    def objects_by_name(self) -> dict[str, ObjectDef]:
        return {o.name: o for o in self.objects}

    def objects_by_char(self) -> dict[str, str]:
        return {o.map_character: o.name for o in self.objects}

    @property
    def source_hash_hex(self) -> str:
        return f"{self.source_hash:016x}"


@dataclass(frozen=True)
class Diagnostic:
    severity: str
    code: str
    path: str
    message: str


def _diag(code: str, path: str, message: str) -> Diagnostic:
    return Diagnostic("error", code, path, message)


def _check_conditions(
    conditions: tuple[Condition, ...],
    path: str,
    resolver,
    out: list[Diagnostic],
) -> None:
    for i, cond in enumerate(conditions):
        _check_condition(cond, f"{path}[{i}]", resolver, out)


def _check_condition(cond: Condition, path: str, resolver, out: list[Diagnostic]) -> None:
    if cond.op in LOGICAL_OPS:
        for i, sub in enumerate(cond.operands):
            if isinstance(sub, Condition):
                _check_condition(sub, f"{path}.{cond.op}[{i}]", resolver, out)
            else:
                out.append(_diag("BAD_CONDITION", path, f"{cond.op} takes sub-conditions"))
        return
    if cond.op not in COMPARISON_OPS:
        out.append(_diag("BAD_CONDITION", path, f"unknown condition op {cond.op!r}"))
        return
    if len(cond.operands) != 2:
        out.append(_diag("BAD_CONDITION", path, "comparisons take exactly 2 operands"))
        return
    for i, operand in enumerate(cond.operands):
        if isinstance(operand, bool) or not isinstance(operand, (int, str)):
            out.append(_diag("BAD_OPERAND", f"{path}[{i}]", "operands are integers or variable refs"))
        elif isinstance(operand, str):
            resolver(operand, f"{path}[{i}]", out)


def _check_commands(
    commands: tuple[Command, ...],
    path: str,
    objects: dict[str, ObjectDef],
    resolver,
    out: list[Diagnostic],
    depth: int = 0,
) -> None:
    for i, cmd in enumerate(commands):
        cpath = f"{path}[{i}].{cmd.kind}"
        if cmd.kind in ("mov", "cascade"):
            if cmd.args != ("_dest",):
                out.append(_diag("BAD_COMMAND", cpath, f"{cmd.kind} takes the target _dest"))
        elif cmd.kind == "spawn":
            if len(cmd.args) != 1 or cmd.args[0] not in objects:
                out.append(_diag("UNDECLARED_OBJECT", cpath, f"spawn target {cmd.args!r} not declared"))
        elif cmd.kind in ("add", "sub", "set"):
            if len(cmd.args) != 2:
                out.append(_diag("BAD_COMMAND", cpath, f"{cmd.kind} takes [variable, operand]"))
                continue
            resolver(cmd.args[0], cpath, out, write=True)
            operand = cmd.args[1]
            if isinstance(operand, str):
                resolver(operand, cpath, out)
            elif isinstance(operand, bool) or not isinstance(operand, int):
                out.append(_diag("BAD_OPERAND", cpath, "operand must be an integer or variable ref"))
        elif cmd.kind in ("incr", "decr"):
            if len(cmd.args) != 1:
                out.append(_diag("BAD_COMMAND", cpath, f"{cmd.kind} takes a variable ref"))
            else:
                resolver(cmd.args[0], cpath, out, write=True)
        elif cmd.kind == "reward":
            if len(cmd.args) != 1 or isinstance(cmd.args[0], bool) or not isinstance(cmd.args[0], int):
                out.append(_diag("BAD_COMMAND", cpath, "reward takes an integer"))
        elif cmd.kind == "if":
            if depth + 1 > MAX_IF_DEPTH:
                out.append(_diag("IF_DEPTH_EXCEEDED", cpath, f"if nesting deeper than {MAX_IF_DEPTH}"))
                continue
            _check_conditions(cmd.conditions, f"{cpath}.Conditions", resolver, out)
            _check_commands(cmd.on_true, f"{cpath}.OnTrue", objects, resolver, out, depth + 1)
            _check_commands(cmd.on_false, f"{cpath}.OnFalse", objects, resolver, out, depth + 1)
        elif cmd.kind == "remove":
            pass
        else:
            out.append(_diag("BAD_COMMAND", cpath, f"unknown command kind {cmd.kind!r}"))


def _make_resolver(document: GdyDocument, instance_object: str | None):
    """Variable-ref resolver for one execution context.

    A ref is valid if it is an `<object>:count` counter of a declared object,
    a variable declared on the context object, or a player variable.
    """

    objects = document.objects_by_name()
    player_vars = document.environment.player_variables
    instance_vars = (
        objects[instance_object].initial_variables
        if instance_object in objects
        else {}
    )

    def resolver(ref: str, path: str, out: list[Diagnostic], write: bool = False) -> None:
        if ref.endswith(COUNTER_SUFFIX):
            target = ref[: -len(COUNTER_SUFFIX)]
            if target not in objects:
                out.append(_diag("UNDECLARED_OBJECT", path, f"counter for unknown object {target!r}"))
            elif write:
                out.append(_diag("READ_ONLY_VARIABLE", path, "object counters cannot be written"))
            return
        if ref in instance_vars or ref in player_vars:
            return
        out.append(_diag("UNDECLARED_VARIABLE", path, f"variable {ref!r} is not declared"))

    return resolver


def validate(document: GdyDocument) -> list[Diagnostic]:
    """Check every internal-consistency rule; empty list means valid.

    Pure and deterministic: equal documents yield identical diagnostic lists.
    """

    out: list[Diagnostic] = []
    objects = {}
    chars = {}

    for i, obj in enumerate(document.objects):
        path = f"Objects[{i}]"
        if obj.name == EMPTY:
            out.append(_diag("RESERVED_OBJECT_NAME", f"{path}.Name", f"{EMPTY!r} is reserved"))
        if obj.name in objects:
            out.append(_diag("DUPLICATE_OBJECT_NAME", f"{path}.Name", f"object {obj.name!r} declared twice"))
        else:
            objects[obj.name] = obj
        ch = obj.map_character
        if len(ch) != 1 or not ch.isprintable() or ch == EMPTY_CHAR or ch.isspace():
            out.append(_diag("BAD_MAP_CHARACTER", f"{path}.MapCharacter", f"bad map character {ch!r}"))
        elif ch in chars:
            out.append(
                _diag(
                    "DUPLICATE_MAP_CHARACTER",
                    f"{path}.MapCharacter",
                    f"character {ch!r} already used by {chars[ch]!r}",
                )
            )
        else:
            chars[ch] = obj.name
        if obj.z < 0:
            out.append(_diag("BAD_Z", f"{path}.Z", "z must be >= 0"))
        for name, value in obj.initial_variables.items():
            if isinstance(value, bool) or not isinstance(value, int):
                out.append(_diag("BAD_VARIABLE", f"{path}.Variables.{name}", "variables are integers"))

    env = document.environment
    if env.avatar_object not in objects:
        out.append(
            _diag(
                "UNDECLARED_OBJECT",
                "Environment.Player.AvatarObject",
                f"avatar object {env.avatar_object!r} is not declared",
            )
        )
    if env.max_steps is not None and env.max_steps < 1:
        out.append(_diag("BAD_MAX_STEPS", "Environment.MaxSteps", "max steps must be >= 1"))
    cfg = env.observer_config
    if cfg.window is not None and (cfg.window[0] < 1 or cfg.window[1] < 1):
        out.append(_diag("BAD_WINDOW", "Environment.Player.Observer", "window dims must be >= 1"))
    for name, value in env.player_variables.items():
        if isinstance(value, bool) or not isinstance(value, int):
            out.append(_diag("BAD_VARIABLE", f"Environment.Variables.{name}", "variables are integers"))

    player_resolver = _make_resolver(document, None)
    _check_conditions(env.win_conditions, "Environment.Termination.Win", player_resolver, out)
    _check_conditions(env.lose_conditions, "Environment.Termination.Lose", player_resolver, out)

    for ai, action in enumerate(document.actions):
        apath = f"Actions[{ai}]"
        if action.input_mapping not in (DIRECTIONAL, UNARY):
            out.append(_diag("BAD_INPUT_MAPPING", f"{apath}.InputMapping", f"unknown mapping {action.input_mapping!r}"))
        if not action.behaviours:
            out.append(_diag("EMPTY_BEHAVIOURS", f"{apath}.Behaviours", "behaviour list is empty"))
        for bi, beh in enumerate(action.behaviours):
            bpath = f"{apath}.Behaviours[{bi}]"
            if beh.src_object == EMPTY or beh.src_object not in objects:
                out.append(
                    _diag(
                        "UNDECLARED_OBJECT",
                        f"{bpath}.Src.Object",
                        f"src object {beh.src_object!r} must be a declared object",
                    )
                )
            if not beh.dst_objects:
                out.append(_diag("BAD_BEHAVIOUR", f"{bpath}.Dst.Object", "dst object list is empty"))
            for name in beh.dst_objects:
                if name != EMPTY and name not in objects:
                    out.append(
                        _diag(
                            "UNDECLARED_OBJECT",
                            f"{bpath}.Dst.Object",
                            f"dst object {name!r} is not declared",
                        )
                    )
            src_resolver = _make_resolver(document, beh.src_object)
            _check_conditions(beh.preconditions, f"{bpath}.Src.Preconditions", src_resolver, out)
            _check_commands(beh.src_commands, f"{bpath}.Src.Commands", objects, src_resolver, out)
            dst_context = next((n for n in beh.dst_objects if n != EMPTY), None)
            dst_resolver = _make_resolver(document, dst_context)
            _check_commands(beh.dst_commands, f"{bpath}.Dst.Commands", objects, dst_resolver, out)

    for li, level in enumerate(document.environment.levels):
        for y, line in enumerate(level.split("\n")):
            for x, ch in enumerate(line):
                if ch != EMPTY_CHAR and not ch.isspace() and ch not in chars:
                    out.append(
                        _diag(
                            "UNKNOWN_LEVEL_CHARACTER",
                            f"Environment.Levels[{li}]",
                            f"character {ch!r} at ({x}, {y}) has no MapCharacter",
                        )
                    )

    return out
