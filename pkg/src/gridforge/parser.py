"""GDY text front-end: parsing, level strings, and canonical serialization.

The accepted grammar is a YAML 1.1 subset: maps, sequences, and scalars.
Anchors and aliases are rejected with :class:`GdySyntaxError`.  Presentation
keys that carry no simulation meaning (``TileSize``, ``BackgroundTile`` and
the sprite payload under ``Observers``) are accepted and dropped; any other
unknown key is a schema error.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import yaml

from gridforge.errors import (
    EmptyLevelError,
    GdySyntaxError,
    SchemaError,
    UnknownCharacterError,
)
from gridforge.hashing import fnv1a64
from gridforge.model import (
    COMPARISON_OPS,
    DIRECTIONAL,
    EMPTY_CHAR,
    LOGICAL_OPS,
    UNARY,
    ActionDef,
    Behaviour,
    Command,
    Condition,
    Diagnostic,
    EnvironmentDef,
    GdyDocument,
    ObjectDef,
    ObserverConfig,
    TileSpec,
    validate,
)

_IGNORED_ENVIRONMENT_KEYS = {"TileSize", "BackgroundTile"}
_WALL_16 = "WALL_16"


class _StrictLoader(yaml.SafeLoader):
    """SafeLoader that refuses anchors and aliases."""

    def compose_node(self, parent, index):
        if self.check_event(yaml.events.AliasEvent):
            event = self.peek_event()
            raise GdySyntaxError(
                "YAML aliases are not supported",
                event.start_mark.line + 1,
                event.start_mark.column + 1,
            )
        event = self.peek_event()
        if getattr(event, "anchor", None) is not None:
            raise GdySyntaxError(
                "YAML anchors are not supported",
                event.start_mark.line + 1,
                event.start_mark.column + 1,
            )
        return super().compose_node(parent, index)


@dataclass(frozen=True)
class LevelLayout:
    """Rectangular grid of object placements; (0, 0) is the top-left cell."""

    width: int
    height: int
    placements: tuple[tuple[int, int, str], ...]

    def __post_init__(self):
        seen = set()
        for x, y, name in self.placements:
            if not (0 <= x < self.width and 0 <= y < self.height):
                raise ValueError(f"placement ({x}, {y}, {name!r}) out of bounds")
            if (x, y) in seen:
                raise ValueError(f"two placements at ({x}, {y})")
            seen.add((x, y))
        ordered = tuple(sorted(self.placements, key=lambda p: (p[1], p[0])))
        object.__setattr__(self, "placements", ordered)

    def counts(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for _, _, name in self.placements:
            out[name] = out.get(name, 0) + 1
        return out


class _Builder:
    """Walks raw YAML data into model dataclasses, collecting diagnostics."""

    def __init__(self):
        self.diagnostics: list[Diagnostic] = []

    def error(self, code: str, path: str, message: str) -> None:
        self.diagnostics.append(Diagnostic("error", code, path, message))

    def expect_map(self, value, path: str) -> dict:
        if isinstance(value, dict):
            return value
        self.error("BAD_TYPE", path, f"expected a mapping, got {type(value).__name__}")
        return {}

    def expect_list(self, value, path: str) -> list:
        if isinstance(value, list):
            return value
        self.error("BAD_TYPE", path, f"expected a sequence, got {type(value).__name__}")
        return []

    def expect_str(self, value, path: str, default: str = "") -> str:
        if isinstance(value, str):
            return value
        self.error("BAD_TYPE", path, f"expected a string, got {type(value).__name__}")
        return default

    def expect_int(self, value, path: str, default: int = 0) -> int:
        if isinstance(value, int) and not isinstance(value, bool):
            return value
        self.error("BAD_TYPE", path, f"expected an integer, got {type(value).__name__}")
        return default

    def expect_bool(self, value, path: str) -> bool:
        if isinstance(value, bool):
            return value
        self.error("BAD_TYPE", path, f"expected a boolean, got {type(value).__name__}")
        return False

    def check_keys(self, data: dict, allowed: set[str], path: str, ignored: set[str] = frozenset()):
        for key in data:
            if key not in allowed and key not in ignored:
                self.error("UNKNOWN_KEY", f"{path}.{key}", f"unknown key {key!r}")

    # -- conditions -------------------------------------------------------

    def build_condition(self, op, operands, path: str) -> Condition:
        if op in LOGICAL_OPS:
            subs = tuple(
                self.build_conditions(operands, f"{path}.{op}")
            )
            return Condition(op, subs)
        if op not in COMPARISON_OPS:
            self.error("BAD_CONDITION", path, f"unknown condition op {op!r}")
            return Condition("eq", (0, 0))
        items = self.expect_list(operands, path)
        cleaned = []
        for i, item in enumerate(items):
            if isinstance(item, bool) or not isinstance(item, (int, str)):
                self.error("BAD_OPERAND", f"{path}[{i}]", "operands are integers or variable refs")
            else:
                cleaned.append(item)
        if len(cleaned) != 2:
            self.error("BAD_CONDITION", path, "comparisons take exactly 2 operands")
            cleaned = (cleaned + [0, 0])[:2]
        return Condition(op, tuple(cleaned))

    def build_conditions(self, value, path: str) -> tuple[Condition, ...]:
        """A conditions block is a single `{op: operands}` map or a list of them."""
        if value is None:
            return ()
        if isinstance(value, dict):
            return tuple(
                self.build_condition(op, operands, f"{path}.{op}")
                for op, operands in value.items()
            )
        if isinstance(value, list):
            out = []
            for i, item in enumerate(value):
                item_map = self.expect_map(item, f"{path}[{i}]")
                for op, operands in item_map.items():
                    out.append(self.build_condition(op, operands, f"{path}[{i}].{op}"))
            return tuple(out)
        self.error("BAD_TYPE", path, "expected a condition map or list")
        return ()

    # -- commands ---------------------------------------------------------

    def build_commands(self, value, path: str) -> tuple[Command, ...]:
        if value is None:
            return ()
        out = []
        for i, item in enumerate(self.expect_list(value, path)):
            cpath = f"{path}[{i}]"
            item_map = self.expect_map(item, cpath)
            if len(item_map) != 1:
                self.error("BAD_COMMAND", cpath, "a command is a single-key mapping")
                continue
            ((kind, arg),) = item_map.items()
            out.append(self.build_command(kind, arg, f"{cpath}.{kind}"))
        return tuple(c for c in out if c is not None)

    def build_command(self, kind, arg, path: str) -> Command | None:
        if kind in ("mov", "cascade"):
            target = self.expect_str(arg, path, "_dest")
            return Command(kind, (target,))
        if kind == "remove":
            if arg is not True:
                self.error("BAD_COMMAND", path, "remove takes `true`")
            return Command("remove")
        if kind == "spawn":
            return Command("spawn", (self.expect_str(arg, path),))
        if kind == "reward":
            return Command("reward", (self.expect_int(arg, path),))
        if kind in ("add", "sub", "set"):
            items = self.expect_list(arg, path)
            if len(items) != 2:
                self.error("BAD_COMMAND", path, f"{kind} takes [variable, operand]")
                return Command(kind, ("", 0))
            var = self.expect_str(items[0], f"{path}[0]")
            operand = items[1]
            if isinstance(operand, bool) or not isinstance(operand, (int, str)):
                self.error("BAD_OPERAND", f"{path}[1]", "operand must be an integer or variable ref")
                operand = 0
            return Command(kind, (var, operand))
        if kind in ("incr", "decr"):
            if isinstance(arg, list) and len(arg) == 1:
                arg = arg[0]
            return Command(kind, (self.expect_str(arg, path),))
        if kind == "if":
            body = self.expect_map(arg, path)
            self.check_keys(body, {"Conditions", "OnTrue", "OnFalse"}, path)
            return Command(
                "if",
                conditions=self.build_conditions(body.get("Conditions"), f"{path}.Conditions"),
                on_true=self.build_commands(body.get("OnTrue"), f"{path}.OnTrue"),
                on_false=self.build_commands(body.get("OnFalse"), f"{path}.OnFalse"),
            )
        self.error("BAD_COMMAND", path, f"unknown command kind {kind!r}")
        return None

    # -- sections ---------------------------------------------------------

    def build_behaviour(self, value, path: str) -> Behaviour:
        data = self.expect_map(value, path)
        self.check_keys(data, {"Src", "Dst"}, path)
        src = self.expect_map(data.get("Src"), f"{path}.Src")
        self.check_keys(src, {"Object", "Preconditions", "Commands"}, f"{path}.Src")
        dst = self.expect_map(data.get("Dst"), f"{path}.Dst")
        self.check_keys(dst, {"Object", "Commands"}, f"{path}.Dst")

        dst_value = dst.get("Object")
        if isinstance(dst_value, str):
            dst_objects: tuple[str, ...] = (dst_value,)
        else:
            dst_objects = tuple(
                self.expect_str(item, f"{path}.Dst.Object[{i}]")
                for i, item in enumerate(self.expect_list(dst_value, f"{path}.Dst.Object"))
            )
        return Behaviour(
            src_object=self.expect_str(src.get("Object"), f"{path}.Src.Object"),
            dst_objects=dst_objects,
            preconditions=self.build_conditions(src.get("Preconditions"), f"{path}.Src.Preconditions"),
            src_commands=self.build_commands(src.get("Commands"), f"{path}.Src.Commands"),
            dst_commands=self.build_commands(dst.get("Commands"), f"{path}.Dst.Commands"),
        )

    def build_action(self, value, path: str) -> ActionDef:
        data = self.expect_map(value, path)
        self.check_keys(data, {"Name", "InputMapping", "Behaviours"}, path)
        mapping = DIRECTIONAL
        if "InputMapping" in data:
            raw = self.expect_str(data["InputMapping"], f"{path}.InputMapping", "Directional")
            if raw == "Unary":
                mapping = UNARY
            elif raw != "Directional":
                self.error("BAD_INPUT_MAPPING", f"{path}.InputMapping", f"unknown mapping {raw!r}")
        behaviours = tuple(
            self.build_behaviour(item, f"{path}.Behaviours[{i}]")
            for i, item in enumerate(self.expect_list(data.get("Behaviours"), f"{path}.Behaviours"))
        )
        return ActionDef(
            name=self.expect_str(data.get("Name"), f"{path}.Name"),
            behaviours=behaviours,
            input_mapping=mapping,
        )

    def build_variables(self, value, path: str) -> dict[str, int]:
        """Accepts the list form ({Name, InitialValue}) or a plain name->int map."""
        out: dict[str, int] = {}
        if value is None:
            return out
        if isinstance(value, dict):
            for name, init in value.items():
                key = self.expect_str(name, path)
                out[key] = self.expect_int(init, f"{path}.{key}") if init is not None else 0
            return out
        for i, item in enumerate(self.expect_list(value, path)):
            vpath = f"{path}[{i}]"
            data = self.expect_map(item, vpath)
            self.check_keys(data, {"Name", "InitialValue"}, vpath)
            name = self.expect_str(data.get("Name"), f"{vpath}.Name")
            init = data.get("InitialValue", 0)
            out[name] = self.expect_int(init, f"{vpath}.InitialValue") if init is not None else 0
        return out

    def build_object(self, value, path: str) -> ObjectDef:
        data = self.expect_map(value, path)
        self.check_keys(data, {"Name", "MapCharacter", "Z", "Variables", "Tile"}, path, ignored={"Observers"})
        name = self.expect_str(data.get("Name"), f"{path}.Name")

        char = data.get("MapCharacter")
        if isinstance(char, int) and not isinstance(char, bool):
            char = str(char)
        char = self.expect_str(char, f"{path}.MapCharacter", "?")

        autotile = False
        observers = data.get("Observers")
        if isinstance(observers, dict):
            sprite = observers.get("Sprite2D")
            if isinstance(sprite, dict) and sprite.get("TilingMode") == _WALL_16:
                autotile = True

        tile_key = name
        tile_value = data.get("Tile")
        if tile_value is not None:
            tile_map = self.expect_map(tile_value, f"{path}.Tile")
            self.check_keys(tile_map, {"Key", "Autotile"}, f"{path}.Tile")
            if "Key" in tile_map:
                tile_key = self.expect_str(tile_map["Key"], f"{path}.Tile.Key", name)
            if "Autotile" in tile_map:
                autotile = self.expect_bool(tile_map["Autotile"], f"{path}.Tile.Autotile")

        return ObjectDef(
            name=name,
            map_character=char,
            z=self.expect_int(data.get("Z", 0), f"{path}.Z"),
            initial_variables=self.build_variables(data.get("Variables"), f"{path}.Variables"),
            tile=TileSpec(tile_key, autotile),
        )

    def build_observer_config(self, value, path: str) -> ObserverConfig:
        data = self.expect_map(value, path)
        self.check_keys(
            data,
            {"Width", "Height", "RotateWithAvatar", "IncludeOrientation", "IncludePlayerVariables"},
            path,
        )
        window = None
        if "Width" in data or "Height" in data:
            if "Width" in data and "Height" in data:
                window = (
                    self.expect_int(data["Width"], f"{path}.Width", 1),
                    self.expect_int(data["Height"], f"{path}.Height", 1),
                )
            else:
                self.error("BAD_WINDOW", path, "Width and Height must be given together")
        return ObserverConfig(
            window=window,
            rotate_with_avatar=self.expect_bool(data["RotateWithAvatar"], f"{path}.RotateWithAvatar")
            if "RotateWithAvatar" in data
            else False,
            include_orientation_channels=self.expect_bool(data["IncludeOrientation"], f"{path}.IncludeOrientation")
            if "IncludeOrientation" in data
            else False,
            include_player_variable_channels=self.expect_bool(
                data["IncludePlayerVariables"], f"{path}.IncludePlayerVariables"
            )
            if "IncludePlayerVariables" in data
            else False,
        )

    def build_environment(self, value) -> EnvironmentDef:
        path = "Environment"
        data = self.expect_map(value, path)
        self.check_keys(
            data,
            {"Name", "Player", "Termination", "MaxSteps", "Variables", "Levels"},
            path,
            ignored=_IGNORED_ENVIRONMENT_KEYS,
        )
        player = self.expect_map(data.get("Player"), f"{path}.Player")
        self.check_keys(player, {"AvatarObject", "Observer"}, f"{path}.Player")
        avatar = self.expect_str(player.get("AvatarObject"), f"{path}.Player.AvatarObject")

        observer = ObserverConfig()
        if "Observer" in player:
            observer = self.build_observer_config(player["Observer"], f"{path}.Player.Observer")

        win: tuple[Condition, ...] = ()
        lose: tuple[Condition, ...] = ()
        if "Termination" in data:
            term = self.expect_map(data["Termination"], f"{path}.Termination")
            self.check_keys(term, {"Win", "Lose"}, f"{path}.Termination")
            win = self.build_conditions(term.get("Win"), f"{path}.Termination.Win")
            lose = self.build_conditions(term.get("Lose"), f"{path}.Termination.Lose")

        max_steps = None
        if data.get("MaxSteps") is not None:
            max_steps = self.expect_int(data["MaxSteps"], f"{path}.MaxSteps", 1)

        levels = []
        for i, item in enumerate(self.expect_list(data.get("Levels", []), f"{path}.Levels")):
            raw = self.expect_str(item, f"{path}.Levels[{i}]")
            levels.append(normalize_level_string(raw))

        return EnvironmentDef(
            name=self.expect_str(data.get("Name", ""), f"{path}.Name"),
            avatar_object=avatar,
            win_conditions=win,
            lose_conditions=lose,
            max_steps=max_steps,
            player_variables=self.build_variables(data.get("Variables"), f"{path}.Variables"),
            observer_config=observer,
            levels=tuple(levels),
        )

    def build_document(self, data) -> GdyDocument:
        root = self.expect_map(data, "$")
        self.check_keys(root, {"Environment", "Actions", "Objects"}, "$")
        if "Environment" not in root:
            self.error("MISSING_SECTION", "Environment", "Environment section is required")
        environment = self.build_environment(root.get("Environment", {}))
        actions = tuple(
            self.build_action(item, f"Actions[{i}]")
            for i, item in enumerate(self.expect_list(root.get("Actions", []), "Actions"))
        )
        objects = tuple(
            self.build_object(item, f"Objects[{i}]")
            for i, item in enumerate(self.expect_list(root.get("Objects", []), "Objects"))
        )
        return GdyDocument(environment=environment, actions=actions, objects=objects)


def normalize_level_string(raw: str) -> str:
    """Strip per-line trailing whitespace and trailing blank lines."""
    lines = [line.rstrip() for line in raw.replace("\r\n", "\n").split("\n")]
    while lines and not lines[-1]:
        lines.pop()
    return "\n".join(lines)


def parse_gdy(text: str | bytes) -> GdyDocument:
    """Parse GDY source text into a validated document.

    Raises :class:`GdySyntaxError` for malformed YAML and
    :class:`SchemaError` (with diagnostics) for well-formed YAML that does
    not describe a valid document.
    """
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise GdySyntaxError(f"GDY source is not valid UTF-8: {exc}") from exc
    try:
        data = yaml.load(text, Loader=_StrictLoader)
    except GdySyntaxError:
        raise
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        if mark is not None:
            raise GdySyntaxError(str(exc), mark.line + 1, mark.column + 1) from exc
        raise GdySyntaxError(str(exc)) from exc

    builder = _Builder()
    document = builder.build_document(data)
    if builder.diagnostics:
        raise SchemaError(builder.diagnostics)
    diagnostics = validate(document)
    if diagnostics:
        raise SchemaError(diagnostics)
    return finalize_document(document)


def finalize_document(document: GdyDocument) -> GdyDocument:
    """Attach the canonical content hash (used to bind trajectories)."""
    return dataclasses.replace(document, source_hash=compute_source_hash(document))


def compute_source_hash(document: GdyDocument) -> int:
    return fnv1a64(serialize_gdy(document).encode("utf-8"))


# -- level strings ---------------------------------------------------------


def parse_level(document: GdyDocument, level_string: str) -> LevelLayout:
    """Turn a character grid into a layout.

    Short rows are right-padded as empty; within-row whitespace also reads
    as empty so hand-padded strings stay valid.
    """
    lines = normalize_level_string(level_string).split("\n")
    if lines == [""]:
        raise EmptyLevelError("level string has no rows")
    chars = document.objects_by_char()
    width = max(len(line) for line in lines)
    if width == 0:
        raise EmptyLevelError("level string has no cells")
    placements = []
    for y, line in enumerate(lines):
        for x, ch in enumerate(line):
            if ch == EMPTY_CHAR or ch.isspace():
                continue
            name = chars.get(ch)
            if name is None:
                raise UnknownCharacterError(ch, x, y)
            placements.append((x, y, name))
    return LevelLayout(width=width, height=len(lines), placements=tuple(placements))


def serialize_level(layout: LevelLayout, document: GdyDocument) -> str:
    """Inverse of :func:`parse_level` for rectangular layouts."""
    objects = document.objects_by_name()
    grid = [[EMPTY_CHAR] * layout.width for _ in range(layout.height)]
    for x, y, name in layout.placements:
        obj = objects.get(name)
        if obj is None:
            raise ValueError(f"object {name!r} is not declared in the document")
        grid[y][x] = obj.map_character
    return "\n".join("".join(row) for row in grid)


# -- canonical serialization ------------------------------------------------


class _CanonicalDumper(yaml.SafeDumper):
    pass


def _str_representer(dumper: yaml.SafeDumper, value: str):
    style = "|" if "\n" in value else None
    return dumper.represent_scalar("tag:yaml.org,2002:str", value, style=style)


_CanonicalDumper.add_representer(str, _str_representer)


def _condition_data(cond: Condition):
    if cond.op in LOGICAL_OPS:
        return {cond.op: [_condition_data(sub) for sub in cond.operands]}
    return {cond.op: list(cond.operands)}


def _command_data(cmd: Command):
    if cmd.kind in ("mov", "cascade"):
        return {cmd.kind: cmd.args[0]}
    if cmd.kind == "remove":
        return {"remove": True}
    if cmd.kind == "spawn":
        return {"spawn": cmd.args[0]}
    if cmd.kind == "reward":
        return {"reward": cmd.args[0]}
    if cmd.kind in ("add", "sub", "set"):
        return {cmd.kind: list(cmd.args)}
    if cmd.kind in ("incr", "decr"):
        return {cmd.kind: cmd.args[0]}
    body: dict = {"Conditions": [_condition_data(c) for c in cmd.conditions]}
    if cmd.on_true:
        body["OnTrue"] = [_command_data(c) for c in cmd.on_true]
    if cmd.on_false:
        body["OnFalse"] = [_command_data(c) for c in cmd.on_false]
    return {"if": body}


def _variables_data(variables: dict[str, int]) -> list:
    return [{"Name": name, "InitialValue": value} for name, value in variables.items()]


def _behaviour_data(beh: Behaviour) -> dict:
    src: dict = {"Object": beh.src_object}
    if beh.preconditions:
        src["Preconditions"] = [_condition_data(c) for c in beh.preconditions]
    if beh.src_commands:
        src["Commands"] = [_command_data(c) for c in beh.src_commands]
    dst: dict = {
        "Object": beh.dst_objects[0] if len(beh.dst_objects) == 1 else list(beh.dst_objects)
    }
    if beh.dst_commands:
        dst["Commands"] = [_command_data(c) for c in beh.dst_commands]
    return {"Src": src, "Dst": dst}


def serialize_gdy(document: GdyDocument) -> str:
    """Deterministic, key-ordered canonical form; re-parses to an equal document."""
    env = document.environment
    env_data: dict = {"Name": env.name, "Player": {"AvatarObject": env.avatar_object}}
    cfg = env.observer_config
    if cfg != ObserverConfig():
        observer: dict = {}
        if cfg.window is not None:
            observer["Width"] = cfg.window[0]
            observer["Height"] = cfg.window[1]
        if cfg.rotate_with_avatar:
            observer["RotateWithAvatar"] = True
        if cfg.include_orientation_channels:
            observer["IncludeOrientation"] = True
        if cfg.include_player_variable_channels:
            observer["IncludePlayerVariables"] = True
        env_data["Player"]["Observer"] = observer
    if env.win_conditions or env.lose_conditions:
        term: dict = {}
        if env.win_conditions:
            term["Win"] = [_condition_data(c) for c in env.win_conditions]
        if env.lose_conditions:
            term["Lose"] = [_condition_data(c) for c in env.lose_conditions]
        env_data["Termination"] = term
    if env.max_steps is not None:
        env_data["MaxSteps"] = env.max_steps
    if env.player_variables:
        env_data["Variables"] = _variables_data(env.player_variables)
    if env.levels:
        env_data["Levels"] = list(env.levels)

    root: dict = {"Environment": env_data}
    if document.actions:
        root["Actions"] = [
            _action_data(action) for action in document.actions
        ]
    if document.objects:
        root["Objects"] = [_object_data(obj) for obj in document.objects]

    return yaml.dump(
        root,
        Dumper=_CanonicalDumper,
        default_flow_style=False,
        sort_keys=False,
        allow_unicode=True,
        width=4096,
    )


def _action_data(action: ActionDef) -> dict:
    data: dict = {"Name": action.name}
    if action.input_mapping == UNARY:
        data["InputMapping"] = "Unary"
    data["Behaviours"] = [_behaviour_data(b) for b in action.behaviours]
    return data


def _object_data(obj: ObjectDef) -> dict:
    data: dict = {"Name": obj.name, "MapCharacter": obj.map_character}
    if obj.z:
        data["Z"] = obj.z
    if obj.initial_variables:
        data["Variables"] = _variables_data(obj.initial_variables)
    tile = obj.tile_spec()
    if tile != TileSpec(obj.name):
        tile_data: dict = {}
        if tile.key != obj.name:
            tile_data["Key"] = tile.key
        if tile.autotile:
            tile_data["Autotile"] = True
        data["Tile"] = tile_data
    return data
