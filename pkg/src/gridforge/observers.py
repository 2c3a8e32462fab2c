"""Observation functions over simulation state.

Four read-only views: the Vector tensor (one-hot object channels plus
optional orientation and broadcast player-variable channels), an ASCII grid,
a semantic entity list, and the RenderMap handed to UIs.

Tensor layout is row-major ``(y, x, c)``: a ``(height, width, channels)``
array.  With an egocentric window the crop is centered on the avatar,
zero-padded out of bounds, and optionally rotated so the avatar faces up.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from gridforge.engine import GameState
from gridforge.model import EMPTY_CHAR, ORIENTATIONS, GdyDocument, ObserverConfig

# Clockwise quarter-turn cycle used for egocentric rotation.
_CW_CYCLE = ("up", "right", "down", "left")
_TURNS_FOR_ORIENTATION = {"up": 0, "right": 1, "down": 2, "left": 3}


@dataclass(frozen=True, eq=False)
class VectorObservation:
    tensor: np.ndarray
    channel_layout: tuple[tuple[str, str], ...]

    @property
    def height(self) -> int:
        return self.tensor.shape[0]

    @property
    def width(self) -> int:
        return self.tensor.shape[1]

    @property
    def channels(self) -> int:
        return self.tensor.shape[2]


@dataclass(frozen=True)
class EntityObservation:
    entities: tuple[tuple[str, int, int, str, dict], ...]
    global_entity: dict[str, int]


@dataclass(frozen=True)
class RenderTile:
    object_name: str
    tile_key: str
    orientation: str
    autotile_index: int | None


@dataclass(frozen=True)
class RenderMap:
    width: int
    height: int
    cells: tuple[tuple[tuple[RenderTile, ...], ...], ...]  # indexed [y][x], z-ascending


def channel_layout(document: GdyDocument, config: ObserverConfig) -> tuple[tuple[str, str], ...]:
    """Channel order: objects in declaration order, orientation, player variables."""
    layout = [("object", o.name) for o in document.objects]
    if config.include_orientation_channels:
        layout.extend(("orientation", d) for d in ORIENTATIONS)
    if config.include_player_variable_channels:
        layout.extend(("variable", name) for name in document.environment.player_variables)
    return tuple(layout)


def _window_origin(state: GameState, window: tuple[int, int]) -> tuple[int, int]:
    """Top-left world cell of the avatar-centered window."""
    w, h = window
    avatar = state.avatar
    ax = avatar.x if avatar is not None else state.width // 2
    ay = avatar.y if avatar is not None else state.height // 2
    return ax - (w - 1) // 2, ay - (h - 1) // 2


def rotate_window(tensor: np.ndarray, layout: tuple[tuple[str, str], ...], quarter_turns: int):
    """Rotate an observation window by clockwise quarter turns.

    Rotates the spatial plane and permutes orientation channels to match, so
    four applications are the identity.
    """
    k = quarter_turns % 4
    if k == 0:
        return tensor.copy()
    rotated = np.rot90(tensor, k=k, axes=(0, 1)).copy()
    orient_channel = {
        name: i for i, (kind, name) in enumerate(layout) if kind == "orientation"
    }
    if orient_channel:
        source = rotated.copy()
        for name, channel in orient_channel.items():
            origin = _CW_CYCLE[(_CW_CYCLE.index(name) + k) % 4]
            rotated[:, :, channel] = source[:, :, orient_channel[origin]]
    return rotated


# Inverse maps from egocentric offsets to world offsets, per quarter turn.
_INVERSE_OFFSET = (
    lambda ex, ey: (ex, ey),
    lambda ex, ey: (-ey, ex),
    lambda ex, ey: (-ex, -ey),
    lambda ex, ey: (ey, -ex),
)


def vector_obs(state: GameState, config: ObserverConfig) -> VectorObservation:
    """Vector tensor; the output shape never changes within an episode.

    With a window (or with rotation enabled) cells are sampled egocentrically
    around the avatar, so rotation rotates the sampled world region rather
    than the array, and non-square windows keep their shape.
    """
    document = state.game.document
    layout = channel_layout(document, config)
    channels = len(layout)
    object_channel = {
        name: i for i, (kind, name) in enumerate(layout) if kind == "object"
    }
    orient_base = len(object_channel) if config.include_orientation_channels else None

    rotate = config.rotate_with_avatar and state.avatar is not None
    width, height = config.window if config.window is not None else (state.width, state.height)
    egocentric = config.window is not None or rotate
    turns = _TURNS_FOR_ORIENTATION[state.avatar.orientation] if rotate else 0
    to_world = _INVERSE_OFFSET[turns]
    if state.avatar is not None:
        ax, ay = state.avatar.x, state.avatar.y
    else:
        ax, ay = state.width // 2, state.height // 2
    cx, cy = (width - 1) // 2, (height - 1) // 2

    tensor = np.zeros((height, width, channels), dtype=np.int32)
    for wy in range(height):
        for wx in range(width):
            if egocentric:
                ox, oy = to_world(wx - cx, wy - cy)
                x, y = ax + ox, ay + oy
            else:
                x, y = wx, wy
            stack = None
            if 0 <= x < state.width and 0 <= y < state.height:
                stack = state.cells.get(x + y * state.width)
            if not stack:
                continue
            top = stack[-1]
            tensor[wy, wx, object_channel[top.object_name]] = 1
            if orient_base is not None:
                if turns:
                    relative = _CW_CYCLE[(_CW_CYCLE.index(top.orientation) - turns) % 4]
                else:
                    relative = top.orientation
                tensor[wy, wx, orient_base + ORIENTATIONS.index(relative)] = 1

    if config.include_player_variable_channels:
        base = channels - len(document.environment.player_variables)
        for i, name in enumerate(document.environment.player_variables):
            value = state.player_variables.get(name, 0)
            if value:
                tensor[:, :, base + i] = value

    return VectorObservation(tensor=tensor, channel_layout=layout)


def ascii_obs(state: GameState) -> str:
    """One MapCharacter per cell (topmost instance), `.` when empty."""
    defs = state.game.object_defs
    rows = []
    for y in range(state.height):
        row = []
        for x in range(state.width):
            stack = state.cells.get(x + y * state.width)
            row.append(defs[stack[-1].object_name].map_character if stack else EMPTY_CHAR)
        rows.append("".join(row))
    return "\n".join(rows)


def entity_obs(state: GameState, config: ObserverConfig) -> EntityObservation:
    """Semantic per-instance view; coordinates stay in the world frame."""
    if config.window is not None:
        w, h = config.window
        x0, y0 = _window_origin(state, config.window)
        in_window = lambda i: x0 <= i.x < x0 + w and y0 <= i.y < y0 + h
    else:
        in_window = lambda i: True
    entities = tuple(
        (inst.object_name, inst.x, inst.y, inst.orientation, dict(inst.variables))
        for inst in sorted(state.instances.values(), key=lambda i: (i.y, i.x, i.z, i.object_name))
        if in_window(inst)
    )
    return EntityObservation(entities=entities, global_entity=dict(state.player_variables))


def render_map(state: GameState) -> RenderMap:
    """Per-cell Z-ordered tile lists with 16-way wall autotile indices.

    The autotile index is the N=1, E=2, S=4, W=8 bitmask of same-object
    neighbors, present only for objects whose tile enables autotiling.
    """
    defs = state.game.object_defs
    autotile = state.game.autotile_objects
    width, height = state.width, state.height

    def same_object(x: int, y: int, name: str) -> bool:
        if not (0 <= x < width and 0 <= y < height):
            return False
        stack = state.cells.get(x + y * width)
        return bool(stack) and any(i.object_name == name for i in stack)

    rows = []
    for y in range(height):
        row = []
        for x in range(width):
            tiles = []
            for inst in state.cells.get(x + y * width, ()):
                name = inst.object_name
                index = None
                if name in autotile:
                    index = (
                        (1 if same_object(x, y - 1, name) else 0)
                        | (2 if same_object(x + 1, y, name) else 0)
                        | (4 if same_object(x, y + 1, name) else 0)
                        | (8 if same_object(x - 1, y, name) else 0)
                    )
                tiles.append(
                    RenderTile(name, defs[name].tile_spec().key, inst.orientation, index)
                )
            row.append(tuple(tiles))
        rows.append(tuple(row))
    return RenderMap(width=width, height=height, cells=tuple(rows))
