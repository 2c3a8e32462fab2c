"""Seeded procedural generator for escape-room levels.

Terrain comes from two octaves of seeded gradient noise thresholded into
grass / water / stone / tree / lava bands; the border is closed with solid
stone or water.  Ores are scattered on stone cells, the avatar starts on a
grass cell, and a single cherry-tree goal is placed on the grass cell at
maximal walking distance inside the avatar's land basin (falling back to the
farthest grass cell by Manhattan distance when the basin is trivial, which
is what occasionally makes tools necessary).

No solvability guarantee is made; :func:`reachability_hint` exposes the
distinction instead.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from gridforge.errors import UnsatisfiableError
from gridforge.hashing import SplitMix64, mix_seed
from gridforge.model import GdyDocument
from gridforge.parser import parse_level

MIN_SIZE = 8
MAX_PLACEMENT_ATTEMPTS = 1000

AVATAR_CHAR = "A"
GRASS_CHAR = "g"
TREE_CHAR = "t"
CHERRY_CHAR = "c"
WATER_CHAR = "w"
STONE_CHAR = "s"
LAVA_CHAR = "l"
ORE_CHARS = {"coal": "o", "iron": "i", "diamond": "d"}

GOAL_OBJECT = "cherry_tree"

# Objects a flood fill may pass through when the player has tools: anything
# choppable, mineable, or bridgeable with placed stone.  Lava stays fatal.
_TOOL_PASSABLE = {"grass", "tree", "stone", "coal", "iron", "diamond", "water"}
_WALKABLE = {"grass"}

LAND_REACHABLE = "land_reachable"
TOOLS_REQUIRED = "tools_required"
UNKNOWN = "unknown"


@dataclass(frozen=True)
class GenParams:
    """Knobs for one generated level; equal params yield identical output."""

    width: int = 24
    height: int = 24
    seed: int = 0
    water_threshold: float = 0.34
    tree_threshold: float = 0.55
    stone_threshold: float = 0.64
    lava_threshold: float = 0.94
    ore_counts: dict[str, int] = field(
        default_factory=lambda: {"coal": 4, "iron": 2, "diamond": 1}
    )

    def validate(self) -> None:
        if self.width < MIN_SIZE or self.height < MIN_SIZE:
            raise UnsatisfiableError(f"grid must be at least {MIN_SIZE}x{MIN_SIZE}")
        thresholds = (
            self.water_threshold,
            self.tree_threshold,
            self.stone_threshold,
            self.lava_threshold,
        )
        if any(not 0.0 <= t <= 1.0 for t in thresholds) or list(thresholds) != sorted(thresholds):
            raise UnsatisfiableError("thresholds must be ordered in [0, 1]")
        for ore, count in self.ore_counts.items():
            if ore not in ORE_CHARS:
                raise UnsatisfiableError(f"unknown ore {ore!r}")
            if count < 0:
                raise UnsatisfiableError("ore counts must be non-negative")
        mandatory = 2 + sum(self.ore_counts.values())  # avatar + cherry + ores
        if self.width * self.height < mandatory:
            raise UnsatisfiableError("grid too small for the mandatory placements")


# -- gradient noise ----------------------------------------------------------

_GRADIENTS = np.array(
    [
        (1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0),
        (0.7071, 0.7071), (-0.7071, 0.7071), (0.7071, -0.7071), (-0.7071, -0.7071),
    ]
)


def _permutation(seed: int) -> np.ndarray:
    table = list(range(256))
    SplitMix64(mix_seed(seed, 0x9E3779B9)).shuffle(table)
    return np.array(table + table, dtype=np.int64)


def _perlin(xs: np.ndarray, ys: np.ndarray, perm: np.ndarray) -> np.ndarray:
    """Classic 2D gradient noise over float coordinate grids, range ~[-1, 1]."""
    x0 = np.floor(xs).astype(np.int64)
    y0 = np.floor(ys).astype(np.int64)
    fx = xs - x0
    fy = ys - y0

    def gradient(ix, iy):
        return _GRADIENTS[perm[(perm[ix & 255] + iy) & 255] & 7]

    def dot(ix, iy, dx, dy):
        g = gradient(ix, iy)
        return g[..., 0] * dx + g[..., 1] * dy

    n00 = dot(x0, y0, fx, fy)
    n10 = dot(x0 + 1, y0, fx - 1, fy)
    n01 = dot(x0, y0 + 1, fx, fy - 1)
    n11 = dot(x0 + 1, y0 + 1, fx - 1, fy - 1)

    ux = fx * fx * fx * (fx * (fx * 6 - 15) + 10)
    uy = fy * fy * fy * (fy * (fy * 6 - 15) + 10)
    nx0 = n00 + ux * (n10 - n00)
    nx1 = n01 + ux * (n11 - n01)
    return nx0 + uy * (nx1 - nx0)


def _noise_field(params: GenParams) -> np.ndarray:
    """Two-octave fractal noise normalized to [0, 1]."""
    perm = _permutation(params.seed)
    ys, xs = np.mgrid[0 : params.height, 0 : params.width].astype(np.float64)
    base = params.seed % 1024
    freq = 0.13
    value = _perlin(xs * freq + base, ys * freq + base, perm)
    value += 0.5 * _perlin(xs * freq * 2 + base, ys * freq * 2 + base, perm)
    return np.clip(0.5 + value / 2.1, 0.0, 1.0)


# -- generation ---------------------------------------------------------------


def _terrain_char(value: float, params: GenParams) -> str:
    if value < params.water_threshold:
        return WATER_CHAR
    if value < params.tree_threshold:
        return GRASS_CHAR
    if value < params.stone_threshold:
        return TREE_CHAR
    if value < params.lava_threshold:
        return STONE_CHAR
    return LAVA_CHAR


def _basin_distances(grid: list[list[str]], start: tuple[int, int]) -> dict[tuple[int, int], int]:
    """BFS over grass from the avatar cell; keys are reachable grass cells."""
    width, height = len(grid[0]), len(grid)
    distances = {start: 0}
    queue = deque([start])
    while queue:
        x, y = queue.popleft()
        d = distances[(x, y)] + 1
        for nx, ny in ((x - 1, y), (x + 1, y), (x, y - 1), (x, y + 1)):
            if 0 <= nx < width and 0 <= ny < height and (nx, ny) not in distances:
                if grid[ny][nx] == GRASS_CHAR:
                    distances[(nx, ny)] = d
                    queue.append((nx, ny))
    return distances


def generate(params: GenParams) -> str:
    """Produce one level string; deterministic in ``params``."""
    params.validate()
    rng = SplitMix64(mix_seed(params.seed, 0xC0FFEE))
    noise = _noise_field(params)
    width, height = params.width, params.height

    grid = [[GRASS_CHAR] * width for _ in range(height)]
    for y in range(height):
        for x in range(width):
            on_border = x in (0, width - 1) or y in (0, height - 1)
            value = float(noise[y, x])
            if on_border:
                grid[y][x] = WATER_CHAR if value < params.water_threshold else STONE_CHAR
            else:
                grid[y][x] = _terrain_char(value, params)

    interior = [(x, y) for y in range(1, height - 1) for x in range(1, width - 1)]

    def cells_of(char: str) -> list[tuple[int, int]]:
        return [(x, y) for (x, y) in interior if grid[y][x] == char]

    # Lush maps may not produce enough rock for the ores; petrify the
    # highest-noise tree/grass cells (nearest the stone band) to cover the
    # shortfall, keeping grass for the avatar and the goal.
    ore_total = sum(params.ore_counts.values())
    shortfall = ore_total - len(cells_of(STONE_CHAR))
    if shortfall > 0:
        convertible = sorted(
            ((x, y) for (x, y) in interior if grid[y][x] in (TREE_CHAR, GRASS_CHAR)),
            key=lambda c: (grid[c[1]][c[0]] != TREE_CHAR, -noise[c[1], c[0]], c[1], c[0]),
        )
        for x, y in convertible:
            if shortfall == 0:
                break
            if grid[y][x] == GRASS_CHAR and len(cells_of(GRASS_CHAR)) <= 2:
                continue
            grid[y][x] = STONE_CHAR
            shortfall -= 1
        if shortfall > 0:
            raise UnsatisfiableError(f"could not allocate {ore_total} stone cells for ores")

    grass_cells = cells_of(GRASS_CHAR)
    if len(grass_cells) < 2:
        raise UnsatisfiableError("not enough grass for the avatar and the goal")

    stone_cells = cells_of(STONE_CHAR)
    rng.shuffle(stone_cells)
    cursor = 0
    for ore in ("coal", "iron", "diamond"):
        for _ in range(params.ore_counts.get(ore, 0)):
            x, y = stone_cells[cursor]
            cursor += 1
            grid[y][x] = ORE_CHARS[ore]

    avatar = None
    for _ in range(MAX_PLACEMENT_ATTEMPTS):
        candidate = grass_cells[rng.randrange(len(grass_cells))]
        if grid[candidate[1]][candidate[0]] == GRASS_CHAR:
            avatar = candidate
            break
    if avatar is None:
        raise UnsatisfiableError("could not place the avatar on grass")

    # Farthest grass cell from the avatar: walking distance inside the
    # avatar's land basin, Manhattan distance for disconnected cells (which
    # lets an island win occasionally, making tools necessary).
    basin = _basin_distances(grid, avatar)
    candidates = [(x, y) for (x, y) in grass_cells if (x, y) != avatar and grid[y][x] == GRASS_CHAR]
    if not candidates:
        raise UnsatisfiableError("could not place the goal cherry tree")

    def goal_score(cell):
        if cell in basin:
            distance = 4 * basin[cell]
        else:
            # Disconnected grass competes at a discount so islands only win
            # when the walkable basin is genuinely small.
            distance = 3 * (abs(cell[0] - avatar[0]) + abs(cell[1] - avatar[1]))
        return (distance, -cell[1], -cell[0])

    goal = max(candidates, key=goal_score)

    grid[avatar[1]][avatar[0]] = AVATAR_CHAR
    grid[goal[1]][goal[0]] = CHERRY_CHAR
    return "\n".join("".join(row) for row in grid)


# -- reachability hint --------------------------------------------------------


def reachability_hint(level_string: str, document: GdyDocument) -> str:
    """Heuristic label for how the goal can be reached; not a solvability proof.

    Flood-fills walkable tiles from the avatar; reaching the goal means
    ``land_reachable``.  A second fill that may also pass choppable,
    mineable, and stone-bridgeable tiles yields ``tools_required``;
    otherwise ``unknown``.
    """
    layout = parse_level(document, level_string)
    occupied = {(x, y): name for x, y, name in layout.placements}
    avatar_object = document.environment.avatar_object
    avatar = next(((x, y) for (x, y), n in occupied.items() if n == avatar_object), None)
    goal = next(((x, y) for (x, y), n in occupied.items() if n == GOAL_OBJECT), None)
    if avatar is None or goal is None:
        return UNKNOWN

    def flood(passable: set[str]) -> bool:
        seen = {avatar}
        queue = deque([avatar])
        while queue:
            x, y = queue.popleft()
            for nx, ny in ((x - 1, y), (x + 1, y), (x, y - 1), (x, y + 1)):
                if not (0 <= nx < layout.width and 0 <= ny < layout.height):
                    continue
                if (nx, ny) in seen:
                    continue
                if (nx, ny) == goal:
                    return True
                name = occupied.get((nx, ny))
                if name is None or name in passable:
                    seen.add((nx, ny))
                    queue.append((nx, ny))
        return False

    if flood(_WALKABLE):
        return LAND_REACHABLE
    if flood(_TOOL_PASSABLE):
        return TOOLS_REQUIRED
    return UNKNOWN
