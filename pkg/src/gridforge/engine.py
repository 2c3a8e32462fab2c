"""Rule-based MDP execution: behaviour matching, commands, rewards, termination.

A :class:`CompiledGame` is an immutable, preprocessed view of a document
(behaviour lookup tables, compiled condition/command programs, the flattened
action space) shared by every episode.  A :class:`GameState` is owned by one
logical thread at a time; distinct states backed by the same compiled game
may be stepped fully in parallel.

Resolution procedure for one step:

1. Action 0 is the no-op: only the step counter advances, then termination
   and the step limit are evaluated.
2. The destination cell is the actor's cell plus the input delta (unary
   inputs target the avatar's faced cell); the destination object is the
   topmost-Z instance there, else ``_empty``.  Out-of-bounds destinations
   match nothing.
3. The first behaviour in declaration order whose source matches the actor,
   whose destination list contains the destination object, and whose
   preconditions pass is selected; if none, the step has no effect (the
   avatar does not even rotate, keeping masked-out actions side-effect
   free).
4. On selection, a player-initiated directional input sets the avatar's
   orientation, then destination commands run before source commands so a
   ``cascade`` vacates the cell before the source's ``mov``.
5. Win conditions, then lose conditions, are evaluated on the
   post-transition state; afterwards the step limit marks truncation.
"""

from __future__ import annotations

import operator
from dataclasses import dataclass

from gridforge.errors import (
    BadActionError,
    EpisodeOverError,
    MissingAvatarError,
    MultipleAvatarsError,
)
from gridforge.hashing import fnv1a64
from gridforge.model import (
    DELTAS,
    DEFAULT_ORIENTATION,
    DIRECTIONAL,
    DIRECTIONAL_INPUTS,
    EMPTY,
    Command,
    Condition,
    GdyDocument,
)
from gridforge.parser import LevelLayout

RUNNING = "running"
WIN = "win"
LOSE = "lose"
TRUNCATED = "truncated"

MAX_CASCADE_DEPTH = 32

_ORIENT_OF_DELTA = {delta: name for name, delta in DIRECTIONAL_INPUTS}
_KEY_POOL = ("E", "Q", "R", "T", "1", "2", "3", "4", "5", "6", "7", "8", "9")
_WASD = {"left": "A", "right": "D", "down": "S", "up": "W"}


@dataclass(frozen=True)
class ActionEntry:
    id: int
    action: str
    input: str
    label: str
    key: str | None
    delta: tuple[int, int] | None  # None for unary entries (faced cell)


@dataclass(frozen=True)
class ActionSpace:
    entries: tuple[ActionEntry, ...]

    def __len__(self) -> int:
        return len(self.entries)

    def labels(self) -> list[str]:
        return [e.label for e in self.entries]


@dataclass(frozen=True)
class StepResult:
    reward: int
    terminated: bool
    truncated: bool
    events: tuple[tuple[str, str, tuple[int, int]], ...]
    info: dict[str, int]


def _title(name: str) -> str:
    return " ".join(part.capitalize() for part in name.split("_"))


def build_action_space(document: GdyDocument) -> ActionSpace:
    """Flatten (action, input) pairs into contiguous ids with key bindings.

    Id 0 is the no-op.  Directional actions contribute left/right/down/up in
    that order; the first one claims the WASD keys, everything else draws
    from a fixed pool.
    """
    entries = [ActionEntry(0, "", "", "No-Op", None, (0, 0))]
    pool = list(_KEY_POOL)
    wasd_taken = False
    for action in document.actions:
        if action.input_mapping == DIRECTIONAL:
            use_wasd = not wasd_taken
            wasd_taken = True
            for input_name, delta in DIRECTIONAL_INPUTS:
                key = _WASD[input_name] if use_wasd else (pool.pop(0) if pool else None)
                entries.append(
                    ActionEntry(
                        id=len(entries),
                        action=action.name,
                        input=input_name,
                        label=f"{_title(action.name)} {input_name.capitalize()}",
                        key=key,
                        delta=delta,
                    )
                )
        else:
            entries.append(
                ActionEntry(
                    id=len(entries),
                    action=action.name,
                    input="",
                    label=_title(action.name),
                    key=pool.pop(0) if pool else None,
                    delta=None,
                )
            )
    return ActionSpace(tuple(entries))


# -- compilation -------------------------------------------------------------


def _compile_operand(operand):
    if isinstance(operand, str):
        if operand.endswith(":count"):
            return ("count", operand[: -len(":count")])
        return ("var", operand)
    return ("lit", operand)


def _compile_condition(cond: Condition):
    if cond.op in ("and", "or"):
        return (cond.op, tuple(_compile_condition(sub) for sub in cond.operands))
    return (cond.op, _compile_operand(cond.operands[0]), _compile_operand(cond.operands[1]))


def _compile_command(cmd: Command):
    kind = cmd.kind
    if kind in ("mov", "cascade", "remove"):
        return (kind,)
    if kind in ("spawn", "incr", "decr"):
        return (kind, cmd.args[0])
    if kind == "reward":
        return ("reward", cmd.args[0])
    if kind in ("add", "sub", "set"):
        return (kind, cmd.args[0], _compile_operand(cmd.args[1]))
    return (
        "if",
        tuple(_compile_condition(c) for c in cmd.conditions),
        tuple(_compile_command(c) for c in cmd.on_true),
        tuple(_compile_command(c) for c in cmd.on_false),
    )


class _CompiledBehaviour:
    __slots__ = ("dst_set", "preconditions", "src_commands", "dst_commands")

    def __init__(self, behaviour):
        self.dst_set = frozenset(behaviour.dst_objects)
        self.preconditions = tuple(_compile_condition(c) for c in behaviour.preconditions)
        self.src_commands = tuple(_compile_command(c) for c in behaviour.src_commands)
        self.dst_commands = tuple(_compile_command(c) for c in behaviour.dst_commands)


class _CompiledAction:
    __slots__ = ("name", "unary", "by_src")

    def __init__(self, action):
        self.name = action.name
        self.unary = action.input_mapping != DIRECTIONAL
        self.by_src: dict[str, list[_CompiledBehaviour]] = {}
        for behaviour in action.behaviours:
            self.by_src.setdefault(behaviour.src_object, []).append(_CompiledBehaviour(behaviour))


class CompiledGame:
    """Immutable preprocessed document shared across episodes."""

    __slots__ = (
        "document",
        "object_defs",
        "avatar_object",
        "actions",
        "action_space",
        "win_conditions",
        "lose_conditions",
        "max_steps",
        "autotile_objects",
    )

    def __init__(self, document: GdyDocument):
        self.document = document
        self.object_defs = document.objects_by_name()
        self.avatar_object = document.environment.avatar_object
        self.actions = {a.name: _CompiledAction(a) for a in document.actions}
        self.action_space = build_action_space(document)
        env = document.environment
        self.win_conditions = tuple(_compile_condition(c) for c in env.win_conditions)
        self.lose_conditions = tuple(_compile_condition(c) for c in env.lose_conditions)
        self.max_steps = env.max_steps
        self.autotile_objects = frozenset(
            o.name for o in document.objects if o.tile_spec().autotile
        )


def compile_game(document: GdyDocument) -> CompiledGame:
    return CompiledGame(document)


# -- state -------------------------------------------------------------------


class ObjectInstance:
    __slots__ = ("id", "object_name", "x", "y", "z", "orientation", "variables", "alive")

    def __init__(self, instance_id, object_name, x, y, z, orientation, variables):
        self.id = instance_id
        self.object_name = object_name
        self.x = x
        self.y = y
        self.z = z
        self.orientation = orientation
        self.variables = variables
        self.alive = True

    def __repr__(self):
        return f"<{self.object_name}#{self.id} at ({self.x}, {self.y}, {self.z})>"


class GameState:
    """Full mutable simulation state for one episode."""

    __slots__ = (
        "game",
        "width",
        "height",
        "instances",
        "cells",
        "counts",
        "player_variables",
        "step_count",
        "rng_state",
        "status",
        "accumulated_return",
        "avatar",
        "next_id",
    )

    def __init__(self, game: CompiledGame, width: int, height: int, seed: int):
        self.game = game
        self.width = width
        self.height = height
        self.instances: dict[int, ObjectInstance] = {}
        # Cell index is x + y * width; each stack is kept sorted by Z ascending.
        self.cells: dict[int, list[ObjectInstance]] = {}
        self.counts: dict[str, int] = {name: 0 for name in game.object_defs}
        self.player_variables = dict(game.document.environment.player_variables)
        self.step_count = 0
        self.rng_state = seed & 0xFFFFFFFFFFFFFFFF
        self.status = RUNNING
        self.accumulated_return = 0
        self.avatar: ObjectInstance | None = None
        self.next_id = 1

    def instances_at(self, x: int, y: int) -> tuple[ObjectInstance, ...]:
        """Z-ascending stack at a cell (empty tuple if none)."""
        return tuple(self.cells.get(x + y * self.width, ()))

    def clone(self) -> "GameState":
        """Independent deep copy; used by search and what-if probes."""
        other = GameState.__new__(GameState)
        other.game = self.game
        other.width = self.width
        other.height = self.height
        other.counts = dict(self.counts)
        other.player_variables = dict(self.player_variables)
        other.step_count = self.step_count
        other.rng_state = self.rng_state
        other.status = self.status
        other.accumulated_return = self.accumulated_return
        other.next_id = self.next_id
        other.instances = {}
        other.cells = {}
        other.avatar = None
        for inst_id, inst in self.instances.items():
            copy = ObjectInstance(
                inst_id, inst.object_name, inst.x, inst.y, inst.z, inst.orientation, dict(inst.variables)
            )
            other.instances[inst_id] = copy
            stack = other.cells.setdefault(inst.x + inst.y * self.width, [])
            i = len(stack)
            while i and stack[i - 1].z > copy.z:
                i -= 1
            stack.insert(i, copy)
            if self.avatar is inst:
                other.avatar = copy
        return other


def reset(document: GdyDocument | CompiledGame, layout: LevelLayout, seed: int) -> GameState:
    """Materialize a layout into a fresh running state."""
    game = document if isinstance(document, CompiledGame) else compile_game(document)
    avatar_placements = sum(1 for _, _, name in layout.placements if name == game.avatar_object)
    if avatar_placements == 0:
        raise MissingAvatarError(f"layout has no {game.avatar_object!r} placement")
    if avatar_placements > 1:
        raise MultipleAvatarsError(f"layout has {avatar_placements} {game.avatar_object!r} placements")

    state = GameState(game, layout.width, layout.height, seed)
    for x, y, name in layout.placements:
        obj = game.object_defs.get(name)
        if obj is None:
            raise KeyError(f"layout object {name!r} is not declared")
        inst = ObjectInstance(
            state.next_id, name, x, y, obj.z, DEFAULT_ORIENTATION, dict(obj.initial_variables)
        )
        state.next_id += 1
        state.instances[inst.id] = inst
        stack = state.cells.setdefault(x + y * layout.width, [])
        i = len(stack)
        while i and stack[i - 1].z > inst.z:
            i -= 1
        stack.insert(i, inst)
        state.counts[name] += 1
        if name == game.avatar_object:
            state.avatar = inst
    return state


# -- evaluation --------------------------------------------------------------


def _operand_value(operand, inst, state):
    tag = operand[0]
    if tag == "lit":
        return operand[1]
    if tag == "count":
        return state.counts.get(operand[1], 0)
    name = operand[1]
    if inst is not None:
        variables = inst.variables
        if name in variables:
            return variables[name]
    return state.player_variables.get(name, 0)


def _eval_condition(cond, inst, state) -> bool:
    op = cond[0]
    if op == "and":
        return all(_eval_condition(sub, inst, state) for sub in cond[1])
    if op == "or":
        return any(_eval_condition(sub, inst, state) for sub in cond[1])
    a = _operand_value(cond[1], inst, state)
    b = _operand_value(cond[2], inst, state)
    if op == "eq":
        return a == b
    if op == "neq":
        return a != b
    if op == "lt":
        return a < b
    if op == "lte":
        return a <= b
    if op == "gt":
        return a > b
    return a >= b


def _eval_all(conditions, inst, state) -> bool:
    for cond in conditions:
        if not _eval_condition(cond, inst, state):
            return False
    return True


# -- mutation ----------------------------------------------------------------


def _try_move(state: GameState, inst: ObjectInstance, dest_x: int, dest_y: int) -> bool:
    """Move fails silently when a live instance with equal Z occupies the cell."""
    cells = state.cells
    key = dest_x + dest_y * state.width
    stack = cells.get(key)
    z = inst.z
    if stack:
        for other in stack:
            if other.z == z:
                return False
    old_key = inst.x + inst.y * state.width
    old_stack = cells[old_key]
    old_stack.remove(inst)
    if not old_stack:
        del cells[old_key]
    if stack is None:
        cells[key] = [inst]
    else:
        i = len(stack)
        while i and stack[i - 1].z > z:
            i -= 1
        stack.insert(i, inst)
    inst.x = dest_x
    inst.y = dest_y
    return True


def _remove_instance(state: GameState, inst: ObjectInstance) -> None:
    key = inst.x + inst.y * state.width
    stack = state.cells[key]
    stack.remove(inst)
    if not stack:
        del state.cells[key]
    del state.instances[inst.id]
    state.counts[inst.object_name] -= 1
    inst.alive = False
    if state.avatar is inst:
        state.avatar = None


def _spawn_instance(state: GameState, name: str, x: int, y: int) -> bool:
    if name == state.game.avatar_object and state.avatar is not None:
        return False  # at most one avatar instance
    obj = state.game.object_defs[name]
    key = x + y * state.width
    stack = state.cells.get(key)
    z = obj.z
    if stack:
        for other in stack:
            if other.z == z:
                return False
    inst = ObjectInstance(state.next_id, name, x, y, z, DEFAULT_ORIENTATION, dict(obj.initial_variables))
    state.next_id += 1
    state.instances[inst.id] = inst
    if stack is None:
        state.cells[key] = [inst]
    else:
        i = len(stack)
        while i and stack[i - 1].z > z:
            i -= 1
        stack.insert(i, inst)
    state.counts[name] += 1
    if name == state.game.avatar_object:
        state.avatar = inst
    return True


# -- dispatch ----------------------------------------------------------------


def _select(state: GameState, action_name: str, dx: int, dy: int, actor: ObjectInstance):
    """Resolution step: returns (behaviour, dst_instance, x, y) or None."""
    x = actor.x + dx
    y = actor.y + dy
    if x < 0 or y < 0 or x >= state.width or y >= state.height:
        return None
    stack = state.cells.get(x + y * state.width)
    if stack:
        dst_inst = stack[-1]
        dst_name = dst_inst.object_name
    else:
        dst_inst = None
        dst_name = EMPTY
    action = state.game.actions.get(action_name)
    if action is None:
        return None
    behaviours = action.by_src.get(actor.object_name)
    if not behaviours:
        return None
    for behaviour in behaviours:
        if dst_name in behaviour.dst_set and (
            not behaviour.preconditions or _eval_all(behaviour.preconditions, actor, state)
        ):
            return behaviour, dst_inst, x, y
    return None


def _dispatch(state, action_name, dx, dy, actor, rotate, depth, events) -> int:
    selected = _select(state, action_name, dx, dy, actor)
    if selected is None:
        return 0
    behaviour, dst_inst, x, y = selected
    if rotate:
        actor.orientation = _ORIENT_OF_DELTA[(dx, dy)]
    reward = _run_commands(
        behaviour.dst_commands, dst_inst, x, y, x, y, state, action_name, dx, dy, depth, events
    )
    reward += _run_commands(
        behaviour.src_commands, actor, actor.x, actor.y, x, y, state, action_name, dx, dy, depth, events
    )
    return reward


def _run_commands(cmds, inst, cell_x, cell_y, dest_x, dest_y, state, action_name, dx, dy, depth, events) -> int:
    reward = 0
    for cmd in cmds:
        kind = cmd[0]
        if kind == "mov":
            if inst is not None and inst.alive and _try_move(state, inst, dest_x, dest_y):
                events.append(("mov", inst.object_name, (dest_x, dest_y)))
        elif kind == "remove":
            if inst is not None and inst.alive:
                events.append(("remove", inst.object_name, (inst.x, inst.y)))
                _remove_instance(state, inst)
        elif kind == "spawn":
            if inst is not None and inst.alive:
                x, y = inst.x, inst.y
            else:
                x, y = cell_x, cell_y
            if _spawn_instance(state, cmd[1], x, y):
                events.append(("spawn", cmd[1], (x, y)))
        elif kind == "reward":
            reward += cmd[1]
            events.append(("reward", inst.object_name if inst is not None else EMPTY, (cell_x, cell_y)))
        elif kind == "cascade":
            if inst is not None and inst.alive:
                if depth >= MAX_CASCADE_DEPTH:
                    events.append(("cascade_overflow", inst.object_name, (inst.x, inst.y)))
                else:
                    events.append(("cascade", inst.object_name, (inst.x, inst.y)))
                    reward += _dispatch(state, action_name, dx, dy, inst, False, depth + 1, events)
        elif kind == "if":
            branch = cmd[2] if _eval_all(cmd[1], inst, state) else cmd[3]
            reward += _run_commands(
                branch, inst, cell_x, cell_y, dest_x, dest_y, state, action_name, dx, dy, depth, events
            )
        else:
            name = cmd[1]
            if inst is not None and name in inst.variables:
                target = inst.variables
            else:
                target = state.player_variables
            if kind == "add":
                target[name] = target.get(name, 0) + _operand_value(cmd[2], inst, state)
            elif kind == "sub":
                target[name] = target.get(name, 0) - _operand_value(cmd[2], inst, state)
            elif kind == "set":
                target[name] = _operand_value(cmd[2], inst, state)
            elif kind == "incr":
                target[name] = target.get(name, 0) + 1
            else:
                target[name] = target.get(name, 0) - 1
            events.append((kind, inst.object_name if inst is not None else EMPTY, (cell_x, cell_y)))
    return reward


# -- public stepping ---------------------------------------------------------


def step(state: GameState, action_id: int) -> StepResult:
    """Advance one step; see the module docstring for the resolution order."""
    if state.status != RUNNING:
        raise EpisodeOverError(f"episode is over (status {state.status!r})")
    try:
        action_id = operator.index(action_id)
    except TypeError:
        raise BadActionError(f"action id must be an integer, got {type(action_id).__name__}") from None
    entries = state.game.action_space.entries
    if not 0 <= action_id < len(entries):
        raise BadActionError(f"action id {action_id} outside [0, {len(entries)})")

    events: list = []
    reward = 0
    if action_id:
        entry = entries[action_id]
        avatar = state.avatar
        if avatar is not None:
            if entry.delta is not None:
                dx, dy = entry.delta
                rotate = True
            else:
                dx, dy = DELTAS[avatar.orientation]
                rotate = False
            reward = _dispatch(state, entry.action, dx, dy, avatar, rotate, 0, events)

    state.step_count += 1
    terminated = False
    if state.game.win_conditions and any(
        _eval_condition(c, None, state) for c in state.game.win_conditions
    ):
        state.status = WIN
        terminated = True
    elif state.game.lose_conditions and any(
        _eval_condition(c, None, state) for c in state.game.lose_conditions
    ):
        state.status = LOSE
        terminated = True
    truncated = False
    if not terminated:
        max_steps = state.game.max_steps
        if max_steps is not None and state.step_count >= max_steps:
            state.status = TRUNCATED
            truncated = True
    if reward:
        state.accumulated_return += reward
    return StepResult(reward, terminated, truncated, tuple(events), dict(state.player_variables))


def valid_action_mask(state: GameState) -> list[bool]:
    """Bit per action id: would resolution select a behaviour right now?

    The no-op is always valid on a running state.  Masked-out actions, if
    stepped anyway, change nothing but the step counter.
    """
    entries = state.game.action_space.entries
    mask = [False] * len(entries)
    if state.status != RUNNING:
        return mask
    mask[0] = True
    avatar = state.avatar
    if avatar is None:
        return mask
    facing = DELTAS[avatar.orientation]
    for entry in entries[1:]:
        dx, dy = entry.delta if entry.delta is not None else facing
        mask[entry.id] = _select(state, entry.action, dx, dy, avatar) is not None
    return mask


def state_hash(state: GameState) -> int:
    """FNV-1a 64 over the canonical state text.

    Instances sorted by (y, x, z, name), each rendered as
    ``name,x,y,z,orientation,{sorted vars}``, then sorted player variables,
    then step counter and status.
    """
    parts = []
    for inst in sorted(state.instances.values(), key=lambda i: (i.y, i.x, i.z, i.object_name)):
        if inst.variables:
            var_part = ";".join(f"{k}={v}" for k, v in sorted(inst.variables.items()))
        else:
            var_part = ""
        parts.append(f"{inst.object_name},{inst.x},{inst.y},{inst.z},{inst.orientation},{{{var_part}}}")
    player_part = ";".join(f"{k}={v}" for k, v in sorted(state.player_variables.items()))
    text = "|".join(parts) + f"#{{{player_part}}}#{state.step_count}#{state.status}"
    return fnv1a64(text.encode("utf-8"))


def state_hash_hex(state: GameState) -> str:
    return f"{state_hash(state):016x}"
