"""Hypothesis strategies generating valid-by-construction GDY documents."""

from __future__ import annotations

from hypothesis import strategies as st

from gridforge.model import (
    ActionDef,
    Behaviour,
    Command,
    Condition,
    EnvironmentDef,
    GdyDocument,
    ObjectDef,
    ObserverConfig,
    TileSpec,
)

_NAMES = ("anchor", "beacon", "crate", "digger", "ember")
_CHARS = "XZKMPRU"
_PLAYER_VARS = ("score", "keys")
_OBJECT_VARS = ("hp", "fuel")


@st.composite
def documents(draw) -> GdyDocument:
    n_objects = draw(st.integers(1, 4))
    objects = []
    for i in range(n_objects):
        variables = {}
        if draw(st.booleans()):
            variables[draw(st.sampled_from(_OBJECT_VARS))] = draw(st.integers(-3, 3))
        objects.append(
            ObjectDef(
                name=_NAMES[i],
                map_character=_CHARS[i],
                z=draw(st.integers(0, 2)),
                initial_variables=variables,
                tile=TileSpec(_NAMES[i], autotile=draw(st.booleans())),
            )
        )
    object_names = [o.name for o in objects]
    avatar = object_names[0]

    player_variables = {}
    for name in _PLAYER_VARS:
        if draw(st.booleans()):
            player_variables[name] = draw(st.integers(0, 2))
    player_var_names = list(player_variables)

    def condition(_draw) -> Condition:
        op = _draw(st.sampled_from(("eq", "neq", "lt", "lte", "gt", "gte")))
        if player_var_names and _draw(st.booleans()):
            left = _draw(st.sampled_from(player_var_names))
        else:
            left = _draw(st.sampled_from(object_names)) + ":count"
        return Condition(op, (left, _draw(st.integers(0, 3))))

    def commands(_draw, depth: int = 0) -> tuple[Command, ...]:
        out = []
        for _ in range(_draw(st.integers(0, 2))):
            kind = _draw(
                st.sampled_from(("mov", "remove", "reward", "spawn", "add", "set", "incr", "if"))
            )
            if kind == "mov":
                out.append(Command("mov", ("_dest",)))
            elif kind == "remove":
                out.append(Command("remove"))
            elif kind == "reward":
                out.append(Command("reward", (_draw(st.integers(-2, 3)),)))
            elif kind == "spawn":
                out.append(Command("spawn", (_draw(st.sampled_from(object_names)),)))
            elif kind in ("add", "set") and player_var_names:
                out.append(
                    Command(
                        kind,
                        (_draw(st.sampled_from(player_var_names)), _draw(st.integers(-2, 3))),
                    )
                )
            elif kind == "incr" and player_var_names:
                out.append(Command("incr", (_draw(st.sampled_from(player_var_names)),)))
            elif kind == "if" and depth < 2:
                out.append(
                    Command(
                        "if",
                        conditions=(condition(_draw),),
                        on_true=commands(_draw, depth + 1),
                        on_false=commands(_draw, depth + 1),
                    )
                )
        return tuple(out)

    def behaviour(_draw) -> Behaviour:
        dst = _draw(
            st.lists(st.sampled_from(object_names + ["_empty"]), min_size=1, max_size=2, unique=True)
        )
        preconditions = (condition(_draw),) if _draw(st.booleans()) else ()
        return Behaviour(
            src_object=_draw(st.sampled_from(object_names)),
            dst_objects=tuple(dst),
            preconditions=preconditions,
            src_commands=commands(_draw),
            dst_commands=commands(_draw),
        )

    actions = []
    for i in range(draw(st.integers(0, 2))):
        actions.append(
            ActionDef(
                name=("push", "pull")[i],
                behaviours=tuple(behaviour(draw) for _ in range(draw(st.integers(1, 2)))),
                input_mapping=draw(st.sampled_from(("directional", "unary"))),
            )
        )

    # Level 0 always carries exactly one avatar so reset() is exercisable.
    width = draw(st.integers(2, 5))
    height = draw(st.integers(2, 4))
    fillers = st.sampled_from("." + _CHARS[1:n_objects] if n_objects > 1 else ".")
    grid = [[draw(fillers) for _ in range(width)] for _ in range(height)]
    ax = draw(st.integers(0, width - 1))
    ay = draw(st.integers(0, height - 1))
    grid[ay][ax] = _CHARS[0]
    levels = ["\n".join("".join(row) for row in grid)]

    win = (Condition("eq", (draw(st.sampled_from(object_names)) + ":count", 0)),) if draw(st.booleans()) else ()
    window = None
    if draw(st.booleans()):
        window = (draw(st.integers(1, 5)), draw(st.integers(1, 5)))

    environment = EnvironmentDef(
        name="generated",
        avatar_object=avatar,
        win_conditions=win,
        max_steps=draw(st.one_of(st.none(), st.integers(1, 50))),
        player_variables=player_variables,
        observer_config=ObserverConfig(
            window=window,
            rotate_with_avatar=draw(st.booleans()),
            include_orientation_channels=draw(st.booleans()),
            include_player_variable_channels=draw(st.booleans()),
        ),
        levels=tuple(levels),
    )
    return GdyDocument(environment=environment, actions=tuple(actions), objects=tuple(objects))
