from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gridforge import engine
from gridforge.engine import (
    build_action_space,
    compile_game,
    reset,
    state_hash,
    step,
    valid_action_mask,
)
from gridforge.errors import (
    BadActionError,
    EpisodeOverError,
    MissingAvatarError,
    MultipleAvatarsError,
)
from gridforge.model import ActionDef, Behaviour, Command, EnvironmentDef, GdyDocument, ObjectDef
from gridforge.parser import parse_level

from conftest import SOKOBAN_LEVEL_1
from oracles import expected_mask, state_hash_reference, state_signature

# Golden value computed once with the reference canonical serialization
# (oracles.state_hash_reference) for the level-1 initial state, then pinned.
SOKOBAN_LEVEL_1_HASH = 0x1E2BBF26B5949535

MOVE_LEFT, MOVE_RIGHT, MOVE_DOWN, MOVE_UP = 1, 2, 3, 4


def fresh(document, level, seed=0):
    return reset(document, parse_level(document, level), seed)


def positions(state):
    """Board digest without orientation (selected-but-futile moves rotate)."""
    return (
        sorted((i.object_name, i.x, i.y, i.z) for i in state.instances.values()),
        sorted(state.player_variables.items()),
        dict(state.counts),
    )


class TestActionSpace:
    def test_sokoban_layout(self, sokoban):
        space = build_action_space(sokoban)
        assert space.labels() == ["No-Op", "Move Left", "Move Right", "Move Down", "Move Up"]
        assert [e.key for e in space.entries] == [None, "A", "D", "S", "W"]
        assert [e.delta for e in space.entries] == [(0, 0), (-1, 0), (1, 0), (0, 1), (0, -1)]
        assert [e.id for e in space.entries] == [0, 1, 2, 3, 4]

    def test_escape_room_flattened_action_space(self, escape_room):
        space = build_action_space(escape_room)
        assert space.labels() == [
            "No-Op",
            "Move Left",
            "Move Right",
            "Move Down",
            "Move Up",
            "Interact With Object",
            "Place Stone",
            "Place Table",
            "Place Furnace",
            "Make Wood Pickaxe",
            "Make Stone Pickaxe",
            "Make Iron Pickaxe",
        ]
        assert [e.key for e in space.entries] == [
            None, "A", "D", "S", "W", "E", "Q", "R", "T", "1", "2", "3",
        ]

    def test_zero_action_document(self):
        document = GdyDocument(
            environment=EnvironmentDef(name="x", avatar_object="dot"),
            actions=(),
            objects=(ObjectDef("dot", "D"),),
        )
        space = build_action_space(document)
        assert space.labels() == ["No-Op"]


class TestReset:
    def test_sokoban_level_1_counts(self, sokoban):
        state = fresh(sokoban, SOKOBAN_LEVEL_1)
        assert state.counts["box"] == 3
        assert state.counts["hole"] == 3
        assert state.counts["avatar"] == 1
        assert state.counts["wall"] == 30
        assert state.status == engine.RUNNING
        assert state.step_count == 0

    def test_identical_resets_hash_equal(self, sokoban):
        a = fresh(sokoban, SOKOBAN_LEVEL_1, seed=99)
        b = fresh(sokoban, SOKOBAN_LEVEL_1, seed=99)
        assert state_hash(a) == state_hash(b)

    def test_missing_avatar(self, sokoban):
        with pytest.raises(MissingAvatarError):
            fresh(sokoban, "hb")

    def test_multiple_avatars(self, sokoban):
        with pytest.raises(MultipleAvatarsError):
            fresh(sokoban, "AA")

    def test_golden_hash(self, sokoban):
        state = fresh(sokoban, SOKOBAN_LEVEL_1, seed=0)
        assert state_hash(state) == SOKOBAN_LEVEL_1_HASH
        assert state_hash(state) == state_hash_reference(state)


class TestPushMechanics:
    def test_box_pushed_into_hole(self, sokoban):
        state = fresh(sokoban, "hbA")
        result = step(state, MOVE_LEFT)
        assert result.reward == 1
        assert result.terminated and not result.truncated
        assert state.status == engine.WIN
        assert state.counts["box"] == 0
        assert (state.avatar.x, state.avatar.y) == (1, 0)
        # The hole stays: the push-into-hole behaviour removes only the box.
        assert state.counts["hole"] == 1
        kinds = [e[0] for e in result.events]
        assert kinds == ["cascade", "remove", "reward", "mov"]

    def test_box_pushed_into_empty(self, sokoban):
        state = fresh(sokoban, ".bA")
        result = step(state, MOVE_LEFT)
        assert result.reward == 0
        positions = {(i.object_name, i.x, i.y) for i in state.instances.values()}
        assert positions == {("box", 0, 0), ("avatar", 1, 0)}

    def test_push_blocked_by_wall(self, sokoban):
        state = fresh(sokoban, "wbA")
        before = positions(state)
        result = step(state, MOVE_LEFT)
        assert result.reward == 0
        assert positions(state) == before
        assert state.step_count == 1

    def test_push_blocked_by_second_box(self, sokoban):
        state = fresh(sokoban, ".bbA")
        before = positions(state)
        step(state, MOVE_LEFT)
        assert positions(state) == before

    def test_push_at_edge_fails(self, sokoban):
        state = fresh(sokoban, "bA")
        before = positions(state)
        step(state, MOVE_LEFT)
        assert positions(state) == before

    def test_avatar_walks_onto_hole(self, sokoban):
        state = fresh(sokoban, "hA")
        step(state, MOVE_LEFT)
        assert (state.avatar.x, state.avatar.y) == (0, 0)
        assert state.counts["hole"] == 1

    def test_noop_changes_only_step_count(self, sokoban):
        state = fresh(sokoban, SOKOBAN_LEVEL_1)
        before = state_signature(state)
        result = step(state, 0)
        assert result.reward == 0
        assert state_signature(state) == before
        assert state.step_count == 1
        # Hash still moves because the step counter is part of the canonical text.
        assert state_hash(state) != SOKOBAN_LEVEL_1_HASH

    def test_failed_move_does_not_rotate(self, sokoban):
        state = fresh(sokoban, "wA.b")  # the far box keeps the win condition unmet
        assert state.avatar.orientation == "down"
        step(state, MOVE_LEFT)  # into the wall: no behaviour selected
        assert state.avatar.orientation == "down"
        step(state, MOVE_RIGHT)  # onto empty: selected, rotates
        assert state.avatar.orientation == "right"


class TestStepErrors:
    def test_episode_over(self, sokoban):
        state = fresh(sokoban, "hbA")
        step(state, MOVE_LEFT)
        with pytest.raises(EpisodeOverError):
            step(state, 0)

    def test_bad_action(self, sokoban):
        state = fresh(sokoban, "hbA")
        with pytest.raises(BadActionError):
            step(state, 99)
        with pytest.raises(BadActionError):
            step(state, -1)
        with pytest.raises(BadActionError):
            step(state, 1.5)


class TestMask:
    def test_sokoban_level_1_initial(self, sokoban):
        state = fresh(sokoban, SOKOBAN_LEVEL_1)
        mask = valid_action_mask(state)
        assert mask == expected_mask(sokoban, state)
        # Avatar at (4, 1): wall above, empty left/right, wall below.
        assert mask[0] is True
        assert mask[MOVE_UP] is False

    def test_push_is_legal(self, sokoban):
        state = fresh(sokoban, "hbA")
        mask = valid_action_mask(state)
        assert mask[MOVE_LEFT] is True
        assert mask[MOVE_RIGHT] is False  # out of bounds

    def test_matches_oracle_along_random_walk(self, sokoban, escape_room):
        for document, level in (
            (sokoban, SOKOBAN_LEVEL_1),
            (escape_room, escape_room.environment.levels[1]),
        ):
            state = fresh(document, level, seed=5)
            n = len(state.game.action_space.entries)
            rng_state = 12345
            for _ in range(120):
                if state.status != engine.RUNNING:
                    break
                assert valid_action_mask(state) == expected_mask(document, state)
                rng_state = (rng_state * 6364136223846793005 + 1442695040888963407) % (1 << 64)
                step(state, (rng_state >> 33) % n)

    def test_masked_out_actions_change_only_step_count(self, sokoban):
        state = fresh(sokoban, SOKOBAN_LEVEL_1)
        for _ in range(40):
            if state.status != engine.RUNNING:
                break
            mask = valid_action_mask(state)
            reference = state_signature(state)
            for action_id, valid in enumerate(mask):
                if valid:
                    continue
                probe = state.clone()
                step(probe, action_id)
                assert state_signature(probe) == reference
                assert probe.step_count == state.step_count + 1
            step(state, MOVE_LEFT)


class TestEvents:
    def test_conservation_audit(self, sokoban):
        state = fresh(sokoban, SOKOBAN_LEVEL_1, seed=3)
        rng = 777
        for _ in range(200):
            if state.status != engine.RUNNING:
                break
            before = len(state.instances)
            rng = (rng * 6364136223846793005 + 1442695040888963407) % (1 << 64)
            result = step(state, (rng >> 33) % 5)
            spawns = sum(1 for e in result.events if e[0] == "spawn")
            removes = sum(1 for e in result.events if e[0] == "remove")
            assert len(state.instances) == before + spawns - removes
            # Counters always equal the live-instance census.
            census: dict = {name: 0 for name in state.counts}
            for inst in state.instances.values():
                census[inst.object_name] += 1
            assert state.counts == census

    def test_cascade_depth_capped(self):
        # A self-cascading behaviour recurses until the depth cap trips.
        document = GdyDocument(
            environment=EnvironmentDef(name="loop", avatar_object="dot"),
            actions=(
                ActionDef(
                    "spin",
                    behaviours=(
                        Behaviour(
                            "dot",
                            ("wallish",),
                            dst_commands=(Command("cascade", ("_dest",)),),
                        ),
                        Behaviour(
                            "wallish",
                            ("wallish",),
                            dst_commands=(Command("cascade", ("_dest",)),),
                        ),
                    ),
                )
            ,),
            objects=(ObjectDef("dot", "D", z=1), ObjectDef("wallish", "W")),
        )
        state = fresh(document, "DWWWWWWWWWWWWWWWWWWWWWWWWWWWWWWWWWWWWWW")
        result = step(state, MOVE_RIGHT)
        assert any(e[0] == "cascade_overflow" for e in result.events)
        assert state.status == engine.RUNNING


class TestAccounting:
    def test_accumulated_return(self, sokoban):
        state = fresh(sokoban, "h.bA")
        total = 0
        total += step(state, MOVE_LEFT).reward  # push box to (1,0)
        total += step(state, MOVE_LEFT).reward  # push box into hole, win
        assert total == 1
        assert state.accumulated_return == 1
        assert state.status == engine.WIN

    def test_info_snapshot_is_copy(self, escape_room):
        state = fresh(escape_room, escape_room.environment.levels[0])
        result = step(state, 0)
        result.info["inv_wood"] = 99
        assert state.player_variables["inv_wood"] == 0


class TestDeterminism:
    @settings(max_examples=30, deadline=None)
    @given(st.lists(st.integers(0, 4), max_size=60), st.integers(0, 2**63 - 1))
    def test_sokoban_replay_identical(self, sokoban, actions, seed):
        game = compile_game(sokoban)
        layout = parse_level(sokoban, SOKOBAN_LEVEL_1)

        def run():
            state = reset(game, layout, seed)
            rewards = []
            for action in actions:
                if state.status != engine.RUNNING:
                    break
                rewards.append(step(state, action).reward)
            return rewards, state_hash(state)

        assert run() == run()

    def test_clone_is_independent(self, sokoban):
        state = fresh(sokoban, "hbA")
        copy = state.clone()
        assert state_hash(copy) == state_hash(state)
        step(copy, MOVE_LEFT)
        assert state.status == engine.RUNNING
        assert state_hash(copy) != state_hash(state)
        step(state, MOVE_LEFT)
        assert state_hash(copy) == state_hash(state)
