from __future__ import annotations

import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from gridforge import trajectory
from gridforge.cli import main
from gridforge.levels import LevelRef

from conftest import asset_path

PUSH_GDY = """
Environment:
  Name: push_row
  Player:
    AvatarObject: avatar
  Termination:
    Win:
      - eq: [box:count, 0]
  Levels:
    - |
      hbA
Actions:
  - Name: move
    Behaviours:
      - Src:
          Object: avatar
          Commands:
            - mov: _dest
        Dst:
          Object: [_empty, hole]
      - Src:
          Object: box
          Commands:
            - mov: _dest
        Dst:
          Object: _empty
      - Src:
          Object: avatar
          Commands:
            - mov: _dest
        Dst:
          Object: box
          Commands:
            - cascade: _dest
      - Src:
          Object: box
          Commands:
            - remove: true
            - reward: 1
        Dst:
          Object: hole
Objects:
  - Name: avatar
    Z: 2
    MapCharacter: A
  - Name: box
    Z: 2
    MapCharacter: b
  - Name: hole
    Z: 1
    MapCharacter: h
"""


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def push_gdy(tmp_path):
    path = tmp_path / "push.gdy"
    path.write_text(PUSH_GDY, "utf-8")
    return str(path)


class TestValidate:
    def test_bundled_sokoban_is_valid(self, runner):
        result = runner.invoke(main, ["validate", asset_path("sokoban")])
        assert result.exit_code == 0
        assert json.loads(result.output) == []

    def test_unknown_dst_object(self, runner, tmp_path):
        bad = PUSH_GDY.replace("Object: [_empty, hole]", "Object: ghost")
        path = tmp_path / "bad.gdy"
        path.write_text(bad, "utf-8")
        result = runner.invoke(main, ["validate", str(path)])
        assert result.exit_code == 1
        diagnostics = json.loads(result.output)
        assert len(diagnostics) == 1
        assert diagnostics[0]["code"] == "UNDECLARED_OBJECT"

    def test_syntax_error(self, runner, tmp_path):
        path = tmp_path / "broken.gdy"
        path.write_text("Environment: [", "utf-8")
        result = runner.invoke(main, ["validate", str(path)])
        assert result.exit_code == 1
        assert json.loads(result.output)[0]["code"] == "SYNTAX"

    def test_missing_file_is_io_error(self, runner):
        result = runner.invoke(main, ["validate", "/nonexistent/x.gdy"])
        assert result.exit_code == 2


class TestReplay:
    def make_record(self, sokoban, tmp_path, **edits) -> str:
        record = trajectory.record(sokoban, LevelRef(string="hbA"), seed=7, actions=[1])
        data = trajectory.as_dict(record)
        data.update(edits)
        path = tmp_path / "traj.json"
        path.write_text(json.dumps(data), "utf-8")
        return str(path)

    def test_verified_replay(self, runner, sokoban, tmp_path):
        traj = self.make_record(sokoban, tmp_path)
        result = runner.invoke(main, ["replay", asset_path("sokoban"), traj, "--verify"])
        assert result.exit_code == 0
        report = json.loads(result.output)
        assert report["total_reward"] == 1
        assert report["status"] == "win"
        assert report["verified"] is True

    def test_tampered_hash_fails_verification(self, runner, sokoban, tmp_path):
        traj = self.make_record(sokoban, tmp_path, final_hash="0" * 16)
        result = runner.invoke(main, ["replay", asset_path("sokoban"), traj, "--verify"])
        assert result.exit_code == 3
        assert json.loads(result.output)["verified"] is False

    def test_wrong_document_hash(self, runner, sokoban, tmp_path):
        traj = self.make_record(sokoban, tmp_path, gdy_hash="f" * 16)
        result = runner.invoke(main, ["replay", asset_path("sokoban"), traj])
        assert result.exit_code == 4

    def test_bad_trajectory_json(self, runner, tmp_path):
        path = tmp_path / "traj.json"
        path.write_text("{}", "utf-8")
        result = runner.invoke(main, ["replay", asset_path("sokoban"), str(path)])
        assert result.exit_code == 1


class TestPlay:
    def test_scripted_push_wins(self, runner, push_gdy):
        result = runner.invoke(main, ["play", push_gdy], input="aq")
        assert result.exit_code == 0
        assert "reward 1" in result.output
        assert "episode finished: win" in result.output

    def test_key_help_lists_bindings(self, runner, push_gdy):
        result = runner.invoke(main, ["play", push_gdy], input="pq")
        for line in (" A  Move Left", " D  Move Right", " S  Move Down", " W  Move Up"):
            assert line in result.output

    def test_variable_inspector(self, runner, push_gdy):
        result = runner.invoke(main, ["play", push_gdy], input="iq")
        assert "box:count = 1" in result.output

    def test_quit_cleanly(self, runner, push_gdy):
        assert runner.invoke(main, ["play", push_gdy], input="q").exit_code == 0

    def test_recording_writes_verified_trajectory(self, runner, push_gdy, tmp_path):
        out = tmp_path / "rec.json"
        result = runner.invoke(main, ["play", push_gdy, "--record", str(out)], input="raq")
        assert result.exit_code == 0
        assert out.exists()
        replay = runner.invoke(main, ["replay", push_gdy, str(out), "--verify"])
        assert replay.exit_code == 0
        assert json.loads(replay.output)["total_reward"] == 1


class TestGenerate:
    def test_writes_levels_and_manifest(self, runner, tmp_path):
        out = tmp_path / "levels"
        result = runner.invoke(
            main, ["generate", "--seed", "9", "--count", "3", "--out", str(out)]
        )
        assert result.exit_code == 0
        files = sorted(p.name for p in out.iterdir())
        assert files == ["level_000.txt", "level_001.txt", "level_002.txt", "manifest.json"]
        manifest = json.loads((out / "manifest.json").read_text())
        assert len(manifest["levels"]) == 3
        for entry in manifest["levels"]:
            level = (out / entry["file"]).read_text()
            assert level.count("c") == 1
            assert level.count("A") == 1

    def test_same_seed_identical_files(self, runner, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        for out in (a, b):
            assert runner.invoke(
                main, ["generate", "--seed", "4", "--count", "2", "--out", str(out)]
            ).exit_code == 0
        for name in ("level_000.txt", "level_001.txt", "manifest.json"):
            assert (a / name).read_bytes() == (b / name).read_bytes()

    def test_tiny_grid_unsatisfiable(self, runner, tmp_path):
        result = runner.invoke(
            main, ["generate", "--width", "4", "--out", str(tmp_path / "x")]
        )
        assert result.exit_code == 1

    def test_threshold_flags_change_terrain(self, runner, tmp_path):
        # Flooding the map with water leaves nothing to stand on.
        result = runner.invoke(
            main,
            ["generate", "--water-threshold", "0.99", "--tree-threshold", "0.99",
             "--stone-threshold", "0.99", "--lava-threshold", "0.99",
             "--out", str(tmp_path / "wet")],
        )
        assert result.exit_code == 1
        dry = runner.invoke(
            main,
            ["generate", "--water-threshold", "0.0", "--tree-threshold", "0.3",
             "--out", str(tmp_path / "dry")],
        )
        assert dry.exit_code == 0
        level = (tmp_path / "dry" / "level_000.txt").read_text()
        assert "w" not in level.replace("\n", "")[24:-24]  # interior has no water


class TestRollout:
    def test_noop_on_escape_room_truncates_at_500(self, runner):
        result = runner.invoke(
            main,
            ["rollout", asset_path("escape_room"), "--episodes", "2", "--policy", "noop"],
        )
        assert result.exit_code == 0
        stats = json.loads(result.output)
        assert stats["mean_length"] == 500.0
        assert stats["solve_rate"] == 0.0
        assert len(stats["episode_seeds"]) == 2

    def test_random_solves_trivial_level(self, runner, push_gdy):
        result = runner.invoke(
            main,
            ["rollout", push_gdy, "--episodes", "50", "--seed", "1", "--max-steps", "30"],
        )
        stats = json.loads(result.output)
        assert stats["solve_rate"] > 0

    def test_zero_episodes(self, runner, push_gdy):
        result = runner.invoke(main, ["rollout", push_gdy, "--episodes", "0"])
        assert result.exit_code == 0
        stats = json.loads(result.output)
        assert stats["episodes"] == 0
        assert stats["mean_reward"] is None

    def test_stats_deterministic_given_seed(self, runner, push_gdy):
        args = ["rollout", push_gdy, "--episodes", "20", "--seed", "8", "--max-steps", "25"]
        assert runner.invoke(main, args).output == runner.invoke(main, args).output

    def test_bench_mode_reports_rate(self, runner):
        result = runner.invoke(
            main, ["rollout", asset_path("sokoban"), "--bench", "--bench-steps", "2000"]
        )
        assert result.exit_code == 0
        report = json.loads(result.output)
        assert report["steps"] == 2000
        assert report["steps_per_second"] > 0


class TestServe:
    def test_port_comes_from_environment(self, runner, monkeypatch):
        import uvicorn

        calls = {}
        monkeypatch.setattr(uvicorn, "run", lambda app, **kw: calls.update(kw))
        result = runner.invoke(main, ["serve"], env={"GRIDFORGE_PORT": "9123"})
        assert result.exit_code == 0
        assert calls["port"] == 9123

    def test_default_port(self, runner, monkeypatch):
        import uvicorn

        calls = {}
        monkeypatch.setattr(uvicorn, "run", lambda app, **kw: calls.update(kw))
        assert runner.invoke(main, ["serve"]).exit_code == 0
        assert calls["port"] == 8877
