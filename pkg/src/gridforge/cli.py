"""Command-line tool: validate, replay, play, generate, rollout, serve.

Exit codes: 0 ok, 1 domain error, 2 IO error, 3 verification failure,
4 trajectory/document hash mismatch.
"""

from __future__ import annotations

import json
import sys
import time
from pathlib import Path

import click

from gridforge import engine, trajectory
from gridforge.assets import load as load_bundled
from gridforge.env import derive_seed
from gridforge.errors import (
    GdySyntaxError,
    GridforgeError,
    HashMismatchError,
    SchemaError,
    UnsatisfiableError,
)
from gridforge.hashing import SplitMix64
from gridforge.levelgen import GenParams, generate as generate_level, reachability_hint
from gridforge.levels import LevelRef, resolve_level
from gridforge.model import GdyDocument
from gridforge.observers import ascii_obs
from gridforge.parser import parse_gdy
from gridforge.server import DEFAULT_PORT, create_app

EXIT_DOMAIN = 1
EXIT_IO = 2
EXIT_VERIFY = 3
EXIT_HASH = 4


def _read_text(path: str) -> str:
    try:
        return Path(path).read_text("utf-8")
    except OSError as exc:
        click.echo(f"cannot read {path}: {exc}", err=True)
        raise SystemExit(EXIT_IO)


def _load_document(path: str) -> GdyDocument:
    text = _read_text(path)
    try:
        return parse_gdy(text)
    except (GdySyntaxError, SchemaError) as exc:
        click.echo(f"invalid GDY {path}: {exc}", err=True)
        raise SystemExit(EXIT_DOMAIN)


def _echo_json(data) -> None:
    click.echo(json.dumps(data, sort_keys=True))


@click.group()
def main():
    """Grid-world environment engine driven by GDY game descriptions."""


@main.command()
@click.argument("gdy_path")
def validate(gdy_path):
    """Check a GDY file; prints a diagnostics JSON array."""
    text = _read_text(gdy_path)
    try:
        parse_gdy(text)
    except GdySyntaxError as exc:
        _echo_json([{"severity": "error", "code": "SYNTAX", "path": "$", "message": str(exc)}])
        raise SystemExit(EXIT_DOMAIN)
    except SchemaError as exc:
        _echo_json(
            [
                {"severity": d.severity, "code": d.code, "path": d.path, "message": d.message}
                for d in exc.diagnostics
            ]
        )
        raise SystemExit(EXIT_DOMAIN)
    _echo_json([])


@main.command()
@click.argument("gdy_path")
@click.argument("trajectory_path")
@click.option("--verify", is_flag=True, help="Exit 3 unless the stored outcome matches.")
def replay(gdy_path, trajectory_path, verify):
    """Replay a recorded trajectory headlessly and report the outcome."""
    document = _load_document(gdy_path)
    try:
        record = trajectory.load(_read_text(trajectory_path))
    except SchemaError as exc:
        click.echo(f"bad trajectory: {exc}", err=True)
        raise SystemExit(EXIT_DOMAIN)
    try:
        report = trajectory.replay(document, record)
    except HashMismatchError as exc:
        click.echo(str(exc), err=True)
        raise SystemExit(EXIT_HASH)
    except GridforgeError as exc:
        click.echo(str(exc), err=True)
        raise SystemExit(EXIT_DOMAIN)
    _echo_json(
        {
            "total_reward": report.total_reward,
            "status": report.status,
            "final_hash": report.final_hash,
            "verified": report.verified,
        }
    )
    if verify and not report.verified:
        raise SystemExit(EXIT_VERIFY)


def _iter_keys(stream):
    """Yield single input characters; raw tty mode when interactive."""
    if stream.isatty():  # pragma: no cover - manual play only
        import termios
        import tty

        fd = stream.fileno()
        old = termios.tcgetattr(fd)
        try:
            tty.setcbreak(fd)
            while True:
                ch = stream.read(1)
                if not ch:
                    return
                yield ch
        finally:
            termios.tcsetattr(fd, termios.TCSADRAIN, old)
    else:
        while True:
            ch = stream.read(1)
            if not ch:
                return
            if not ch.isspace():
                yield ch


def _key_help(space: engine.ActionSpace) -> list[str]:
    lines = [f"  {entry.key or '-':>2}  {entry.label}" for entry in space.entries]
    lines.append("   P  key help    I  variables    R  toggle recording    Q  quit")
    return lines


@main.command()
@click.argument("gdy_path")
@click.option("--level", "level_index", default=0, show_default=True, help="Level index.")
@click.option("--seed", default=0, show_default=True)
@click.option("--record", "record_path", default="trajectory.json", show_default=True,
              help="Where R-toggled recordings are written.")
def play(gdy_path, level_index, seed, record_path):
    """Interactive terminal session with derived key bindings."""
    document = _load_document(gdy_path)
    game = engine.compile_game(document)
    level = LevelRef(index=level_index)
    try:
        layout, _ = resolve_level(document, level)
        state = engine.reset(game, layout, seed)
    except GridforgeError as exc:
        click.echo(str(exc), err=True)
        raise SystemExit(EXIT_DOMAIN)

    key_to_action = {e.key: e.id for e in game.action_space.entries if e.key}
    recorder: trajectory.Recorder | None = None
    total = 0

    def board() -> None:
        click.echo(ascii_obs(state))
        click.echo(f"step {state.step_count}  total reward {total}  status {state.status}")

    def save_recording() -> None:
        nonlocal recorder
        record = recorder.finish()
        try:
            Path(record_path).write_text(trajectory.save(record) + "\n", "utf-8")
        except OSError as exc:
            click.echo(f"cannot write {record_path}: {exc}", err=True)
        else:
            click.echo(f"recording saved to {record_path}")
        recorder = None

    click.echo(f"{document.environment.name}: press P for key help, Q to quit")
    board()
    for ch in _iter_keys(sys.stdin):
        key = ch.upper()
        if key == "Q":
            break
        if key == "P":
            for line in _key_help(game.action_space):
                click.echo(line)
            continue
        if key == "I":
            for name, value in sorted(state.player_variables.items()):
                click.echo(f"  {name} = {value}")
            for obj in document.objects:
                click.echo(f"  {obj.name}:count = {state.counts.get(obj.name, 0)}")
            continue
        if key == "R":
            if recorder is None:
                recorder = trajectory.Recorder(document, level, seed, game=game)
                state = recorder.state
                total = 0
                click.echo("recording: episode restarted")
                board()
            else:
                save_recording()
            continue
        action_id = key_to_action.get(key)
        if action_id is None:
            continue
        if state.status != engine.RUNNING:
            click.echo("episode over (Q quits, R records a fresh run)")
            continue
        result = recorder.step(action_id) if recorder else engine.step(state, action_id)
        total += result.reward
        board()
        if result.reward:
            click.echo(f"reward {result.reward}")
        if state.status != engine.RUNNING:
            click.echo(f"episode finished: {state.status} (total reward {total})")
            if recorder is not None:
                save_recording()
    if recorder is not None:
        save_recording()


@main.command()
@click.option("--seed", default=0, show_default=True)
@click.option("--width", default=24, show_default=True)
@click.option("--height", default=24, show_default=True)
@click.option("--count", default=1, show_default=True)
@click.option("--out", "out_dir", default="levels", show_default=True)
@click.option("--coal", default=4, show_default=True)
@click.option("--iron", default=2, show_default=True)
@click.option("--diamond", default=1, show_default=True)
@click.option("--water-threshold", default=GenParams().water_threshold, show_default=True)
@click.option("--tree-threshold", default=GenParams().tree_threshold, show_default=True)
@click.option("--stone-threshold", default=GenParams().stone_threshold, show_default=True)
@click.option("--lava-threshold", default=GenParams().lava_threshold, show_default=True)
def generate(seed, width, height, count, out_dir, coal, iron, diamond,
             water_threshold, tree_threshold, stone_threshold, lava_threshold):
    """Write procedurally generated level files plus a manifest."""
    document = load_bundled("escape_room")
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        click.echo(f"cannot create {out_dir}: {exc}", err=True)
        raise SystemExit(EXIT_IO)
    manifest = {"seed": seed, "width": width, "height": height, "count": count, "levels": []}
    for i in range(count):
        level_seed = derive_seed(seed, i)
        params = GenParams(
            width=width,
            height=height,
            seed=level_seed,
            water_threshold=water_threshold,
            tree_threshold=tree_threshold,
            stone_threshold=stone_threshold,
            lava_threshold=lava_threshold,
            ore_counts={"coal": coal, "iron": iron, "diamond": diamond},
        )
        try:
            level = generate_level(params)
        except UnsatisfiableError as exc:
            click.echo(f"level {i}: {exc}", err=True)
            raise SystemExit(EXIT_DOMAIN)
        name = f"level_{i:03d}.txt"
        (out / name).write_text(level + "\n", "utf-8")
        manifest["levels"].append(
            {"file": name, "seed": level_seed, "hint": reachability_hint(level, document)}
        )
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", "utf-8")
    click.echo(f"wrote {count} levels to {out_dir}")


@main.command()
@click.argument("gdy_path")
@click.option("--episodes", default=100, show_default=True)
@click.option("--policy", type=click.Choice(["random", "noop"]), default="random", show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--level", "level_index", default=0, show_default=True)
@click.option("--max-steps", default=500, show_default=True,
              help="Harness cap per episode (documents may truncate earlier).")
@click.option("--bench", is_flag=True, help="Measure raw stepping throughput instead.")
@click.option("--bench-steps", default=200_000, show_default=True)
def rollout(gdy_path, episodes, policy, seed, level_index, max_steps, bench, bench_steps):
    """Run scripted policies and print stats JSON (or a throughput report)."""
    document = _load_document(gdy_path)
    game = engine.compile_game(document)
    try:
        layout, _ = resolve_level(document, LevelRef(index=level_index))
    except GridforgeError as exc:
        click.echo(str(exc), err=True)
        raise SystemExit(EXIT_DOMAIN)
    n_actions = len(game.action_space.entries)

    if bench:
        rng = SplitMix64(seed)
        state = engine.reset(game, layout, seed)
        start = time.perf_counter()
        for _ in range(bench_steps):
            if state.status != engine.RUNNING:
                state = engine.reset(game, layout, rng.next_u64())
            engine.step(state, rng.randrange(n_actions))
        elapsed = time.perf_counter() - start
        _echo_json(
            {
                "steps": bench_steps,
                "seconds": round(elapsed, 4),
                "steps_per_second": round(bench_steps / elapsed, 1),
            }
        )
        return

    episode_seeds = []
    rewards = []
    lengths = []
    solves = 0
    for ep in range(episodes):
        ep_seed = derive_seed(seed, ep)
        episode_seeds.append(ep_seed)
        rng = SplitMix64(ep_seed)
        state = engine.reset(game, layout, ep_seed)
        total = 0
        steps = 0
        while state.status == engine.RUNNING and steps < max_steps:
            action = 0 if policy == "noop" else rng.randrange(n_actions)
            total += engine.step(state, action).reward
            steps += 1
        rewards.append(total)
        lengths.append(steps)
        if state.status == engine.WIN:
            solves += 1
    stats = {
        "episodes": episodes,
        "mean_reward": (sum(rewards) / episodes) if episodes else None,
        "mean_length": (sum(lengths) / episodes) if episodes else None,
        "solve_rate": (solves / episodes) if episodes else None,
        "episode_seeds": episode_seeds,
    }
    _echo_json(stats)


@main.command()
@click.option("--port", envvar="GRIDFORGE_PORT", default=DEFAULT_PORT, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
def serve(port, host):
    """Run the JSON service used by the web IDE."""
    import uvicorn

    uvicorn.run(create_app(), host=host, port=port, log_level="warning")


if __name__ == "__main__":
    main()
