"""Episodic environment facade: make/reset/step/observe plus a batch wrapper.

Observations default to the Vector observer; ``observer`` may be one of
``vector``, ``ascii``, ``entity``, or ``none`` (skip observation building,
useful for benchmarks and search).
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

from gridforge import engine, observers
from gridforge.errors import EpisodeOverError
from gridforge.hashing import mix_seed
from gridforge.levels import LevelRef, resolve_level
from gridforge.model import GdyDocument

OBSERVERS = ("vector", "ascii", "entity", "none")


@dataclass(frozen=True)
class ResetOptions:
    level: LevelRef = LevelRef(index=0)
    seed: int = 0


def derive_seed(base_seed: int, instance: int, episode: int = 0) -> int:
    """Per-instance, per-episode seed stream used by the batch wrapper."""
    return mix_seed(mix_seed(base_seed, instance), episode)


class GridEnv:
    """Single-environment handle; episodes are explicit (no autoreset)."""

    def __init__(self, document: GdyDocument, observer: str = "vector"):
        if observer not in OBSERVERS:
            raise ValueError(f"observer must be one of {OBSERVERS}")
        self.document = document
        self.observer = observer
        self.game = engine.compile_game(document)
        self.observer_config = document.environment.observer_config
        self.state: engine.GameState | None = None
        self.episode = 0
        self.last_options: ResetOptions | None = None

    @property
    def action_space(self) -> engine.ActionSpace:
        return self.game.action_space

    def observation_shape(self) -> tuple[int, int, int] | None:
        """(height, width, channels) before the first reset, when known."""
        if self.observer != "vector":
            return None
        channels = len(observers.channel_layout(self.document, self.observer_config))
        window = self.observer_config.window
        if window is not None:
            return (window[1], window[0], channels)
        levels = self.document.environment.levels
        if levels:
            lines = levels[0].split("\n")
            return (len(lines), max(len(line) for line in lines), channels)
        return None

    def _observe(self):
        if self.observer == "vector":
            return observers.vector_obs(self.state, self.observer_config).tensor
        if self.observer == "ascii":
            return observers.ascii_obs(self.state)
        if self.observer == "entity":
            return observers.entity_obs(self.state, self.observer_config)
        return None

    def _info(self) -> dict:
        return {
            "variables": dict(self.state.player_variables),
            "mask": engine.valid_action_mask(self.state),
        }

    def reset(self, options: ResetOptions | None = None):
        options = options or ResetOptions()
        layout, _ = resolve_level(self.document, options.level)
        self.state = engine.reset(self.game, layout, options.seed)
        self.last_options = options
        self.episode += 1
        return self._observe(), self._info()

    def step(self, action_id: int):
        if self.state is None:
            raise EpisodeOverError("reset the environment before stepping")
        result = engine.step(self.state, action_id)
        info = self._info()
        return self._observe(), result.reward, result.terminated, result.truncated, info


class VectorGridEnv:
    """Fixed batch of independent instances with per-instance autoreset.

    The terminal observation is returned with the terminal step; the next
    step call resets that instance (its action is ignored) and returns the
    fresh observation with zero reward.  Results always come back in
    instance order.
    """

    def __init__(self, document: GdyDocument, n: int, observer: str = "vector"):
        if n < 1:
            raise ValueError("need at least one instance")
        self.n = n
        self.envs = [GridEnv(document, observer) for _ in range(n)]
        self.base_options: ResetOptions | None = None
        self.episodes = [0] * n
        self.pending_reset = [False] * n

    def _instance_options(self, index: int) -> ResetOptions:
        base = self.base_options
        seed = derive_seed(base.seed, index, self.episodes[index])
        level = base.level
        if level.generator is not None:
            level = LevelRef(generator=dataclasses.replace(level.generator, seed=seed))
        return ResetOptions(level=level, seed=seed)

    def reset(self, options: ResetOptions | None = None):
        self.base_options = options or ResetOptions()
        self.episodes = [0] * self.n
        self.pending_reset = [False] * self.n
        observations, infos = [], []
        for i, env in enumerate(self.envs):
            obs, info = env.reset(self._instance_options(i))
            observations.append(obs)
            infos.append(info)
        return observations, infos

    def step(self, actions):
        if self.base_options is None:
            raise EpisodeOverError("reset the batch before stepping")
        if len(actions) != self.n:
            raise ValueError(f"expected {self.n} actions, got {len(actions)}")
        observations, rewards, terminateds, truncateds, infos = [], [], [], [], []
        for i, (env, action) in enumerate(zip(self.envs, actions)):
            try:
                if self.pending_reset[i]:
                    self.pending_reset[i] = False
                    self.episodes[i] += 1
                    obs, info = env.reset(self._instance_options(i))
                    reward, terminated, truncated = 0, False, False
                else:
                    obs, reward, terminated, truncated, info = env.step(action)
                    if terminated or truncated:
                        self.pending_reset[i] = True
            except Exception as exc:
                exc.args = (f"instance {i}: {exc}",) + exc.args[1:]
                raise
            observations.append(obs)
            rewards.append(reward)
            terminateds.append(terminated)
            truncateds.append(truncated)
            infos.append(info)
        return observations, rewards, terminateds, truncateds, infos


def make(document: GdyDocument, observer: str = "vector") -> GridEnv:
    return GridEnv(document, observer)


def vector_make(document: GdyDocument, n: int, observer: str = "vector") -> VectorGridEnv:
    return VectorGridEnv(document, n, observer)
