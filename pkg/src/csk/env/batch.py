"""Batched environment wrapper: n independent scenes with deterministic
per-episode seeding and auto-reset."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import clutter
from .scene import EnvConfig, SceneState


@dataclass
class StepRecord:
    reward: float
    terms: dict
    termination: str  # "none" unless the episode ended this step
    flags: dict
    terminal_state: SceneState | None  # pre-reset state when terminated


class BatchedEnv:
    """n_envs independent scenes; episode seeds derive from
    (seed, env_index, episode_counter) so trajectories are reproducible."""

    def __init__(self, config: EnvConfig, seed: int | None = None):
        self.config = config
        self.seed = config.seed if seed is None else int(seed)
        self.episodes = [0] * config.n_envs
        self.states: list[SceneState] = [
            clutter.reset(config, self.seed, i, 0) for i in range(config.n_envs)
        ]

    @property
    def n_envs(self) -> int:
        return self.config.n_envs

    def reset_env(self, i: int) -> SceneState:
        self.episodes[i] += 1
        self.states[i] = clutter.reset(self.config, self.seed, i, self.episodes[i])
        return self.states[i]

    def step_all(self, actions: np.ndarray) -> list[StepRecord]:
        actions = np.asarray(actions)
        if actions.shape != (self.n_envs, 4):
            raise ValueError(f"expected actions ({self.n_envs}, 4), got {actions.shape}")
        records = []
        for i in range(self.n_envs):
            _, terms, total, termination, flags = clutter.step(self.states[i], actions[i], self.config)
            terminal_state = None
            if termination != "none":
                terminal_state = self.states[i]
                self.reset_env(i)
            records.append(StepRecord(total, terms, termination, flags, terminal_state))
        return records
