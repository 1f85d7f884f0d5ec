"""Stateful non-Markovian tracking-failure model: a three-mode chain
(TRACKING / LOST / MISTRACK) whose transition rates depend on how visible the
target currently is."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

TRACKING, LOST, MISTRACK = "TRACKING", "LOST", "MISTRACK"
MODES = (TRACKING, LOST, MISTRACK)


@dataclass
class FailureParams:
    p_lose_base: float = 0.01
    p_lose_occluded: float = 0.6
    p_recover: float = 0.5
    p_switch: float = 0.05
    p_flip: float = 0.02

    def p_lose(self, v: float) -> float:
        return self.p_lose_base + (self.p_lose_occluded - self.p_lose_base) * (1.0 - v)


@dataclass
class TrackerState:
    params: FailureParams
    rng: np.random.Generator
    mode: str = TRACKING
    mistrack_id: int | None = None
    initialized: bool = False

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")


def make_tracker(params: FailureParams, seed: int, env_index: int = 0) -> TrackerState:
    rng = np.random.default_rng(np.random.SeedSequence(entropy=(seed, env_index, "tracker")))
    return TrackerState(params=params, rng=rng)


def advance_tracker(
    tracker: TrackerState,
    v: float,
    mistrack_candidates: list[tuple[int, float]] | None = None,
    target_image_pos: float = 0.0,
) -> TrackerState:
    """One chain transition driven by visibility v in [0, 1].

    `mistrack_candidates` are (object id, image position) pairs for other
    currently visible objects; the nearest-in-image one is adopted when the
    chain switches. Mutates and returns the tracker. Consumes exactly one
    uniform draw per call.
    """
    if not 0.0 <= v <= 1.0:
        raise ValueError(f"visibility must be in [0,1], got {v}")
    p = tracker.params
    u = float(tracker.rng.random())
    if tracker.mode == TRACKING:
        p_lose = p.p_lose(v)
        p_switch = p.p_switch * (1.0 - v)
        if u < p_lose:
            tracker.mode = LOST
            tracker.mistrack_id = None
        elif u < p_lose + p_switch and mistrack_candidates:
            nearest = min(mistrack_candidates, key=lambda c: (abs(c[1] - target_image_pos), c[0]))
            tracker.mode = MISTRACK
            tracker.mistrack_id = nearest[0]
    else:
        if u < p.p_recover * v:
            tracker.mode = TRACKING
            tracker.mistrack_id = None
    return tracker


def transition_matrix(params: FailureParams, v: float, can_switch: bool = True) -> np.ndarray:
    """Row-stochastic matrix over (TRACKING, LOST, MISTRACK) at constant v."""
    pl = params.p_lose(v)
    ps = params.p_switch * (1.0 - v) if can_switch else 0.0
    pr = params.p_recover * v
    return np.array(
        [
            [1.0 - pl - ps, pl, ps],
            [pr, 1.0 - pr, 0.0],
            [pr, 0.0, 1.0 - pr],
        ]
    )
