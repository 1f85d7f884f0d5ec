"""Prompting: automated tight bounding boxes for training, click prompts for
live operation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..env.scene import SceneState
from .camera import HIT_OBJECT, CameraModel, raycast_scan
from .tracker import TRACKING, FailureParams, TrackerState, make_tracker


class TargetNotVisible(RuntimeError):
    """Raised at reset time when no ray sees the target; the caller should
    re-randomize the scene."""


class ClickRejected(ValueError):
    """Click did not land on an object within tolerance."""


@dataclass(frozen=True)
class PromptSpec:
    kind: str  # auto_box | click | box
    ray_lo: int
    ray_hi: int
    depth_lo: float
    depth_hi: float

    def __post_init__(self):
        if self.ray_hi < self.ray_lo or self.depth_hi < self.depth_lo:
            raise ValueError("empty prompt box")


def auto_prompt(
    state: SceneState,
    camera: CameraModel,
    params: FailureParams,
    seed: int,
    env_index: int = 0,
) -> tuple[PromptSpec, TrackerState]:
    """Tight image-space box over the rays currently hitting the target, plus
    a tracker started in TRACKING."""
    scan = raycast_scan(state, camera)
    rays = scan.rays_hitting(state.target().id)
    if rays.size == 0:
        raise TargetNotVisible("target not visible from the camera at prompt time")
    depths = scan.t[rays]
    prompt = PromptSpec(
        kind="auto_box",
        ray_lo=int(rays.min()),
        ray_hi=int(rays.max()),
        depth_lo=float(depths.min()),
        depth_hi=float(depths.max()),
    )
    tracker = make_tracker(params, seed, env_index)
    tracker.mode = TRACKING
    tracker.initialized = True
    return prompt, tracker


def click_prompt(
    state: SceneState,
    camera: CameraModel,
    ray_index: int,
    depth: float,
    params: FailureParams,
    seed: int,
    env_index: int = 0,
    depth_tolerance: float = 0.08,
) -> tuple[int, TrackerState]:
    """Retarget the scene to the object under the clicked (ray, depth); the
    tracker restarts in TRACKING on it. Rejects clicks on walls or empty
    space without touching the scene."""
    if not 0 <= ray_index < camera.n_rays:
        raise ClickRejected(f"ray index {ray_index} outside [0, {camera.n_rays})")
    scan = raycast_scan(state, camera)
    if scan.kind[ray_index] != HIT_OBJECT:
        raise ClickRejected("click hit no object")
    if abs(float(scan.t[ray_index]) - depth) > depth_tolerance:
        raise ClickRejected(
            f"click depth {depth:.3f} is {abs(float(scan.t[ray_index]) - depth):.3f} m from the surface"
        )
    oid = int(scan.obj[ray_index])
    state.set_target(oid)
    tracker = make_tracker(params, seed, env_index)
    tracker.mode = TRACKING
    tracker.initialized = True
    return oid, tracker
