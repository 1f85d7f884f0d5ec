"""Detection-frame rendering: target flags by tracker mode, independent flag
flips, and the counterfactual visibility measure."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..env.scene import SceneState
from .camera import HIT_OBJECT, CameraModel, ScanResult, raycast_scan
from .tracker import LOST, MISTRACK, TRACKING, TrackerState, advance_tracker


@dataclass
class DetectionFrame:
    points: np.ndarray  # (K, 4): x, y, z, target-flag in {0,1}
    visibility: float  # diagnostic only; never part of the student observation

    @property
    def n_points(self) -> int:
        return self.points.shape[0]

    def to_lists(self) -> list[list[float]]:
        return [[float(a) for a in row] for row in self.points]


def visibility(state: SceneState, camera: CameraModel, scan: ScanResult | None = None) -> float:
    """Fraction of the target's unobstructed rays that actually see it."""
    scan = scan or raycast_scan(state, camera)
    tid = state.target().id
    clear = raycast_scan(state, camera, only_object=tid)
    denom = clear.rays_hitting(tid).size
    if denom == 0:
        return 0.0
    return scan.rays_hitting(tid).size / denom


def render_detection(
    state: SceneState,
    tracker: TrackerState,
    camera: CameraModel,
    scan: ScanResult | None = None,
) -> DetectionFrame:
    """Point cloud with flags for the tracked object under the current mode;
    each flag then flips independently with probability p_flip."""
    if not tracker.initialized:
        raise RuntimeError("tracker was never initialized by a prompt")
    scan = scan or raycast_scan(state, camera)
    k = scan.points.shape[0]
    flags = np.zeros(k)
    if tracker.mode == TRACKING:
        flags[scan.rays_hitting(state.target().id)] = 1.0
    elif tracker.mode == MISTRACK:
        flags[scan.rays_hitting(tracker.mistrack_id)] = 1.0
    # LOST: all zeros
    p_flip = tracker.params.p_flip
    if p_flip > 0.0:
        flips = tracker.rng.random(k) < p_flip
        flags = np.where(flips, 1.0 - flags, flags)
    v = visibility(state, camera, scan)
    return DetectionFrame(points=np.concatenate([scan.points, flags[:, None]], axis=1), visibility=v)


def mistrack_candidates(
    state: SceneState, camera: CameraModel, scan: ScanResult
) -> tuple[list[tuple[int, float]], float]:
    """Visible non-target objects as (id, mean hit ray index) plus the
    target's own image position."""
    tid = state.target().id
    cands = []
    for obj in state.objects:
        if obj.id == tid:
            continue
        rays = scan.rays_hitting(obj.id)
        if rays.size:
            cands.append((obj.id, float(rays.mean())))
    target_rays = scan.rays_hitting(tid)
    if target_rays.size:
        target_pos = float(target_rays.mean())
    else:
        target_pos = float(camera.ray_index_of(state.target().centroid()))
    return cands, target_pos


def sense(
    state: SceneState, tracker: TrackerState, camera: CameraModel
) -> tuple[DetectionFrame, TrackerState]:
    """One perception tick: scan, advance the failure chain with the current
    visibility, then render flags under the new mode."""
    scan = raycast_scan(state, camera)
    v = visibility(state, camera, scan)
    cands, target_pos = mistrack_candidates(state, camera, scan)
    tracker = advance_tracker(tracker, v, cands, target_pos)
    frame = render_detection(state, tracker, camera, scan)
    return frame, tracker


def batch_sense(
    states: list[SceneState], trackers: list[TrackerState], camera: CameraModel
) -> tuple[list[DetectionFrame], list[TrackerState]]:
    """Per-env sense over a batch; rng streams stay per-env and independent."""
    if len(states) != len(trackers):
        raise ValueError(f"batch length mismatch: {len(states)} states vs {len(trackers)} trackers")
    frames = []
    out_trackers = []
    for state, tracker in zip(states, trackers):
        frame, tracker = sense(state, tracker, camera)
        frames.append(frame)
        out_trackers.append(tracker)
    return frames, out_trackers
