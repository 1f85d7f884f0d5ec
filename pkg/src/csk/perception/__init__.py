from .camera import HIT_NONE, HIT_OBJECT, HIT_WALL, CameraModel, ScanResult, raycast_scan
from .detection import DetectionFrame, batch_sense, mistrack_candidates, render_detection, sense, visibility
from .prompts import ClickRejected, PromptSpec, TargetNotVisible, auto_prompt, click_prompt
from .tracker import (
    LOST,
    MISTRACK,
    MODES,
    TRACKING,
    FailureParams,
    TrackerState,
    advance_tracker,
    make_tracker,
    transition_matrix,
)

__all__ = [
    "CameraModel",
    "ClickRejected",
    "DetectionFrame",
    "FailureParams",
    "HIT_NONE",
    "HIT_OBJECT",
    "HIT_WALL",
    "LOST",
    "MISTRACK",
    "MODES",
    "PromptSpec",
    "ScanResult",
    "TRACKING",
    "TargetNotVisible",
    "TrackerState",
    "advance_tracker",
    "auto_prompt",
    "batch_sense",
    "click_prompt",
    "make_tracker",
    "mistrack_candidates",
    "raycast_scan",
    "render_detection",
    "sense",
    "transition_matrix",
    "visibility",
]
