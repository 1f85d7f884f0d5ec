from . import clutter, geometry
from .batch import BatchedEnv, StepRecord
from .clutter import (
    PRIVILEGED_DIM,
    PROPRIO_DIM,
    PlacementError,
    check_termination,
    compute_reward,
    goal_distance,
    grab_distance,
    heightmap,
    privileged_observation,
    proprio_observation,
    reset,
    step,
)
from .scene import ARENAS, TERMINATIONS, ContactReport, EnvConfig, GripperState, ObjectBody, SceneState, snapshot

__all__ = [
    "ARENAS",
    "BatchedEnv",
    "ContactReport",
    "EnvConfig",
    "GripperState",
    "ObjectBody",
    "PRIVILEGED_DIM",
    "PROPRIO_DIM",
    "PlacementError",
    "SceneState",
    "StepRecord",
    "TERMINATIONS",
    "check_termination",
    "clutter",
    "compute_reward",
    "geometry",
    "goal_distance",
    "grab_distance",
    "heightmap",
    "privileged_observation",
    "proprio_observation",
    "reset",
    "snapshot",
    "step",
]
