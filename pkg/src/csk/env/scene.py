"""World-state containers for the 2.5-D clutter-retrieval environment."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import geometry

ARENAS = ("tabletop", "bin")
TERMINATIONS = ("none", "contact_arm", "contact_table", "timeout")


@dataclass
class EnvConfig:
    n_envs: int = 1
    n_objects: int = 3
    arena: str = "tabletop"
    alpha: float = 0.8
    dt: float = 0.1
    t_max: int = 300
    h_lifted: float = 0.05
    goal_threshold: float = 0.05
    contact_stiffness: float = 500.0
    contact_limit_arm: float = 5.0
    contact_limit_table: float = 25.0
    w_alive: float = 0.01
    w_grab: float = 10.0
    w_lift: float = 40.0
    w_reach: float = 100.0
    w_bonus: float = 10.0
    heightmap_grid: int = 8
    heightmap_cell: float = 0.03
    seed: int = 0
    # desk-scale geometry and actuation
    half_extent: float = 0.3
    wall_height: float = 0.15
    z_max: float = 0.25
    v_max: float = 0.3
    aperture_rate: float = 1.5
    r_grasp: float = 0.015
    a_close: float = 0.35
    a_open: float = 0.65
    substeps: int = 4
    push_cap: float = 0.012
    placement_margin: float = 0.02
    placement_max_attempts: int = 1000
    obj_radius: tuple[float, float] = (0.02, 0.08)
    obj_height: tuple[float, float] = (0.03, 0.07)
    obj_vertices: tuple[int, int] = (3, 8)
    goal_margin: float = 0.05
    goal_z: tuple[float, float] = (0.08, 0.18)
    goal_min_dist: float = 0.1
    # test fixture: gripper-to-goal reaching only (no grab/lift shaping)
    reach_only: bool = False

    def __post_init__(self):
        if self.arena not in ARENAS:
            raise ValueError(f"arena must be one of {ARENAS}, got {self.arena!r}")
        if self.n_objects < 1:
            raise ValueError("n_objects must be >= 1")

    def reward_weights(self) -> np.ndarray:
        return np.array([self.w_alive, self.w_grab, self.w_lift, self.w_reach, self.w_bonus])


@dataclass
class ObjectBody:
    id: int
    verts: np.ndarray  # (n,2) body frame, CCW, centered at centroid
    x: float
    y: float
    theta: float
    height: float
    z: float = 0.0
    vel: np.ndarray = field(default_factory=lambda: np.zeros(3))
    is_target: bool = False
    _world: np.ndarray | None = None
    _radius: float | None = None

    @property
    def radius(self) -> float:
        if self._radius is None:
            self._radius = float(np.max(np.linalg.norm(self.verts, axis=1)))
        return self._radius

    def world_verts(self) -> np.ndarray:
        if self._world is None:
            self._world = geometry.transform(self.verts, self.x, self.y, self.theta)
        return self._world

    def move_to(self, x: float, y: float, theta: float | None = None) -> None:
        self.x = x
        self.y = y
        if theta is not None:
            self.theta = theta
        self._world = None

    @property
    def top(self) -> float:
        return self.z + self.height

    def centroid(self) -> np.ndarray:
        return np.array([self.x, self.y])

    def center3(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z + 0.5 * self.height])


@dataclass
class GripperState:
    pos: np.ndarray  # (3,)
    aperture: float = 1.0
    held: int | None = None
    vbar: np.ndarray = field(default_factory=lambda: np.zeros(3))  # EMA velocity target
    abar: float = 0.0  # EMA aperture-rate target
    vel: np.ndarray = field(default_factory=lambda: np.zeros(3))
    held_offset: np.ndarray | None = None  # object pos3 - gripper pos3 at grasp
    shadow: np.ndarray | None = None  # unclamped position for wall-contact depth


@dataclass
class ContactReport:
    arm: dict = field(default_factory=dict)  # body key -> k_c * max penetration depth
    table: dict = field(default_factory=dict)

    def note(self, cls: str, key, magnitude: float) -> None:
        d = self.arm if cls == "arm" else self.table
        if magnitude > d.get(key, 0.0):
            d[key] = magnitude

    def max_arm(self) -> float:
        return max(self.arm.values(), default=0.0)

    def max_table(self) -> float:
        return max(self.table.values(), default=0.0)


@dataclass
class SceneState:
    objects: list[ObjectBody]
    gripper: GripperState
    goal: np.ndarray  # (3,)
    arena: str
    half_extent: float
    t: int = 0
    prev_d_grab: float = 0.0
    prev_d_goal: float = 0.0
    contacts: ContactReport = field(default_factory=ContactReport)
    last_action: np.ndarray = field(default_factory=lambda: np.zeros(4))
    lifted: bool = False
    episode_seed: int = 0

    def target(self) -> ObjectBody:
        for obj in self.objects:
            if obj.is_target:
                return obj
        raise RuntimeError("scene has no target object")

    def object_by_id(self, oid: int) -> ObjectBody:
        for obj in self.objects:
            if obj.id == oid:
                return obj
        raise KeyError(f"no object with id {oid}")

    def set_target(self, oid: int) -> None:
        found = False
        for obj in self.objects:
            obj.is_target = obj.id == oid
            found = found or obj.is_target
        if not found:
            raise KeyError(f"no object with id {oid}")

    def wall_segments(self) -> list[tuple[np.ndarray, np.ndarray]]:
        """Bin walls as 4 segments (empty list on tabletop)."""
        if self.arena != "bin":
            return []
        e = self.half_extent
        c = [np.array(v, dtype=float) for v in ((-e, -e), (e, -e), (e, e), (-e, e))]
        return [(c[0], c[1]), (c[1], c[2]), (c[2], c[3]), (c[3], c[0])]


def snapshot(state: SceneState) -> dict:
    """JSON-ready scene snapshot (documented schema, shared with replay/UI)."""
    return {
        "t": state.t,
        "arena": state.arena,
        "half_extent": state.half_extent,
        "objects": [
            {
                "id": o.id,
                "vertices": [[float(a), float(b)] for a, b in o.world_verts()],
                "pose": [float(o.x), float(o.y), float(o.theta)],
                "height": float(o.height),
                "z": float(o.z),
                "velocity": [float(v) for v in o.vel],
                "is_target": bool(o.is_target),
            }
            for o in state.objects
        ],
        "gripper": {
            "position": [float(v) for v in state.gripper.pos],
            "aperture": float(state.gripper.aperture),
            "held": state.gripper.held,
            "velocity_target": [float(v) for v in state.gripper.vbar],
            "aperture_target": float(state.gripper.abar),
        },
        "goal": [float(v) for v in state.goal],
        "lifted": bool(state.lifted),
    }
