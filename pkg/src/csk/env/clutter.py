"""2.5-D clutter retrieval: placement, stepping with EMA-filtered control,
grasping, push-based contact resolution, shaped rewards, and safety
terminations.

The gripper is a kinematic point with a height axis and an aperture. Objects
are convex planar prisms resting on the table unless held. Contact "force" is
stiffness times the worst penetration depth seen during substep resolution.
"""

from __future__ import annotations

import math

import numpy as np

from . import geometry
from .scene import ContactReport, EnvConfig, GripperState, ObjectBody, SceneState


class PlacementError(RuntimeError):
    pass


def _episode_rng(seed: int, env_index: int, episode: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=(seed, env_index, episode)))


def reset(config: EnvConfig, seed: int, env_index: int = 0, episode: int = 0) -> SceneState:
    """Build a fresh scene: rejection-sampled non-overlapping objects, a
    uniformly chosen target, a free-space goal at lifting height, and the
    gripper at its canonical start."""
    rng = _episode_rng(seed, env_index, episode)
    he = config.half_extent

    objects: list[ObjectBody] = []
    for oid in range(config.n_objects):
        placed = False
        for _ in range(config.placement_max_attempts):
            verts = geometry.random_convex_polygon(rng, config.obj_vertices, config.obj_radius)
            radius = float(np.max(np.linalg.norm(verts, axis=1)))
            lim = he - radius - 0.01
            if lim <= 0:
                continue
            x, y = rng.uniform(-lim, lim, size=2)
            theta = float(rng.uniform(0, 2 * math.pi))
            cand = ObjectBody(
                id=oid,
                verts=verts,
                x=float(x),
                y=float(y),
                theta=theta,
                height=float(rng.uniform(*config.obj_height)),
            )
            ok = True
            for other in objects:
                r_other = float(np.max(np.linalg.norm(other.verts, axis=1)))
                if np.hypot(cand.x - other.x, cand.y - other.y) < radius + r_other + config.placement_margin:
                    ok = False
                    break
            if ok:
                objects.append(cand)
                placed = True
                break
        if not placed:
            area = sum(abs(geometry.polygon_area(o.verts)) for o in objects)
            raise PlacementError(
                f"could not place object {oid} after {config.placement_max_attempts} attempts "
                f"(n_objects={config.n_objects}, occupied area {area:.4f} m^2 in {(2 * he) ** 2:.4f} m^2 arena)"
            )

    target_idx = int(rng.integers(len(objects)))
    objects[target_idx].is_target = True

    goal = None
    tgt = objects[target_idx]
    for attempt in range(200):
        gx, gy = rng.uniform(-(he - config.goal_margin), he - config.goal_margin, size=2)
        gz = float(rng.uniform(*config.goal_z))
        p = np.array([gx, gy])
        if any(geometry.point_in_convex(p, o.world_verts()) for o in objects):
            continue
        if np.hypot(gx - tgt.x, gy - tgt.y) < config.goal_min_dist and attempt < 199:
            continue
        goal = np.array([gx, gy, gz])
        break
    if goal is None:
        raise PlacementError("could not sample a free-space goal")

    gripper = GripperState(pos=np.array([0.0, 0.0, config.z_max]), aperture=1.0)
    state = SceneState(
        objects=objects,
        gripper=gripper,
        goal=goal,
        arena=config.arena,
        half_extent=he,
        episode_seed=int(rng.integers(2**31)),
    )
    state.prev_d_grab = grab_distance(state)
    state.prev_d_goal = goal_distance(state, config)
    return state


def grab_distance(state: SceneState) -> float:
    """3-D distance from the gripper point to the target's extruded surface."""
    tgt = state.target()
    g = state.gripper.pos
    dxy = geometry.point_polygon_distance(g[:2], tgt.world_verts())
    dz = max(0.0, tgt.z - g[2], g[2] - tgt.top)
    return math.hypot(dxy, dz)


def goal_distance(state: SceneState, config: EnvConfig) -> float:
    if config.reach_only:
        return float(np.linalg.norm(state.gripper.pos - state.goal))
    return float(np.linalg.norm(state.target().center3() - state.goal))


def _note_boundary_contact(state: SceneState, config: EnvConfig, obj: ObjectBody, move: bool) -> bool:
    """Clamp an object inside the arena fence; record table/bin-class contact."""
    he = state.half_extent
    if abs(obj.x) + obj.radius <= he and abs(obj.y) + obj.radius <= he:
        return False
    w = obj.world_verts()
    over_lo_x = max(0.0, -he - float(w[:, 0].min()))
    over_hi_x = max(0.0, float(w[:, 0].max()) - he)
    over_lo_y = max(0.0, -he - float(w[:, 1].min()))
    over_hi_y = max(0.0, float(w[:, 1].max()) - he)
    depth = max(over_lo_x, over_hi_x, over_lo_y, over_hi_y)
    if depth <= 0.0:
        return False
    state.contacts.note("table", obj.id, config.contact_stiffness * depth)
    if move:
        obj.move_to(obj.x + over_lo_x - over_hi_x, obj.y + over_lo_y - over_hi_y)
    return True


def _z_overlap(a: ObjectBody, b: ObjectBody) -> bool:
    return a.z < b.top and b.z < a.top


def _resolve_pairs(state: SceneState, config: EnvConfig, cap: float | None) -> float:
    """One push pass over object pairs; returns the worst penetration seen."""
    worst = 0.0
    held_id = state.gripper.held
    objs = state.objects
    for i in range(len(objs)):
        for j in range(i + 1, len(objs)):
            a, b = objs[i], objs[j]
            if not _z_overlap(a, b):
                continue
            if math.hypot(a.x - b.x, a.y - b.y) > a.radius + b.radius:
                continue
            hit = geometry.sat_mtv(a.world_verts(), b.world_verts())
            if hit is None:
                continue
            depth, axis = hit
            worst = max(worst, depth)
            push = depth if cap is None else min(depth, cap)
            if a.id == held_id:
                b.move_to(b.x + axis[0] * push, b.y + axis[1] * push)
            elif b.id == held_id:
                a.move_to(a.x - axis[0] * push, a.y - axis[1] * push)
            else:
                a.move_to(a.x - axis[0] * push / 2, a.y - axis[1] * push / 2)
                b.move_to(b.x + axis[0] * push / 2, b.y + axis[1] * push / 2)
    return worst


def step(state: SceneState, action: np.ndarray, config: EnvConfig):
    """Advance one 10 Hz control step.

    Returns (state, reward_terms, weighted_total, termination, success_flags);
    `state` is updated in place. Termination is one of scene.TERMINATIONS;
    success flags are {"lifted", "goal"}.
    """
    action = np.asarray(action, dtype=float)
    if action.shape != (4,):
        raise ValueError(f"action must be 4D, got shape {action.shape}")
    if not np.isfinite(action).all():
        raise FloatingPointError("non-finite action")
    action = np.clip(action, -1.0, 1.0)

    grip = state.gripper
    grip.vbar = config.alpha * action[:3] + (1.0 - config.alpha) * grip.vbar
    grip.abar = config.alpha * action[3] + (1.0 - config.alpha) * grip.abar

    state.contacts = ContactReport()
    pos_before = grip.pos.copy()
    obj_before = {o.id: o.center3() for o in state.objects}
    kc = config.contact_stiffness
    sub_dt = config.dt / config.substeps
    he = state.half_extent

    if grip.shadow is None:
        grip.shadow = grip.pos.copy()

    for _ in range(config.substeps):
        # -- gripper motion; the shadow position keeps accumulating where the
        # clamp is active so sustained pushing reads as growing penetration
        shadow = grip.shadow + grip.vbar * config.v_max * sub_dt
        pos = shadow.copy()
        if pos[2] < 0.0:  # table surface, both arenas
            state.contacts.note("table", "gripper", kc * -pos[2])
            pos[2] = 0.0
        elif pos[2] > config.z_max:  # workspace ceiling: silent clamp
            pos[2] = config.z_max
            shadow[2] = config.z_max
        else:
            shadow[2] = pos[2]
        for ax in (0, 1):
            if abs(pos[ax]) > he:
                if state.arena == "bin":
                    state.contacts.note("table", "gripper", kc * (abs(shadow[ax]) - he))
                    pos[ax] = math.copysign(he, shadow[ax])
                else:  # tabletop: workspace limit, not a contact body
                    pos[ax] = math.copysign(he, pos[ax])
                    shadow[ax] = pos[ax]
            else:
                shadow[ax] = pos[ax]
        grip.shadow = shadow
        grip.pos = pos
        moved_any = False

        # -- held object follows rigidly
        if grip.held is not None:
            obj = state.object_by_id(grip.held)
            new3 = grip.pos + grip.held_offset
            obj.move_to(float(new3[0]), float(new3[1]))
            obj.z = float(new3[2])
            moved_any = True

        # -- aperture and grasp/release events
        a_prev = grip.aperture
        grip.aperture = float(np.clip(a_prev + grip.abar * config.aperture_rate * sub_dt, 0.0, 1.0))
        if grip.held is not None and grip.aperture > config.a_open:
            released = state.object_by_id(grip.held)
            released.z = 0.0
            released.vel = np.zeros(3)
            grip.held = None
            grip.held_offset = None
        if grip.held is None and a_prev >= config.a_close > grip.aperture:
            candidates = [
                o
                for o in state.objects
                if grip.pos[2] <= o.top
                and math.hypot(grip.pos[0] - o.x, grip.pos[1] - o.y) <= o.radius + config.r_grasp
                and geometry.point_polygon_distance(grip.pos[:2], o.world_verts()) <= config.r_grasp
            ]
            if len(candidates) == 1:
                obj = candidates[0]
                grip.held = obj.id
                grip.held_offset = np.array([obj.x, obj.y, obj.z]) - grip.pos

        # -- gripper vs non-held objects: arm-class contact, push along MTV
        for obj in state.objects:
            if obj.id == grip.held:
                continue
            if grip.pos[2] >= obj.top or grip.pos[2] < obj.z:
                continue
            if math.hypot(grip.pos[0] - obj.x, grip.pos[1] - obj.y) > obj.radius:
                continue
            xy_depth, normal = geometry.point_depth_in_convex(grip.pos[:2], obj.world_verts())
            if xy_depth <= 0.0:
                continue
            depth = min(xy_depth, obj.top - grip.pos[2])
            state.contacts.note("arm", obj.id, kc * depth)
            push = min(xy_depth, config.push_cap)
            obj.move_to(obj.x - normal[0] * push, obj.y - normal[1] * push)
            moved_any = True

        # -- object pairs and the arena fence
        if moved_any:
            _resolve_pairs(state, config, config.push_cap)
            for obj in state.objects:
                moved_any |= _note_boundary_contact(state, config, obj, move=obj.id != grip.held)

    # settle: full-depth pushes until the pairwise-penetration invariant holds
    for _ in range(8):
        worst = _resolve_pairs(state, config, None)
        for obj in state.objects:
            _note_boundary_contact(state, config, obj, move=obj.id != grip.held)
        if worst < 1e-4:
            break

    # -- velocities over the control step
    grip.vel = (grip.pos - pos_before) / config.dt
    for o in state.objects:
        o.vel = (o.center3() - obj_before[o.id]) / config.dt

    state.t += 1
    state.last_action = action.copy()

    terms, total = compute_reward(state, config)
    state.prev_d_grab = grab_distance(state)
    state.prev_d_goal = goal_distance(state, config)

    tgt = state.target()
    if grip.held == tgt.id and tgt.z >= config.h_lifted:
        state.lifted = True
    flags = {
        "lifted": state.lifted,
        "goal": goal_distance(state, config) < config.goal_threshold,
    }
    termination = check_termination(state, config)
    return state, terms, total, termination, flags


def compute_reward(state: SceneState, config: EnvConfig) -> tuple[dict, float]:
    """Reward terms from the cached previous distances and current geometry.

    alive = 1; grab = -(d_grab - prev); lift = min(h_t, h_lifted);
    reach = -(d_goal - prev); bonus = 1 while inside the goal threshold.
    """
    d_grab = grab_distance(state)
    d_goal = goal_distance(state, config)
    terms = {
        "alive": 1.0,
        "grab": -(d_grab - state.prev_d_grab),
        "lift": min(state.target().z, config.h_lifted),
        "reach": -(d_goal - state.prev_d_goal),
        "bonus": 1.0 if d_goal < config.goal_threshold else 0.0,
    }
    if config.reach_only:
        terms["grab"] = 0.0
        terms["lift"] = 0.0
    total = float(
        config.w_alive * terms["alive"]
        + config.w_grab * terms["grab"]
        + config.w_lift * terms["lift"]
        + config.w_reach * terms["reach"]
        + config.w_bonus * terms["bonus"]
    )
    return terms, total


def check_termination(state: SceneState, config: EnvConfig) -> str:
    """Safety and timeout check; precedence arm > table > timeout, strict >."""
    if state.contacts.max_arm() > config.contact_limit_arm:
        return "contact_arm"
    if state.contacts.max_table() > config.contact_limit_table:
        return "contact_table"
    if state.t > config.t_max:
        return "timeout"
    return "none"


# -- observations ---------------------------------------------------------

PRIVILEGED_LAYOUT = (
    ("last_action", 4),
    ("gripper_pose_aperture", 4),
    ("filtered_targets", 4),
    ("goal", 3),
    ("target_obb", 10),
    ("heightmap", 64),
    ("target_velocity", 3),
    ("target_to_goal", 3),
)
PRIVILEGED_DIM = sum(d for _, d in PRIVILEGED_LAYOUT)


_GRID_CACHE: dict[tuple[int, float], np.ndarray] = {}


def heightmap(state: SceneState, config: EnvConfig) -> np.ndarray:
    """Gripper-centered grid of max object top heights (0 where empty)."""
    n = config.heightmap_grid
    cell = config.heightmap_cell
    key = (n, cell)
    base = _GRID_CACHE.get(key)
    if base is None:
        offs = (np.arange(n) - (n - 1) / 2.0) * cell
        base = np.stack(np.meshgrid(offs, offs, indexing="ij"), axis=-1).reshape(-1, 2)
        _GRID_CACHE[key] = base
    centers = base + state.gripper.pos[:2]
    hm = np.zeros(n * n)
    for obj in state.objects:
        near = np.hypot(centers[:, 0] - obj.x, centers[:, 1] - obj.y) <= obj.radius + cell / 2.0
        if not near.any():
            continue
        d = geometry.points_polygon_distance(centers[near], obj.world_verts())
        occupied = d <= cell / 2.0
        if occupied.any():
            vals = hm[near]
            hm[near] = np.where(occupied, np.maximum(vals, obj.top), vals)
    return hm


def privileged_observation(state: SceneState, config: EnvConfig) -> np.ndarray:
    tgt = state.target()
    obb = geometry.min_area_obb(tgt.world_verts())
    parts = [
        state.last_action,
        np.concatenate([state.gripper.pos, [state.gripper.aperture]]),
        np.concatenate([state.gripper.vbar, [state.gripper.abar]]),
        state.goal,
        np.concatenate([obb.reshape(-1), [tgt.z, tgt.height]]),
        heightmap(state, config),
        tgt.vel,
        state.goal - tgt.center3(),
    ]
    obs = np.concatenate(parts)
    assert obs.shape == (PRIVILEGED_DIM,)
    return obs


def proprio_observation(state: SceneState) -> np.ndarray:
    """Deployable proprioception: last action, gripper pose+aperture,
    filtered targets, goal position (15-D)."""
    return np.concatenate(
        [
            state.last_action,
            state.gripper.pos,
            [state.gripper.aperture],
            state.gripper.vbar,
            [state.gripper.abar],
            state.goal,
        ]
    )


PROPRIO_DIM = 15
