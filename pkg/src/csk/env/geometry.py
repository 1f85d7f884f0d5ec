"""Planar convex-polygon geometry: hulls, distances, SAT overlap, minimum-area
bounding rectangles, and vectorized point/ray queries.

Polygons are (n, 2) float arrays, counter-clockwise. Hot-path helpers are
vectorized over query points or rays, not over polygons (object counts are
small).
"""

from __future__ import annotations

import math

import numpy as np


def convex_hull(points: np.ndarray) -> np.ndarray:
    """Andrew's monotone chain; returns CCW hull without repeated endpoint."""
    pts = np.unique(points, axis=0)
    if len(pts) < 3:
        raise ValueError("need at least 3 distinct points")
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    pts = pts[order]

    def half(iterable):
        out = []
        for p in iterable:
            while len(out) >= 2:
                u = out[-1] - out[-2]
                v = p - out[-2]
                if u[0] * v[1] - u[1] * v[0] > 0:
                    break
                out.pop()
            out.append(p)
        return out

    lower = half(pts)
    upper = half(pts[::-1])
    hull = np.array(lower[:-1] + upper[:-1])
    if len(hull) < 3:
        raise ValueError("degenerate hull")
    return hull


def polygon_area(verts: np.ndarray) -> float:
    x, y = verts[:, 0], verts[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def polygon_centroid(verts: np.ndarray) -> np.ndarray:
    x, y = verts[:, 0], verts[:, 1]
    cross = x * np.roll(y, -1) - np.roll(x, -1) * y
    a = cross.sum() / 2.0
    cx = np.sum((x + np.roll(x, -1)) * cross) / (6.0 * a)
    cy = np.sum((y + np.roll(y, -1)) * cross) / (6.0 * a)
    return np.array([cx, cy])


def random_convex_polygon(
    rng: np.random.Generator,
    n_vertices: tuple[int, int] = (3, 8),
    circumradius: tuple[float, float] = (0.02, 0.08),
) -> np.ndarray:
    """Convex CCW polygon centered at its centroid, circumradius in range."""
    for _ in range(64):
        k = int(rng.integers(n_vertices[0], n_vertices[1] + 1))
        angles = np.sort(rng.uniform(0.0, 2 * math.pi, size=max(k, 3)))
        radii = rng.uniform(0.45, 1.0, size=angles.size)
        pts = np.stack([radii * np.cos(angles), radii * np.sin(angles)], axis=1)
        try:
            hull = convex_hull(pts)
        except ValueError:
            continue
        if not (n_vertices[0] <= len(hull) <= n_vertices[1]):
            continue
        hull = hull - polygon_centroid(hull)
        r_now = float(np.max(np.linalg.norm(hull, axis=1)))
        r_target = float(rng.uniform(*circumradius))
        hull = hull * (r_target / r_now)
        return hull - polygon_centroid(hull)
    raise RuntimeError("failed to sample a convex polygon")


def transform(verts: np.ndarray, x: float, y: float, theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    rot = np.array([[c, -s], [s, c]])
    return verts @ rot.T + np.array([x, y])


def point_in_convex(p: np.ndarray, verts: np.ndarray) -> bool:
    d = verts - p
    nxt = np.roll(verts, -1, axis=0) - p
    cross = d[:, 0] * nxt[:, 1] - d[:, 1] * nxt[:, 0]
    return bool(np.all(cross >= 0.0))


def points_polygon_distance(points: np.ndarray, verts: np.ndarray) -> np.ndarray:
    """Distance from each point (m, 2) to the polygon as a set (0 inside)."""
    a = verts
    b = np.roll(verts, -1, axis=0)
    e = b - a  # (n,2)
    ap = points[:, None, :] - a[None, :, :]  # (m,n,2)
    elen2 = np.maximum((e * e).sum(axis=1), 1e-18)
    t = np.clip((ap * e[None, :, :]).sum(axis=2) / elen2[None, :], 0.0, 1.0)
    closest = a[None, :, :] + t[:, :, None] * e[None, :, :]
    d_edges = np.linalg.norm(points[:, None, :] - closest, axis=2).min(axis=1)
    cross = ap[:, :, 0] * e[None, :, 1] - ap[:, :, 1] * e[None, :, 0]
    inside = np.all(cross <= 0.0, axis=1)  # CCW: interior is left of each edge
    return np.where(inside, 0.0, d_edges)


def point_polygon_distance(p: np.ndarray, verts: np.ndarray) -> float:
    return float(points_polygon_distance(np.asarray(p, dtype=float)[None, :], verts)[0])


def point_depth_in_convex(p: np.ndarray, verts: np.ndarray) -> tuple[float, np.ndarray]:
    """For p inside a CCW convex polygon: (depth to nearest edge, outward normal).

    Returns (0, zero-vector) if p is outside.
    """
    a = verts
    b = np.roll(verts, -1, axis=0)
    e = b - a
    ap = p[None, :] - a
    cross = ap[:, 0] * e[:, 1] - ap[:, 1] * e[:, 0]
    if np.any(cross > 0.0):
        return 0.0, np.zeros(2)
    elen = np.maximum(np.linalg.norm(e, axis=1), 1e-12)
    dist = -cross / elen  # distance to each edge line from inside
    i = int(np.argmin(dist))
    normal = np.array([e[i, 1], -e[i, 0]]) / elen[i]  # outward for CCW
    return float(dist[i]), normal


def sat_mtv(verts_a: np.ndarray, verts_b: np.ndarray) -> tuple[float, np.ndarray] | None:
    """Overlap of two convex polygons. Returns (depth, unit axis) such that
    translating B by depth*axis separates the pair, or None when separated."""
    best_depth = math.inf
    best_axis = None
    for verts in (verts_a, verts_b):
        e = np.roll(verts, -1, axis=0) - verts
        normals = np.stack([e[:, 1], -e[:, 0]], axis=1)
        normals /= np.maximum(np.linalg.norm(normals, axis=1, keepdims=True), 1e-12)
        pa = verts_a @ normals.T
        pb = verts_b @ normals.T
        push_pos = pa.max(axis=0) - pb.min(axis=0)  # move B along +n
        push_neg = pb.max(axis=0) - pa.min(axis=0)  # move B along -n
        cost = np.minimum(push_pos, push_neg)
        i = int(np.argmin(cost))
        if cost[i] <= 0.0:
            return None
        if cost[i] < best_depth:
            best_depth = float(cost[i])
            best_axis = normals[i] if push_pos[i] <= push_neg[i] else -normals[i]
    return best_depth, best_axis


def min_area_obb(verts: np.ndarray) -> np.ndarray:
    """Corners (4, 2) of the minimum-area oriented bounding rectangle."""
    e = np.roll(verts, -1, axis=0) - verts
    lens = np.linalg.norm(e, axis=1)
    keep = lens > 1e-12
    u = e[keep] / lens[keep][:, None]  # (m,2) candidate axes
    v = np.stack([-u[:, 1], u[:, 0]], axis=1)
    pu = verts @ u.T  # (n,m)
    pv = verts @ v.T
    lo_u, hi_u = pu.min(axis=0), pu.max(axis=0)
    lo_v, hi_v = pv.min(axis=0), pv.max(axis=0)
    areas = (hi_u - lo_u) * (hi_v - lo_v)
    i = int(np.argmin(areas))
    ui, vi = u[i], v[i]
    return np.array(
        [
            lo_u[i] * ui + lo_v[i] * vi,
            hi_u[i] * ui + lo_v[i] * vi,
            hi_u[i] * ui + hi_v[i] * vi,
            lo_u[i] * ui + hi_v[i] * vi,
        ]
    )


def ray_segments_hits(origin: np.ndarray, dirs: np.ndarray, seg_a: np.ndarray, seg_b: np.ndarray) -> np.ndarray:
    """Smallest positive ray parameter per ray against a segment set.

    dirs (k, 2) unit vectors, segments (m, 2)-(m, 2). Returns (k,) distances,
    inf where nothing is hit.
    """
    d = seg_b - seg_a  # (m,2)
    oa = seg_a[None, :, :] - origin[None, None, :]  # (1,m,2) broadcast over rays
    rx = dirs[:, 0][:, None]
    ry = dirs[:, 1][:, None]
    denom = rx * d[None, :, 1] - ry * d[None, :, 0]  # (k,m)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (oa[:, :, 0] * d[None, :, 1] - oa[:, :, 1] * d[None, :, 0]) / denom
        s = (oa[:, :, 0] * ry - oa[:, :, 1] * rx) / denom
    valid = (np.abs(denom) > 1e-12) & (s >= 0.0) & (s <= 1.0) & (t > 1e-9)
    t = np.where(valid, t, np.inf)
    return t.min(axis=1)
