"""Quantitative measures: goal distance, diversity, penetration, errors.

Inside/outside tests use a generalized winding number when a watertight
proxy mesh is supplied, and nearest-point normal sign (local PCA,
outward-oriented) for bare point-cloud bodies.
"""

from dataclasses import dataclass

import numpy as np

from .backends import kernels
from .errors import DegenerateBody, ShapeMismatch
from .geometry import estimate_normals
from .kdtree import SceneIndex

MIN_BODY_POINTS = 8


@dataclass
class BodySurface:
    """Body at one frame: point cloud + normals, or a watertight mesh."""

    points: np.ndarray
    normals: np.ndarray | None = None
    mesh: tuple | None = None            # (verts (M,3), faces (K,3) int32)

    @classmethod
    def from_points(cls, points: np.ndarray, k: int = 8) -> "BodySurface":
        pts = np.ascontiguousarray(points, dtype=np.float64)
        if pts.shape[0] < MIN_BODY_POINTS:
            raise DegenerateBody(
                f"{pts.shape[0]} points is too few for sign estimation")
        normals = estimate_normals(pts, k=k)
        return cls(points=pts, normals=normals)

    @classmethod
    def from_mesh(cls, verts: np.ndarray, faces: np.ndarray) -> "BodySurface":
        verts = np.ascontiguousarray(verts, dtype=np.float64)
        faces = np.ascontiguousarray(faces, dtype=np.int32)
        return cls(points=verts, mesh=(verts, faces))


def signed_distances(body: BodySurface, queries: np.ndarray) -> np.ndarray:
    """Signed distance of each query to the body surface (negative inside)."""
    q = np.ascontiguousarray(np.atleast_2d(queries), dtype=np.float64)
    if body.mesh is not None:
        verts, faces = body.mesh
        d = kernels.min_dist_to_triangles(verts, faces, q)
        w = kernels.winding_numbers(verts, faces, q)
        return np.where(w > 0.5, -d, d)
    if body.normals is None:
        raise DegenerateBody("point-cloud body without normals")
    index = SceneIndex.from_points(body.points)
    out = np.empty(q.shape[0])
    for i in range(q.shape[0]):
        hit = index.nearest(q[i])
        offset = q[i] - body.points[hit.point_index]
        sign = -1.0 if offset @ body.normals[hit.point_index] < 0.0 else 1.0
        out[i] = sign * hit.distance
    return out


def goal_distance(body: BodySurface, obj) -> float:
    """Clamped shortest positive distance from the object to the body.

    Per-object-point signed distance to the body surface, minimized,
    then clamped at zero: any object point on or inside the body gives
    exactly 0.
    """
    points = getattr(obj, "points", obj)
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    if points.shape[0] == 0:
        raise ValueError("object has no points")
    sd = signed_distances(body, points)
    return float(max(sd.min(), 0.0))


def apd(samples) -> float:
    """Average pairwise L2 distance across K motion samples.

    sum over ordered pairs (i, j != i) and frames t of
    ||x_i,t - x_j,t||, divided by K*(K-1)*T.
    """
    coords = [np.asarray(getattr(s, "coords", s), dtype=np.float64)
              for s in samples]
    k = len(coords)
    if k < 2:
        raise ShapeMismatch("APD needs at least two samples")
    shape = coords[0].shape
    if any(c.shape != shape for c in coords):
        raise ShapeMismatch(f"sample shapes differ: "
                            f"{sorted({c.shape for c in coords})}")
    t = shape[0]
    total = 0.0
    for i in range(k):
        for j in range(i + 1, k):
            total += 2.0 * np.linalg.norm(coords[i] - coords[j],
                                          axis=1).sum()
    return total / (k * (k - 1) * t)


def collision_distance(frames: np.ndarray, scene, index: SceneIndex,
                       normals_k: int = 8) -> float:
    """Mean depth of scene points that penetrate the body, over all frames.

    Scene points classified inside the per-frame body surface contribute
    their distance to that surface; 0.0 when nothing penetrates.
    """
    frames = np.asarray(frames, dtype=np.float64)
    depths = []
    for f in range(frames.shape[0]):
        body_pts = frames[f]
        center = (body_pts.min(axis=0) + body_pts.max(axis=0)) / 2.0
        radius = float(np.linalg.norm(body_pts.max(axis=0) - center)) + 0.05
        cand = index.radius_indices(center, radius)
        if cand.size == 0:
            continue
        body = BodySurface.from_points(body_pts, k=normals_k)
        sd = signed_distances(body, scene.positions[cand])
        inside = sd < 0.0
        if inside.any():
            depths.append(-sd[inside])
    if not depths:
        return 0.0
    return float(np.concatenate(depths).mean())


def _mean_point_error_mm(pred: np.ndarray, gt: np.ndarray) -> float:
    pred = np.asarray(pred, dtype=np.float64)
    gt = np.asarray(gt, dtype=np.float64)
    if pred.shape != gt.shape:
        raise ShapeMismatch(f"{pred.shape} vs {gt.shape}")
    err = np.linalg.norm(pred - gt, axis=-1)       # (F, P)
    return float(err.mean(axis=-1).mean()) * 1000.0


def mpjpe(pred_joints: np.ndarray, gt_joints: np.ndarray) -> float:
    """Mean per-joint position error in millimeters, averaged over frames."""
    return _mean_point_error_mm(pred_joints, gt_joints)


def mpvpe(pred_vertices: np.ndarray, gt_vertices: np.ndarray) -> float:
    """Mean per-vertex position error in millimeters, averaged over frames."""
    return _mean_point_error_mm(pred_vertices, gt_vertices)
