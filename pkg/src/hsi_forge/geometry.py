"""Shared geometric primitives: yaw transforms, 2D hulls, normals."""

import numpy as np

TWO_PI = 2.0 * np.pi


def yaw_matrix(yaw: float) -> np.ndarray:
    """3x3 rotation about +z by `yaw` radians (right-handed, z-up)."""
    c, s = np.cos(yaw), np.sin(yaw)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def rotate_z(points: np.ndarray, yaw: float) -> np.ndarray:
    """Rotate (..., 3) or (..., 2) points about the z axis."""
    c, s = np.cos(yaw), np.sin(yaw)
    out = np.array(points, dtype=np.float64, copy=True)
    x = points[..., 0]
    y = points[..., 1]
    out[..., 0] = c * x - s * y
    out[..., 1] = s * x + c * y
    return out


def normalize_yaw(yaw: float) -> float:
    """Wrap into [0, 2*pi)."""
    y = float(yaw) % TWO_PI
    return y if y >= 0.0 else y + TWO_PI


def convex_hull_2d(points: np.ndarray) -> np.ndarray:
    """Convex hull of (N, 2) points, CCW, no repeated endpoint.

    Monotone chain; collinear/duplicate inputs yield degenerate hulls
    of 1 or 2 vertices, which the containment tests handle explicitly.
    """
    pts = np.unique(np.asarray(points, dtype=np.float64)[:, :2], axis=0)
    if pts.shape[0] <= 2:
        return pts
    # unique() sorts lexicographically, as monotone chain requires
    def half(seq):
        out = []
        for p in seq:
            while len(out) >= 2 and _cross(out[-2], out[-1], p) <= 0.0:
                out.pop()
            out.append(p)
        return out

    lower = half(pts)
    upper = half(pts[::-1])
    hull = np.asarray(lower[:-1] + upper[:-1])
    if hull.shape[0] < 3:  # all collinear
        return np.asarray([pts[0], pts[-1]])
    return hull


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def points_in_hull(points: np.ndarray, hull: np.ndarray, eps: float = 1e-12) -> np.ndarray:
    """Boolean mask: which (N, 2) points lie inside/on a CCW convex hull."""
    pts = np.asarray(points, dtype=np.float64)[:, :2]
    if hull.shape[0] == 1:
        return np.hypot(*(pts - hull[0]).T) <= eps
    if hull.shape[0] == 2:
        return _dist_to_segment(pts, hull[0], hull[1]) <= eps
    inside = np.ones(pts.shape[0], dtype=bool)
    for i in range(hull.shape[0]):
        a = hull[i]
        b = hull[(i + 1) % hull.shape[0]]
        cross = ((b[0] - a[0]) * (pts[:, 1] - a[1])
                 - (b[1] - a[1]) * (pts[:, 0] - a[0]))
        inside &= cross >= -eps
    return inside


def _dist_to_segment(pts, a, b):
    ab = b - a
    denom = float(ab @ ab)
    if denom == 0.0:
        return np.hypot(*(pts - a).T)
    t = np.clip(((pts - a) @ ab) / denom, 0.0, 1.0)
    proj = a + t[:, None] * ab
    return np.hypot(*(pts - proj).T)


def distance_to_hull(points: np.ndarray, hull: np.ndarray) -> np.ndarray:
    """Euclidean xy distance from each point to a convex hull (0 inside)."""
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))[:, :2]
    if hull.shape[0] == 1:
        return np.hypot(*(pts - hull[0]).T)
    if hull.shape[0] == 2:
        return _dist_to_segment(pts, hull[0], hull[1])
    d = np.full(pts.shape[0], np.inf)
    for i in range(hull.shape[0]):
        a = hull[i]
        b = hull[(i + 1) % hull.shape[0]]
        d = np.minimum(d, _dist_to_segment(pts, a, b))
    d[points_in_hull(pts, hull)] = 0.0
    return d


def point_segment_distance_2d(p, a, b) -> float:
    """xy distance from one point to segment ab."""
    return float(_dist_to_segment(np.asarray(p, dtype=np.float64)[None, :2],
                                  np.asarray(a, dtype=np.float64)[:2],
                                  np.asarray(b, dtype=np.float64)[:2])[0])


def estimate_normals(points: np.ndarray, k: int = 8) -> np.ndarray:
    """Outward unit normals for a point cloud via local PCA.

    The smallest-variance principal direction of each point's k nearest
    neighbors, flipped to point away from the cloud centroid. Adequate
    for the near-convex bodies used in sign estimation.
    """
    from .kdtree import SceneIndex

    pts = np.asarray(points, dtype=np.float64)
    n = pts.shape[0]
    k = min(k, n)
    index = SceneIndex.from_points(pts)
    centroid = pts.mean(axis=0)
    diag = float(np.linalg.norm(pts.max(axis=0) - pts.min(axis=0)))
    r0 = max(diag / max(np.cbrt(n), 1.0) * 2.0, 1e-3)
    normals = np.empty_like(pts)
    for i in range(n):
        # k nearest by growing a radius query
        r = r0
        nbr = index.radius_indices(pts[i], r)
        while nbr.shape[0] < k:
            r *= 2.0
            nbr = index.radius_indices(pts[i], r)
        d = ((pts[nbr] - pts[i]) ** 2).sum(axis=1)
        nbr = nbr[np.argsort(d, kind="stable")][:k]
        local = pts[nbr] - pts[nbr].mean(axis=0)
        cov = local.T @ local
        w, v = np.linalg.eigh(cov)
        normal = v[:, 0]
        if normal @ (pts[i] - centroid) < 0.0:
            normal = -normal
        normals[i] = normal
    return normals
