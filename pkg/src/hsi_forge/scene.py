"""Semantic structure derived from labeled scenes.

Object instances with top surfaces and 2D footprints, the floor plane,
and the seed-deterministic samplers used by placement proposals.
"""

import logging
from dataclasses import dataclass

import numpy as np

from .errors import EmptySurface, NoObjects, NoValidTarget
from .geometry import convex_hull_2d, distance_to_hull
from .io import ScenePointCloud
from .kdtree import SceneIndex

log = logging.getLogger(__name__)

N_MIN = 20                 # instances below this point count are scan debris
EPS_TOP = 0.05             # z band below per-cell local maxima
TOP_CELL = 0.05            # xy cell size for the local-maxima grid
FLOOR_CLASSES = ("floor", "floor mat")
FLOOR_BAND = 0.05          # |z - z0| height considered "on the floor"
STANDING_BAND = (0.05, 1.9)  # z slab (above z0) that can block a standing body


@dataclass
class ObjectInstance:
    """One labeled instance: points, bounding data, top surface, footprint."""

    instance_id: int
    class_name: str
    point_indices: np.ndarray   # into the source scene
    points: np.ndarray          # (K, 3) positions
    centroid: np.ndarray
    aabb_lo: np.ndarray
    aabb_hi: np.ndarray
    top_surface: np.ndarray     # indices into `points`
    footprint: np.ndarray       # 2D convex hull vertices, CCW

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def top_points(self) -> np.ndarray:
        return self.points[self.top_surface]


@dataclass(frozen=True)
class FloorModel:
    z0: float
    source: str                 # "SemanticLabel" | "HeightHistogram"


def _top_surface_indices(points: np.ndarray, eps_top: float = EPS_TOP,
                         cell: float = TOP_CELL) -> np.ndarray:
    xy = points[:, :2]
    ij = np.floor((xy - xy.min(axis=0)) / cell).astype(np.int64)
    key = ij[:, 0] * (ij[:, 1].max() + 1) + ij[:, 1]
    order = np.argsort(key, kind="stable")
    z = points[:, 2]
    top = np.zeros(points.shape[0], dtype=bool)
    sorted_key = key[order]
    starts = np.flatnonzero(np.r_[True, sorted_key[1:] != sorted_key[:-1]])
    bounds = np.r_[starts, sorted_key.size]
    for s, e in zip(bounds[:-1], bounds[1:]):
        sel = order[s:e]
        top[sel] = z[sel] >= z[sel].max() - eps_top
    return np.flatnonzero(top)


def extract_objects(scene: ScenePointCloud, n_min: int = N_MIN):
    """One ObjectInstance per nonzero instance id with >= n_min points."""
    objects = []
    dropped = 0
    for inst in np.unique(scene.instance):
        if inst == 0:
            continue
        idx = np.flatnonzero(scene.instance == inst)
        if idx.size < n_min:
            dropped += 1
            continue
        pts = scene.positions[idx]
        sem = int(scene.semantic[idx[0]])
        objects.append(ObjectInstance(
            instance_id=int(inst),
            class_name=scene.class_names[sem],
            point_indices=idx,
            points=pts,
            centroid=pts.mean(axis=0),
            aabb_lo=pts.min(axis=0),
            aabb_hi=pts.max(axis=0),
            top_surface=_top_surface_indices(pts),
            footprint=convex_hull_2d(pts[:, :2]),
        ))
    if dropped:
        log.warning("dropped %d instances below %d points", dropped, n_min)
    if not objects:
        raise NoObjects(f"scene {scene.scene_id!r} has no usable instances")
    return objects


def detect_floor(scene: ScenePointCloud,
                 floor_classes=FLOOR_CLASSES) -> FloorModel:
    """Median z of floor-labeled points; height-histogram fallback."""
    floor_ids = [cid for cid, name in scene.class_names.items()
                 if name in floor_classes]
    mask = np.isin(scene.semantic, floor_ids) if floor_ids else None
    if mask is not None and mask.any():
        return FloorModel(z0=float(np.median(scene.positions[mask, 2])),
                          source="SemanticLabel")

    # per-cell 1st-percentile heights, then the modal 1 cm bin
    xy = scene.positions[:, :2]
    z = scene.positions[:, 2]
    ij = np.floor((xy - xy.min(axis=0)) / 0.1).astype(np.int64)
    key = ij[:, 0] * (ij[:, 1].max() + 1) + ij[:, 1]
    order = np.argsort(key, kind="stable")
    sorted_key = key[order]
    starts = np.flatnonzero(np.r_[True, sorted_key[1:] != sorted_key[:-1]])
    bounds = np.r_[starts, sorted_key.size]
    lows = np.array([np.percentile(z[order[s:e]], 1.0)
                     for s, e in zip(bounds[:-1], bounds[1:])])
    edges = np.arange(lows.min(), lows.max() + 0.02, 0.01)
    hist, edges = np.histogram(lows, bins=edges)
    best = int(np.argmax(hist))  # ties resolve to the lowest bin
    return FloorModel(z0=float((edges[best] + edges[best + 1]) / 2.0),
                      source="HeightHistogram")


def floor_mask(scene: ScenePointCloud, floor: FloorModel,
               floor_classes=FLOOR_CLASSES) -> np.ndarray:
    """Points exempt from collision as 'ground': labeled floor, or near z0."""
    floor_ids = [cid for cid, name in scene.class_names.items()
                 if name in floor_classes]
    if floor.source == "SemanticLabel" and floor_ids:
        return np.isin(scene.semantic, floor_ids)
    return np.abs(scene.positions[:, 2] - floor.z0) <= FLOOR_BAND


def sample_surface_points(obj: ObjectInstance, n: int, rng,
                          surface: str = "top") -> np.ndarray:
    """Uniform with-replacement draw of n points from the object surface.

    `surface="top"` (seat sampling) draws from the top band;
    `surface="all"` from every object point.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    pool = obj.top_points if surface == "top" else obj.points
    if pool.shape[0] == 0:
        raise EmptySurface(
            f"instance {obj.instance_id} has no {surface} surface points")
    picks = rng.integers(0, pool.shape[0], size=n)
    return pool[picks]


def sample_floor_targets(scene: ScenePointCloud, floor: FloorModel,
                         obj: ObjectInstance, radius: float, n: int, rng,
                         clearance_min: float = 0.25,
                         standing_band=STANDING_BAND,
                         max_rejects: int = 5000) -> np.ndarray:
    """n xy goal positions near the object footprint with standing clearance.

    Each target is on floor (within FLOOR_BAND of z0 coverage), within
    `radius` of the footprint, and at least `clearance_min` away in xy
    from every non-floor point in the standing-height slab.

    Raises NoValidTarget when the neighborhood is fully blocked.
    """
    if radius <= 0:
        raise ValueError("radius must be positive")
    z = scene.positions[:, 2]
    fmask = floor_mask(scene, floor)
    blockers = (~fmask) & (z > floor.z0 + standing_band[0]) \
        & (z < floor.z0 + standing_band[1])
    blocker_index = None
    if blockers.any():
        flat = scene.positions[blockers].copy()
        flat[:, 2] = 0.0
        blocker_index = SceneIndex.from_points(flat)
    cover = fmask & (np.abs(z - floor.z0) <= FLOOR_BAND)
    cover_index = None
    if cover.any():
        flat = scene.positions[cover].copy()
        flat[:, 2] = 0.0
        cover_index = SceneIndex.from_points(flat)

    lo = obj.footprint.min(axis=0) - radius
    hi = obj.footprint.max(axis=0) + radius
    out = np.empty((n, 2), dtype=np.float64)
    found = 0
    for _ in range(max_rejects):
        xy = rng.uniform(lo, hi)
        if distance_to_hull(xy[None, :], obj.footprint)[0] > radius:
            continue
        probe = np.array([xy[0], xy[1], 0.0])
        if cover_index is not None and \
                cover_index.nearest(probe).distance > 0.15:
            continue
        if blocker_index is not None and \
                blocker_index.nearest(probe).distance < clearance_min:
            continue
        out[found] = xy
        found += 1
        if found == n:
            return out
    raise NoValidTarget(
        f"no clear floor position within {radius} m of instance "
        f"{obj.instance_id} after {max_rejects} draws")
