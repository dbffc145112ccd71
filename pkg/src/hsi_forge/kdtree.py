"""Static k-d tree over 3D points with exact nearest-neighbor queries.

The tree is immutable after build. Construction median-splits on the
widest axis with leaf size 16 and is deterministic for a fixed input
order; ties in query distance resolve to the lowest point index, so
results are identical across backends and runs.
"""

from dataclasses import dataclass, field

import numpy as np

from .backends import kernels
from .errors import EmptyScene

LEAF_SIZE = 16


@dataclass(frozen=True)
class NearestHit:
    distance: float
    point_index: int


@dataclass(frozen=True)
class SceneIndex:
    """Immutable spatial index over an (N, 3) point array."""

    pts: np.ndarray            # reordered points, float64 (N, 3)
    idx: np.ndarray            # original index of each reordered point
    node_axis: np.ndarray      # -1 marks a leaf
    node_split: np.ndarray
    node_left: np.ndarray
    node_right: np.ndarray
    node_lo: np.ndarray
    node_hi: np.ndarray
    bounds_lo: np.ndarray = field(repr=False, default=None)
    bounds_hi: np.ndarray = field(repr=False, default=None)

    def __len__(self) -> int:
        return self.pts.shape[0]

    @classmethod
    def from_points(cls, points: np.ndarray, leaf_size: int = LEAF_SIZE) -> "SceneIndex":
        points = np.ascontiguousarray(points, dtype=np.float64)
        if points.ndim != 2 or points.shape[1] != 3:
            raise ValueError("points must be (N, 3)")
        n = points.shape[0]
        if n == 0:
            raise EmptyScene("cannot index zero points")

        order = np.arange(n, dtype=np.int64)
        axis_l, split_l, left_l, right_l, lo_l, hi_l = [], [], [], [], [], []

        def build(lo: int, hi: int) -> int:
            node = len(axis_l)
            axis_l.append(-1)
            split_l.append(0.0)
            left_l.append(-1)
            right_l.append(-1)
            lo_l.append(lo)
            hi_l.append(hi)
            if hi - lo <= leaf_size:
                return node
            seg = order[lo:hi]
            p = points[seg]
            extent = p.max(axis=0) - p.min(axis=0)
            ax = int(np.argmax(extent))
            # stable (value, original index) order makes the split unique
            seg_sorted = seg[np.lexsort((seg, p[:, ax]))]
            order[lo:hi] = seg_sorted
            mid = (lo + hi) // 2
            axis_l[node] = ax
            split_l[node] = points[order[mid], ax]
            left_l[node] = build(lo, mid)
            right_l[node] = build(mid, hi)
            return node

        build(0, n)
        pts = np.ascontiguousarray(points[order])
        return cls(
            pts=pts,
            idx=order,
            node_axis=np.asarray(axis_l, dtype=np.int32),
            node_split=np.asarray(split_l, dtype=np.float64),
            node_left=np.asarray(left_l, dtype=np.int32),
            node_right=np.asarray(right_l, dtype=np.int32),
            node_lo=np.asarray(lo_l, dtype=np.int32),
            node_hi=np.asarray(hi_l, dtype=np.int32),
            bounds_lo=points.min(axis=0),
            bounds_hi=points.max(axis=0),
        )

    def _args(self):
        return (self.pts, self.idx, self.node_axis, self.node_split,
                self.node_left, self.node_right, self.node_lo, self.node_hi)

    def nearest(self, query) -> NearestHit:
        """Exact nearest neighbor; distance ties break to the lowest index."""
        q = np.asarray(query, dtype=np.float64)
        d2, i = kernels.nn_query(*self._args(), q)
        return NearestHit(distance=float(np.sqrt(d2)), point_index=int(i))

    def min_distance_batch(self, queries: np.ndarray, floor: float | None = None) -> float:
        """Minimum nearest-neighbor distance over a batch of queries.

        With `floor` set, scanning may stop early once the running
        minimum drops below it; the result is then guaranteed <= floor
        but not necessarily the exact batch minimum.
        """
        q = np.ascontiguousarray(queries, dtype=np.float64)
        if q.ndim != 2 or q.shape[1] != 3 or q.shape[0] < 1:
            raise ValueError("queries must be (V, 3) with V >= 1")
        floor2 = -1.0 if floor is None else float(floor) ** 2
        d2, _, _ = kernels.batch_min(*self._args(), q, floor2)
        return float(np.sqrt(d2))

    def min_distance_batch_arg(self, queries: np.ndarray):
        """Like min_distance_batch but also returns (query row, point index)."""
        q = np.ascontiguousarray(queries, dtype=np.float64)
        d2, qi, pi = kernels.batch_min(*self._args(), q, -1.0)
        return float(np.sqrt(d2)), int(qi), int(pi)

    def radius_indices(self, query, radius: float) -> np.ndarray:
        """Sorted original indices of points strictly within `radius`."""
        q = np.asarray(query, dtype=np.float64)
        return kernels.radius_collect(*self._args(), q, float(radius) ** 2)


def build_index(scene) -> SceneIndex:
    """Index a ScenePointCloud (or bare (N, 3) array) for NN queries."""
    points = scene if isinstance(scene, np.ndarray) else scene.positions
    return SceneIndex.from_points(points)


def nearest(index: SceneIndex, query) -> NearestHit:
    return index.nearest(query)


def min_distance_batch(index: SceneIndex, queries, floor=None) -> float:
    return index.min_distance_batch(queries, floor=floor)
