"""Rigid-transform machinery for motion clips and per-frame body views."""

from dataclasses import dataclass

import numpy as np

from .errors import IndexOutOfRange, MissingRegion
from .geometry import normalize_yaw, yaw_matrix


@dataclass(frozen=True)
class RigidPlacement:
    """Global translation plus rotation about the gravity axis."""

    translation: tuple        # (x, y, z) meters
    yaw: float                # radians, normalized to [0, 2*pi)

    def __post_init__(self):
        t = tuple(float(v) for v in self.translation)
        if len(t) != 3 or not all(np.isfinite(t)):
            raise ValueError(f"bad translation {self.translation!r}")
        object.__setattr__(self, "translation", t)
        object.__setattr__(self, "yaw", normalize_yaw(self.yaw))

    @property
    def matrix(self) -> np.ndarray:
        return yaw_matrix(self.yaw)

    def inverse(self) -> "RigidPlacement":
        r_inv = yaw_matrix(-self.yaw)
        t_inv = -(r_inv @ np.asarray(self.translation))
        return RigidPlacement(tuple(t_inv), -self.yaw)

    def apply(self, points: np.ndarray) -> np.ndarray:
        """R_yaw @ v + t for every (..., 3) point, in float64."""
        pts = np.asarray(points, dtype=np.float64)
        return pts @ self.matrix.T + np.asarray(self.translation)

    def to_json(self) -> dict:
        return {"translation": list(self.translation), "yaw": self.yaw}

    @classmethod
    def from_json(cls, payload: dict) -> "RigidPlacement":
        return cls(tuple(payload["translation"]), float(payload["yaw"]))


@dataclass
class BodyFrame:
    """One frame's vertices with region views resolved by name."""

    vertices: np.ndarray      # (V, 3)
    regions: dict             # name -> index array

    def region_vertices(self, name: str) -> np.ndarray:
        if name not in self.regions or self.regions[name].size == 0:
            raise MissingRegion(name)
        return self.vertices[self.regions[name]]


@dataclass
class MarkerSequence:
    """Per-frame marker coordinates, flattened to (T, M*3)."""

    coords: np.ndarray

    @property
    def frame_count(self) -> int:
        return self.coords.shape[0]


def apply_placement(clip, placement: RigidPlacement) -> np.ndarray:
    """Transform every frame by the placement; local poses untouched.

    Returns (F, V, 3) float64 so downstream constraint checks do not
    accumulate float32 error.
    """
    frames = np.asarray(clip.frames, dtype=np.float64)
    return frames @ placement.matrix.T + np.asarray(placement.translation)


def frame_view(clip, frames: np.ndarray, frame: int) -> BodyFrame:
    """BodyFrame over already-transformed frames, sharing clip regions."""
    return BodyFrame(vertices=frames[frame], regions=clip.regions)


def region_centroid(frame: BodyFrame, region: str) -> np.ndarray:
    return frame.region_vertices(region).astype(np.float64).mean(axis=0)


def extract_markers(frames: np.ndarray, marker_indices) -> MarkerSequence:
    """Gather marker vertices per frame into a flat (T, M*3) array."""
    idx = np.asarray(marker_indices, dtype=np.int64)
    if idx.size == 0:
        raise IndexOutOfRange("marker index set is empty")
    v = frames.shape[1]
    if idx.min() < 0 or idx.max() >= v:
        raise IndexOutOfRange(f"marker indices outside [0, {v})")
    gathered = np.asarray(frames, dtype=np.float64)[:, idx, :]
    return MarkerSequence(coords=gathered.reshape(gathered.shape[0], -1))
