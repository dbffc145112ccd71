"""On-disk formats: labeled scene point clouds and motion clips.

Scenes travel as PLY (ascii or binary_little_endian) with per-vertex
integer properties ``semantic_label`` / ``instance_label`` plus
``comment class <id> <name>`` lines, or as a JSON manifest for
hand-built fixtures. Motions are a JSON header plus a little-endian
float32 F x V x 3 blob. Loaders never recenter, rescale, or otherwise
touch numeric data.
"""

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (EmptyScene, InconsistentVertexCount, MissingRegion,
                     ParseError, SchemaError)

REQUIRED_REGIONS = ("feet", "hips", "pelvis")
DEFAULT_FRAME_RANGE = (30, 120)

_PLY_DTYPES = {
    "char": "i1", "int8": "i1",
    "uchar": "u1", "uint8": "u1",
    "short": "i2", "int16": "i2",
    "ushort": "u2", "uint16": "u2",
    "int": "i4", "int32": "i4",
    "uint": "u4", "uint32": "u4",
    "float": "f4", "float32": "f4",
    "double": "f8", "float64": "f8",
}


@dataclass
class ScenePointCloud:
    """Colored, semantically and instance-labeled point cloud (meters, z-up)."""

    positions: np.ndarray          # (N, 3) float64
    colors: np.ndarray             # (N, 3) uint8
    semantic: np.ndarray           # (N,) int32
    instance: np.ndarray           # (N,) int32, 0 = unassigned
    class_names: dict              # semantic id -> string
    scene_id: str
    up_axis: str = "z"

    def __post_init__(self):
        self.positions = np.ascontiguousarray(self.positions, dtype=np.float64)
        self.colors = np.ascontiguousarray(self.colors, dtype=np.uint8)
        self.semantic = np.ascontiguousarray(self.semantic, dtype=np.int32)
        self.instance = np.ascontiguousarray(self.instance, dtype=np.int32)
        self.class_names = {int(k): str(v) for k, v in self.class_names.items()}
        self.validate()

    def __len__(self) -> int:
        return self.positions.shape[0]

    def validate(self):
        n = self.positions.shape[0]
        if n < 1:
            raise EmptyScene(f"scene {self.scene_id!r} has no points")
        if self.positions.shape != (n, 3) or not np.isfinite(self.positions).all():
            raise SchemaError("positions must be finite (N, 3)")
        for name, arr in (("colors", self.colors), ("semantic", self.semantic),
                          ("instance", self.instance)):
            if arr.shape[0] != n:
                raise SchemaError(f"{name} length {arr.shape[0]} != point count {n}")
        present = set(np.unique(self.semantic).tolist())
        missing = present - set(self.class_names)
        if missing:
            raise SchemaError(f"class_names missing ids {sorted(missing)}")
        for inst in np.unique(self.instance):
            if inst == 0:
                continue
            classes = np.unique(self.semantic[self.instance == inst])
            if classes.shape[0] != 1:
                raise SchemaError(
                    f"instance {inst} spans semantic classes {classes.tolist()}")

    def class_id(self, name: str):
        for cid, cname in self.class_names.items():
            if cname == name:
                return cid
        return None


@dataclass
class MotionClip:
    """Per-frame body vertex clouds with named regions and an action tag."""

    clip_id: str
    action: str
    fps: float
    frames: np.ndarray             # (F, V, 3) float32
    regions: dict                  # name -> int64 index array into [0, V)
    canonical: bool = False

    def __post_init__(self):
        self.frames = np.ascontiguousarray(self.frames, dtype=np.float32)
        self.regions = {str(k): np.ascontiguousarray(v, dtype=np.int64)
                        for k, v in self.regions.items()}

    @property
    def frame_count(self) -> int:
        return self.frames.shape[0]

    @property
    def vertex_count(self) -> int:
        return self.frames.shape[1]

    @classmethod
    def from_frame_list(cls, clip_id, action, fps, frame_arrays, regions,
                        canonical=False):
        """Build from per-frame (V, 3) arrays, rejecting inconsistent V."""
        arrays = [np.asarray(f, dtype=np.float32) for f in frame_arrays]
        vcounts = {a.shape[0] for a in arrays}
        if len(vcounts) != 1:
            raise InconsistentVertexCount(
                f"frames declare vertex counts {sorted(vcounts)}")
        return cls(clip_id, action, fps, np.stack(arrays), regions, canonical)

    def validate(self, frame_range=DEFAULT_FRAME_RANGE):
        if self.frames.ndim != 3 or self.frames.shape[2] != 3:
            raise ParseError("frames must be (F, V, 3)")
        if not np.isfinite(self.frames).all():
            raise ParseError("frames contain non-finite values")
        f, v = self.frame_count, self.vertex_count
        if frame_range is not None and not frame_range[0] <= f <= frame_range[1]:
            raise ParseError(
                f"frame count {f} outside policy range {frame_range}")
        for name in REQUIRED_REGIONS:
            if name not in self.regions or self.regions[name].size == 0:
                raise MissingRegion(name)
        for name, idx in self.regions.items():
            if idx.size and (idx.min() < 0 or idx.max() >= v):
                raise ParseError(f"region {name!r} indices outside [0, {v})")
        if self.canonical:
            pelvis = self.frames[0, self.regions["pelvis"]].astype(np.float64)
            if np.linalg.norm(pelvis.mean(axis=0)[:2]) >= 1e-6:
                raise ParseError("canonical clip has off-origin frame-0 pelvis")
        return self

    def region(self, name: str) -> np.ndarray:
        if name not in self.regions or self.regions[name].size == 0:
            raise MissingRegion(name)
        return self.regions[name]


# --------------------------------------------------------------------------
# scenes
# --------------------------------------------------------------------------

def load_scene(path, format: str | None = None) -> ScenePointCloud:
    """Read a labeled scene from PLY or a JSON manifest.

    `format` is "ply" or "json"; inferred from the suffix when omitted.
    """
    path = Path(path)
    if format is None:
        format = "json" if path.suffix.lower() == ".json" else "ply"
    if format not in ("ply", "json"):
        raise ValueError(f"unknown scene format {format!r}")
    if format == "json":
        return _load_scene_json(path)
    return _load_scene_ply(path)


def save_scene(scene: ScenePointCloud, path, format: str | None = None,
               binary: bool = True) -> Path:
    path = Path(path)
    if format is None:
        format = "json" if path.suffix.lower() == ".json" else "ply"
    if format == "json":
        payload = {
            "scene_id": scene.scene_id,
            "up_axis": scene.up_axis,
            "class_names": {str(k): v for k, v in scene.class_names.items()},
            "points": {
                "position": scene.positions.tolist(),
                "color": scene.colors.tolist(),
                "semantic": scene.semantic.tolist(),
                "instance": scene.instance.tolist(),
            },
        }
        _write_json(path, payload)
        return path
    _save_scene_ply(scene, path, binary=binary)
    return path


def _load_scene_json(path: Path) -> ScenePointCloud:
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"{path}: {exc}") from exc
    try:
        pts = payload["points"]
        return ScenePointCloud(
            positions=np.asarray(pts["position"], dtype=np.float64).reshape(-1, 3),
            colors=np.asarray(pts.get("color",
                                      np.zeros((len(pts["position"]), 3))),
                              dtype=np.uint8),
            semantic=np.asarray(pts["semantic"], dtype=np.int32),
            instance=np.asarray(pts["instance"], dtype=np.int32),
            class_names={int(k): v for k, v in payload["class_names"].items()},
            scene_id=payload.get("scene_id", Path(path).stem),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"{path}: {exc}") from exc


def _parse_ply_header(fh):
    magic = fh.readline().strip()
    if magic != b"ply":
        raise ParseError("not a PLY file")
    fmt = None
    comments = []
    elements = []  # (name, count, [(prop, dtype_str), ...])
    while True:
        line = fh.readline()
        if not line:
            raise ParseError("unterminated PLY header")
        tok = line.decode("ascii", "replace").strip().split()
        if not tok:
            continue
        if tok[0] == "end_header":
            break
        if tok[0] == "format":
            fmt = tok[1]
        elif tok[0] == "comment":
            comments.append(" ".join(tok[1:]))
        elif tok[0] == "element":
            elements.append((tok[1], int(tok[2]), []))
        elif tok[0] == "property":
            if not elements:
                raise ParseError("property before element")
            if tok[1] == "list":
                elements[-1][2].append((tok[-1], "list"))
            else:
                if tok[1] not in _PLY_DTYPES:
                    raise ParseError(f"unsupported property type {tok[1]}")
                elements[-1][2].append((tok[-1], _PLY_DTYPES[tok[1]]))
    if fmt not in ("ascii", "binary_little_endian"):
        raise ParseError(f"unsupported PLY format {fmt!r}")
    return fmt, comments, elements


def _load_scene_ply(path: Path) -> ScenePointCloud:
    with open(path, "rb") as fh:
        fmt, comments, elements = _parse_ply_header(fh)
        if not elements or elements[0][0] != "vertex":
            raise ParseError("vertex element must come first")
        name, count, props = elements[0]
        prop_names = [p for p, _ in props]
        if any(d == "list" for _, d in props):
            raise ParseError("list properties unsupported in vertex element")
        for required in ("x", "y", "z"):
            if required not in prop_names:
                raise SchemaError(f"missing vertex property {required!r}")
        for required in ("semantic_label", "instance_label"):
            if required not in prop_names:
                raise SchemaError(f"missing vertex property {required!r}")
        if fmt == "binary_little_endian":
            dtype = np.dtype([(p, "<" + d) for p, d in props])
            raw = fh.read(count * dtype.itemsize)
            if len(raw) != count * dtype.itemsize:
                raise ParseError("truncated vertex data")
            data = np.frombuffer(raw, dtype=dtype)
        else:
            rows = []
            for _ in range(count):
                line = fh.readline()
                if not line:
                    raise ParseError("truncated vertex data")
                vals = line.split()
                if len(vals) != len(props):
                    raise ParseError("vertex row width mismatch")
                rows.append([float(v) for v in vals])
            arr = np.asarray(rows, dtype=np.float64).reshape(count, len(props))
            data = {p: arr[:, i] for i, (p, _) in enumerate(props)}

    positions = np.stack([np.asarray(data["x"], dtype=np.float64),
                          np.asarray(data["y"], dtype=np.float64),
                          np.asarray(data["z"], dtype=np.float64)], axis=1)
    if all(c in prop_names for c in ("red", "green", "blue")):
        colors = np.stack([np.asarray(data[c]) for c in
                           ("red", "green", "blue")], axis=1).astype(np.uint8)
    else:
        colors = np.zeros((count, 3), dtype=np.uint8)

    scene_id = Path(path).stem
    class_names = {}
    for comment in comments:
        tok = comment.split()
        if len(tok) >= 2 and tok[0] == "scene_id":
            scene_id = tok[1]
        elif len(tok) >= 3 and tok[0] == "class":
            class_names[int(tok[1])] = " ".join(tok[2:])

    semantic = np.asarray(data["semantic_label"], dtype=np.int32)
    for sid in np.unique(semantic):
        class_names.setdefault(int(sid), f"class_{int(sid)}")
    return ScenePointCloud(
        positions=positions,
        colors=colors,
        semantic=semantic,
        instance=np.asarray(data["instance_label"], dtype=np.int32),
        class_names=class_names,
        scene_id=scene_id,
    )


def _save_scene_ply(scene: ScenePointCloud, path: Path, binary: bool = True):
    fmt = "binary_little_endian" if binary else "ascii"
    header = ["ply", f"format {fmt} 1.0", f"comment scene_id {scene.scene_id}"]
    for cid in sorted(scene.class_names):
        header.append(f"comment class {cid} {scene.class_names[cid]}")
    header.append(f"element vertex {len(scene)}")
    header += [f"property double {ax}" for ax in "xyz"]
    header += [f"property uchar {c}" for c in ("red", "green", "blue")]
    header += ["property int semantic_label", "property int instance_label"]
    header.append("end_header")

    with open(path, "wb") as fh:
        fh.write(("\n".join(header) + "\n").encode("ascii"))
        if binary:
            dtype = np.dtype([("x", "<f8"), ("y", "<f8"), ("z", "<f8"),
                              ("red", "u1"), ("green", "u1"), ("blue", "u1"),
                              ("semantic_label", "<i4"),
                              ("instance_label", "<i4")])
            rec = np.empty(len(scene), dtype=dtype)
            rec["x"], rec["y"], rec["z"] = scene.positions.T
            rec["red"], rec["green"], rec["blue"] = scene.colors.T
            rec["semantic_label"] = scene.semantic
            rec["instance_label"] = scene.instance
            fh.write(rec.tobytes())
        else:
            for i in range(len(scene)):
                x, y, z = (float(v) for v in scene.positions[i])
                c = scene.colors[i]
                fh.write((f"{x!r} {y!r} {z!r} "
                          f"{c[0]} {c[1]} {c[2]} "
                          f"{scene.semantic[i]} {scene.instance[i]}\n")
                         .encode("ascii"))


# --------------------------------------------------------------------------
# motions
# --------------------------------------------------------------------------

def load_motion(path, frame_range=DEFAULT_FRAME_RANGE) -> MotionClip:
    """Read a motion clip from its JSON header (+ sibling .bin blob).

    `frame_range=None` disables the default 30..120 frame-count policy.
    """
    path = Path(path)
    try:
        header = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"{path}: {exc}") from exc
    try:
        clip_id = header["clip_id"]
        action = header["action"]
        fps = float(header["fps"])
        f = int(header["frame_count"])
        v = int(header["vertex_count"])
        regions = {k: np.asarray(ix, dtype=np.int64)
                   for k, ix in header["regions"].items()}
        canonical = bool(header.get("canonical", False))
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"{path}: {exc}") from exc

    if "frames" in header:  # inline frames, hand-built fixtures
        clip = MotionClip.from_frame_list(
            clip_id, action, fps,
            [np.asarray(fr, dtype=np.float32) for fr in header["frames"]],
            regions, canonical)
        if clip.frame_count != f or clip.vertex_count != v:
            raise InconsistentVertexCount(
                f"header declares {f}x{v}, frames are "
                f"{clip.frame_count}x{clip.vertex_count}")
    else:
        blob = path.with_suffix(".bin")
        try:
            raw = blob.read_bytes()
        except OSError as exc:
            raise ParseError(f"{blob}: {exc}") from exc
        expected = f * v * 3 * 4
        if len(raw) != expected:
            raise InconsistentVertexCount(
                f"{blob}: {len(raw)} bytes, header implies {expected}")
        frames = np.frombuffer(raw, dtype="<f4").reshape(f, v, 3).copy()
        clip = MotionClip(clip_id, action, fps, frames, regions, canonical)
    return clip.validate(frame_range=frame_range)


def save_motion(clip: MotionClip, path) -> Path:
    """Write header JSON + float32 blob next to it; returns the header path."""
    path = Path(path)
    if path.suffix != ".json":
        path = path.with_suffix(".json")
    header = {
        "clip_id": clip.clip_id,
        "action": clip.action,
        "fps": clip.fps,
        "frame_count": clip.frame_count,
        "vertex_count": clip.vertex_count,
        "regions": {k: v.tolist() for k, v in clip.regions.items()},
        "canonical": clip.canonical,
    }
    _write_json(path, header)
    path.with_suffix(".bin").write_bytes(
        np.ascontiguousarray(clip.frames, dtype="<f4").tobytes())
    return path


def _write_json(path: Path, payload) -> None:
    path.write_text(
        json.dumps(payload, sort_keys=True, indent=2, ensure_ascii=False) + "\n",
        encoding="utf-8")
