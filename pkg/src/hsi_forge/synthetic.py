"""Synthetic rooms and motion clips for tests, demos, and benchmarks.

The body is a nine-box blocky humanoid (126 vertices: 8 corners + 6
face centers per box) with feet/hips/pelvis regions carved out of the
box layout. Poses are (center, size) tables per box; clips interpolate
between pose tables, which keeps every vertex path linear and easy to
reason about when placing clips against the box furniture built here.

Run ``python -m hsi_forge.synthetic --out DIR`` to write a demo corpus
of rooms and clips for the CLI.
"""

import argparse
from itertools import product
from pathlib import Path

import numpy as np

from .io import MotionClip, ScenePointCloud, save_motion, save_scene
from .seeding import rng_from

BOX_ORDER = ("foot_l", "foot_r", "shin_l", "shin_r", "thigh_l", "thigh_r",
             "pelvis", "torso", "head")
_CORNER_SIGNS = np.array(list(product((-1.0, 1.0), repeat=3)))
_FACE_SIGNS = np.array([[1, 0, 0], [-1, 0, 0], [0, 1, 0],
                        [0, -1, 0], [0, 0, 1], [0, 0, -1]], dtype=np.float64)
_BOX_SIGNS = np.vstack([_CORNER_SIGNS, _FACE_SIGNS])   # 14 points per box
POINTS_PER_BOX = len(_BOX_SIGNS)
BODY_V = POINTS_PER_BOX * len(BOX_ORDER)

SEAT_H = 0.42        # fixture seat height; sitting hip bottom rests 2.5 cm above
BED_H = 0.49
TABLE_H = 0.74

CLASS_NAMES = {1: "floor", 2: "wall", 3: "chair", 4: "stool", 5: "couch",
               6: "bed", 7: "table", 8: "desk", 9: "lamp", 10: "trash can"}


def _box_points(center, size) -> np.ndarray:
    return np.asarray(center) + _BOX_SIGNS * (np.asarray(size) / 2.0)


def _pose_vertices(pose: dict) -> np.ndarray:
    return np.vstack([_box_points(*pose[name]) for name in BOX_ORDER])


def _box_slice(name: str) -> np.ndarray:
    b = BOX_ORDER.index(name)
    return np.arange(b * POINTS_PER_BOX, (b + 1) * POINTS_PER_BOX)


def body_regions() -> dict:
    pelvis = _box_slice("pelvis")
    bottom_corners = [0, 2, 4, 6]          # corner signs with sz = -1
    bottom_face = [POINTS_PER_BOX - 1]     # the -z face center
    hips = pelvis[bottom_corners + bottom_face]
    markers = np.array([b * POINTS_PER_BOX + POINTS_PER_BOX - 1
                        for b in range(len(BOX_ORDER))])
    return {
        "feet": np.concatenate([_box_slice("foot_l"), _box_slice("foot_r")]),
        "hips": hips,
        "pelvis": pelvis,
        "markers": markers,
    }


def standing_pose(x: float = 0.0) -> dict:
    return {
        "foot_l": ((x + 0.03, 0.10, 0.03), (0.20, 0.10, 0.06)),
        "foot_r": ((x + 0.03, -0.10, 0.03), (0.20, 0.10, 0.06)),
        "shin_l": ((x, 0.10, 0.26), (0.08, 0.08, 0.40)),
        "shin_r": ((x, -0.10, 0.26), (0.08, 0.08, 0.40)),
        "thigh_l": ((x, 0.10, 0.64), (0.09, 0.09, 0.36)),
        "thigh_r": ((x, -0.10, 0.64), (0.09, 0.09, 0.36)),
        "pelvis": ((x, 0.0, 0.88), (0.16, 0.24, 0.12)),
        "torso": ((x, 0.0, 1.19), (0.20, 0.30, 0.50)),
        "head": ((x, 0.0, 1.56), (0.16, 0.16, 0.20)),
    }


def sitting_pose(x: float = 0.0) -> dict:
    """Seated with hips over the seat behind planted feet.

    Hip-box bottom sits at z = 0.445 so a 0.42-high fixture seat leaves
    a 2.5 cm gap: inside contact range, outside collision range.
    """
    return {
        "foot_l": ((x + 0.08, 0.10, 0.03), (0.20, 0.10, 0.06)),
        "foot_r": ((x + 0.08, -0.10, 0.03), (0.20, 0.10, 0.06)),
        "shin_l": ((x + 0.04, 0.10, 0.27), (0.08, 0.08, 0.38)),
        "shin_r": ((x + 0.04, -0.10, 0.27), (0.08, 0.08, 0.38)),
        "thigh_l": ((x - 0.10, 0.10, 0.525), (0.36, 0.09, 0.09)),
        "thigh_r": ((x - 0.10, -0.10, 0.525), (0.36, 0.09, 0.09)),
        "pelvis": ((x - 0.32, 0.0, 0.505), (0.16, 0.24, 0.12)),
        "torso": ((x - 0.32, 0.0, 0.815), (0.20, 0.30, 0.50)),
        "head": ((x - 0.32, 0.0, 1.165), (0.16, 0.16, 0.20)),
    }


def lying_pose(lift: float = 0.0) -> dict:
    """Supine along +x, body bottom at z = lift, pelvis centered at xy 0."""
    return {
        "pelvis": ((0.0, 0.0, lift + 0.08), (0.16, 0.24, 0.16)),
        "torso": ((-0.33, 0.0, lift + 0.11), (0.50, 0.30, 0.22)),
        "head": ((-0.68, 0.0, lift + 0.08), (0.20, 0.16, 0.16)),
        "thigh_l": ((0.26, 0.10, lift + 0.045), (0.36, 0.09, 0.09)),
        "thigh_r": ((0.26, -0.10, lift + 0.045), (0.36, 0.09, 0.09)),
        "shin_l": ((0.63, 0.10, lift + 0.04), (0.38, 0.08, 0.08)),
        "shin_r": ((0.63, -0.10, lift + 0.04), (0.38, 0.08, 0.08)),
        "foot_l": ((0.87, 0.10, lift + 0.05), (0.10, 0.10, 0.10)),
        "foot_r": ((0.87, -0.10, lift + 0.05), (0.10, 0.10, 0.10)),
    }


def _lerp_pose(a: dict, b: dict, alpha: float) -> dict:
    out = {}
    for name in BOX_ORDER:
        ca, sa = np.asarray(a[name][0]), np.asarray(a[name][1])
        cb, sb = np.asarray(b[name][0]), np.asarray(b[name][1])
        out[name] = (ca + alpha * (cb - ca), sa + alpha * (sb - sa))
    return out


def _clip(clip_id, action, frames_list, fps=30.0) -> MotionClip:
    return MotionClip(clip_id, action, fps,
                      np.stack(frames_list).astype(np.float32),
                      body_regions(), canonical=True)


def make_sit_clip(clip_id="sit0", frames=50, fps=30.0) -> MotionClip:
    """Stand at origin, settle backward onto a seat behind the feet."""
    start, end = standing_pose(0.0), sitting_pose(0.0)
    hold = max(4, frames // 5)
    out = []
    for f in range(frames):
        alpha = min(1.0, max(0.0, (f - hold) / (frames - 1 - hold)))
        out.append(_pose_vertices(_lerp_pose(start, end, alpha)))
    return _clip(clip_id, "sit", out, fps)


def make_standup_clip(clip_id="standup0", frames=50, fps=30.0) -> MotionClip:
    """Reverse of sit, shifted so the frame-0 pelvis sits at the origin."""
    start, end = sitting_pose(0.32), standing_pose(0.32)
    hold = max(4, frames // 5)
    out = []
    for f in range(frames):
        alpha = min(1.0, max(0.0, (f - hold) / (frames - 1 - hold)))
        out.append(_pose_vertices(_lerp_pose(start, end, alpha)))
    return _clip(clip_id, "stand_up", out, fps)


def make_walk_clip(clip_id="walk0", frames=60, fps=30.0,
                   distance=1.8) -> MotionClip:
    out = []
    for f in range(frames):
        out.append(_pose_vertices(standing_pose(distance * f / (frames - 1))))
    return _clip(clip_id, "walk", out, fps)


def make_lie_clip(clip_id="lie0", frames=40, fps=30.0) -> MotionClip:
    """Supine descent: hovers >= 2.5 cm until the final frame touches down."""
    out = []
    for f in range(frames - 1):
        lift = 0.06 - (0.06 - 0.025) * f / (frames - 2)
        out.append(_pose_vertices(lying_pose(lift)))
    out.append(_pose_vertices(lying_pose(0.0)))
    return _clip(clip_id, "lie_down", out, fps)


CLIP_MAKERS = {"sit": make_sit_clip, "stand_up": make_standup_clip,
               "walk": make_walk_clip, "lie_down": make_lie_clip}


# --------------------------------------------------------------------------
# rooms
# --------------------------------------------------------------------------

def _grid_surface(lo, hi, spacing, z) -> np.ndarray:
    xs = np.arange(lo[0], hi[0] + spacing / 2, spacing)
    ys = np.arange(lo[1], hi[1] + spacing / 2, spacing)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    pts = np.stack([gx.ravel(), gy.ravel(),
                    np.full(gx.size, float(z))], axis=1)
    return pts


def _box_surface(center, size, spacing=0.04, closed_bottom=False) -> np.ndarray:
    cx, cy, cz = center
    sx, sy, sz = size
    lo = np.array([cx - sx / 2, cy - sy / 2, cz])
    hi = np.array([cx + sx / 2, cy + sy / 2, cz + sz])
    pts = []
    xs = np.arange(lo[0], hi[0] + spacing / 2, spacing)
    ys = np.arange(lo[1], hi[1] + spacing / 2, spacing)
    zs = np.arange(lo[2], hi[2] + spacing / 2, spacing)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    pts.append(np.stack([gx.ravel(), gy.ravel(),
                         np.full(gx.size, hi[2])], axis=1))      # top
    if closed_bottom:
        pts.append(np.stack([gx.ravel(), gy.ravel(),
                             np.full(gx.size, lo[2])], axis=1))
    gx, gz = np.meshgrid(xs, zs, indexing="ij")
    for y in (lo[1], hi[1]):
        pts.append(np.stack([gx.ravel(), np.full(gx.size, y),
                             gz.ravel()], axis=1))               # y sides
    gy, gz = np.meshgrid(ys, zs, indexing="ij")
    for x in (lo[0], hi[0]):
        pts.append(np.stack([np.full(gy.size, x), gy.ravel(),
                             gz.ravel()], axis=1))               # x sides
    return np.vstack(pts)


FURNITURE_SIZES = {
    "chair": (0.45, 0.45, SEAT_H),
    "stool": (0.35, 0.35, SEAT_H),
    "couch": (1.8, 0.8, SEAT_H),        # backrest added separately
    "bed": (2.2, 1.6, BED_H),
    "table": (1.8, 0.9, TABLE_H),
    "desk": (1.2, 0.6, TABLE_H),
    "trash can": (0.3, 0.3, 0.4),
}

DEFAULT_FURNITURE = ("chair", "chair", "stool", "couch", "bed", "table",
                     "desk", "trash can")


def make_room(room_id: str, seed: int, half: float = 3.0,
              furniture=DEFAULT_FURNITURE, floor_spacing=0.08,
              wall_spacing=0.15, box_spacing=0.04,
              lamp_on_desk=True):
    """Deterministic furnished room; returns (scene, ground-truth dict).

    Coordinates stay within about +-3.2 m of the origin so float32
    record blobs keep pairwise distances well inside the 1e-6 m
    isometry budget.
    """
    rng = rng_from("room", room_id, seed)
    class_ids = {v: k for k, v in CLASS_NAMES.items()}

    chunks, semantics, instances = [], [], []

    floor = _grid_surface((-half, -half), (half, half), floor_spacing, 0.0)
    chunks.append(floor)
    semantics.append(np.full(len(floor), class_ids["floor"]))
    instances.append(np.zeros(len(floor), dtype=np.int64))

    wall_h = 2.4
    for fixed_axis, fixed_val in ((0, -half), (0, half), (1, -half), (1, half)):
        line = np.arange(-half, half + wall_spacing / 2, wall_spacing)
        zs = np.arange(0.0, wall_h + wall_spacing / 2, wall_spacing)
        ga, gz = np.meshgrid(line, zs, indexing="ij")
        wall = np.empty((ga.size, 3))
        wall[:, fixed_axis] = fixed_val
        wall[:, 1 - fixed_axis] = ga.ravel()
        wall[:, 2] = gz.ravel()
        chunks.append(wall)
        semantics.append(np.full(len(wall), class_ids["wall"]))
        instances.append(np.zeros(len(wall), dtype=np.int64))

    truth = {}
    placed = []   # (center_xy, size_xy) for separation tests
    next_instance = 1
    for kind in furniture:
        size = FURNITURE_SIZES[kind]
        margin = 0.45
        for _ in range(200):
            cx = rng.uniform(-half + size[0] / 2 + margin,
                             half - size[0] / 2 - margin)
            cy = rng.uniform(-half + size[1] / 2 + margin,
                             half - size[1] / 2 - margin)
            ok = True
            for (px, py), (pw, ph) in placed:
                if abs(cx - px) < (size[0] + pw) / 2 + 0.65 and \
                        abs(cy - py) < (size[1] + ph) / 2 + 0.65:
                    ok = False
                    break
            if ok:
                break
        else:
            continue   # room too crowded; skip this piece
        placed.append(((cx, cy), (size[0], size[1])))

        pts = _box_surface((cx, cy, 0.0), size, spacing=box_spacing)
        if kind == "couch":
            back = _box_surface((cx, cy + size[1] / 2 - 0.10, size[2]),
                                (size[0], 0.2, 0.43), spacing=box_spacing)
            pts = np.vstack([pts, back])
        chunks.append(pts)
        semantics.append(np.full(len(pts), class_ids[kind]))
        instances.append(np.full(len(pts), next_instance, dtype=np.int64))
        truth[next_instance] = {"class": kind, "center": (cx, cy),
                                "size": size,
                                "centroid": pts.mean(axis=0)}
        if kind == "desk" and lamp_on_desk:
            next_instance += 1
            lamp = _box_surface((cx, cy, FURNITURE_SIZES["desk"][2]),
                                (0.15, 0.15, 0.35), spacing=0.03,
                                closed_bottom=True)
            chunks.append(lamp)
            semantics.append(np.full(len(lamp), class_ids["lamp"]))
            instances.append(np.full(len(lamp), next_instance, dtype=np.int64))
            truth[next_instance] = {"class": "lamp", "center": (cx, cy),
                                    "size": (0.15, 0.15, 0.35),
                                    "centroid": lamp.mean(axis=0)}
        next_instance += 1

    positions = np.vstack(chunks)
    semantic = np.concatenate(semantics).astype(np.int32)
    rng_color = rng_from("color", room_id, seed)
    colors = rng_color.integers(0, 256, size=(len(positions), 3),
                                dtype=np.int64).astype(np.uint8)
    scene = ScenePointCloud(
        positions=positions, colors=colors, semantic=semantic,
        instance=np.concatenate(instances).astype(np.int32),
        class_names=CLASS_NAMES, scene_id=room_id)
    return scene, truth


def make_box_scene(scene_id: str, items, class_names=None,
                   with_floor=True, half=3.0, spacing=0.05):
    """Hand-specified box objects for relation/language tests.

    `items` is a list of (class_name, center_xyz, size_xyz); instance
    ids are assigned 1..K in order.
    """
    names = dict(class_names or {})
    if with_floor:
        names.setdefault(1, "floor")
    next_id = max(names) + 1 if names else 1
    chunks, semantics, instances = [], [], []
    if with_floor:
        floor = _grid_surface((-half, -half), (half, half), 0.1, 0.0)
        chunks.append(floor)
        semantics.append(np.full(len(floor), 1))
        instances.append(np.zeros(len(floor), dtype=np.int64))
    for inst, (cname, center, size) in enumerate(items, start=1):
        cid = None
        for k, v in names.items():
            if v == cname:
                cid = k
                break
        if cid is None:
            cid = next_id
            names[cid] = cname
            next_id += 1
        pts = _box_surface((center[0], center[1], center[2]), size,
                           spacing=spacing, closed_bottom=True)
        chunks.append(pts)
        semantics.append(np.full(len(pts), cid))
        instances.append(np.full(len(pts), inst, dtype=np.int64))
    positions = np.vstack(chunks)
    return ScenePointCloud(
        positions=positions,
        colors=np.zeros((len(positions), 3), dtype=np.uint8),
        semantic=np.concatenate(semantics).astype(np.int32),
        instance=np.concatenate(instances).astype(np.int32),
        class_names=names, scene_id=scene_id)


def write_demo_corpus(out_dir, n_rooms: int = 5, seed: int = 0,
                      clips_per_action: int = 2):
    """Scenes + clips on disk, ready for `hsi-forge synth`."""
    out_dir = Path(out_dir)
    scene_dir = out_dir / "scenes"
    clip_dir = out_dir / "clips"
    scene_dir.mkdir(parents=True, exist_ok=True)
    clip_dir.mkdir(parents=True, exist_ok=True)
    for i in range(n_rooms):
        scene, _ = make_room(f"room{i:03d}", seed + i)
        save_scene(scene, scene_dir / f"{scene.scene_id}.ply")
    frame_jitter = {"sit": 50, "stand_up": 46, "walk": 60, "lie_down": 40}
    for action, maker in CLIP_MAKERS.items():
        for j in range(clips_per_action):
            clip = maker(f"{action}{j}", frames=frame_jitter[action] + 2 * j)
            save_motion(clip, clip_dir / f"{clip.clip_id}.json")
    return scene_dir, clip_dir


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        description="Write a synthetic demo corpus (rooms + clips)")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--rooms", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--clips-per-action", type=int, default=2)
    args = parser.parse_args(argv)
    scene_dir, clip_dir = write_demo_corpus(
        args.out, n_rooms=args.rooms, seed=args.seed,
        clips_per_action=args.clips_per_action)
    print(f"scenes: {scene_dir}")
    print(f"clips:  {clip_dir}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
