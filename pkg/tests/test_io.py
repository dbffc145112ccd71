import json

import numpy as np
import pytest

from hsi_forge.errors import (EmptyScene, InconsistentVertexCount,
                              MissingRegion, ParseError, SchemaError)
from hsi_forge.io import (MotionClip, ScenePointCloud, load_motion,
                          load_scene, save_motion, save_scene)
from hsi_forge.synthetic import make_room, make_walk_clip


MINIMAL_PLY = """ply
format ascii 1.0
comment class 3 chair
element vertex 1
property double x
property double y
property double z
property uchar red
property uchar green
property uchar blue
property int semantic_label
property int instance_label
end_header
0.5 -1.25 0.0 10 20 30 3 1
"""


def test_minimal_ply_one_vertex(tmp_path):
    path = tmp_path / "mini.ply"
    path.write_text(MINIMAL_PLY)
    scene = load_scene(path)
    assert len(scene) == 1
    assert np.array_equal(scene.positions[0], [0.5, -1.25, 0.0])
    assert scene.class_names[3] == "chair"
    assert scene.instance[0] == 1


def test_ply_missing_instance_label_schema_error(tmp_path):
    text = MINIMAL_PLY.replace("property int instance_label\n", "")
    text = text.replace("0.5 -1.25 0.0 10 20 30 3 1",
                        "0.5 -1.25 0.0 10 20 30 3")
    path = tmp_path / "bad.ply"
    path.write_text(text)
    with pytest.raises(SchemaError):
        load_scene(path)


def test_not_a_ply(tmp_path):
    path = tmp_path / "junk.ply"
    path.write_text("hello\n")
    with pytest.raises(ParseError):
        load_scene(path)


@pytest.mark.parametrize("binary", [True, False])
def test_room_roundtrips_bit_exact(tmp_path, binary):
    scene, _ = make_room("rt", seed=3)
    path = tmp_path / "rt.ply"
    save_scene(scene, path, binary=binary)
    back = load_scene(path)
    assert back.scene_id == scene.scene_id
    assert np.array_equal(back.positions, scene.positions)
    assert np.array_equal(back.colors, scene.colors)
    assert np.array_equal(back.semantic, scene.semantic)
    assert np.array_equal(back.instance, scene.instance)
    assert back.class_names == scene.class_names


def test_json_scene_roundtrip(tmp_path):
    scene, _ = make_room("js", seed=4, furniture=("chair",))
    path = tmp_path / "js.json"
    save_scene(scene, path)
    back = load_scene(path)
    assert np.array_equal(back.positions, scene.positions)
    assert back.class_names == scene.class_names


def test_save_is_deterministic(tmp_path):
    scene, _ = make_room("det", seed=5, furniture=("stool",))
    a, b = tmp_path / "a.ply", tmp_path / "b.ply"
    save_scene(scene, a)
    save_scene(scene, b)
    assert a.read_bytes() == b.read_bytes()


def test_scene_invariant_instance_single_class():
    with pytest.raises(SchemaError):
        ScenePointCloud(
            positions=np.zeros((2, 3)),
            colors=np.zeros((2, 3)),
            semantic=np.array([1, 2]),
            instance=np.array([5, 5]),
            class_names={1: "a", 2: "b"},
            scene_id="bad")


def test_scene_invariant_class_names_cover():
    with pytest.raises(SchemaError):
        ScenePointCloud(
            positions=np.zeros((1, 3)), colors=np.zeros((1, 3)),
            semantic=np.array([7]), instance=np.array([0]),
            class_names={1: "floor"}, scene_id="bad")


def test_empty_scene():
    with pytest.raises(EmptyScene):
        ScenePointCloud(positions=np.empty((0, 3)), colors=np.empty((0, 3)),
                        semantic=np.empty(0), instance=np.empty(0),
                        class_names={}, scene_id="empty")


# ---- motion ----

def _tiny_header(frames, v=4, count=2):
    return {
        "clip_id": "t", "action": "walk", "fps": 30.0,
        "frame_count": count, "vertex_count": v,
        "regions": {"feet": [0], "hips": [1], "pelvis": [2]},
        "canonical": False,
        "frames": frames,
    }


def test_motion_inline_frames_load(tmp_path):
    frames = [[[0, 0, 0], [0, 0, 1], [0, 1, 0], [1, 0, 0]]] * 2
    path = tmp_path / "t.json"
    path.write_text(json.dumps(_tiny_header(frames)))
    clip = load_motion(path, frame_range=None)
    assert clip.frame_count == 2
    assert clip.vertex_count == 4


def test_motion_inconsistent_vertex_count(tmp_path):
    frames = [[[0, 0, 0]] * 4, [[0, 0, 0]] * 5]
    path = tmp_path / "t.json"
    path.write_text(json.dumps(_tiny_header(frames)))
    with pytest.raises(InconsistentVertexCount):
        load_motion(path, frame_range=None)


def test_motion_missing_region(tmp_path):
    header = _tiny_header([[[0, 0, 0]] * 4] * 2)
    del header["regions"]["hips"]
    path = tmp_path / "t.json"
    path.write_text(json.dumps(header))
    with pytest.raises(MissingRegion):
        load_motion(path, frame_range=None)


def test_motion_blob_roundtrip_bit_exact(tmp_path):
    clip = make_walk_clip("w60", frames=60)
    path = save_motion(clip, tmp_path / "w60.json")
    back = load_motion(path)
    assert back.clip_id == clip.clip_id
    assert back.action == clip.action
    assert back.fps == clip.fps
    assert np.array_equal(back.frames, clip.frames)
    assert back.canonical
    for name, idx in clip.regions.items():
        assert np.array_equal(back.regions[name], idx)


def test_motion_frame_policy_range(tmp_path):
    clip = make_walk_clip("w10", frames=10)
    path = save_motion(clip, tmp_path / "w10.json")
    with pytest.raises(ParseError):
        load_motion(path)                    # default policy: 30..120
    assert load_motion(path, frame_range=None).frame_count == 10


def test_motion_truncated_blob(tmp_path):
    clip = make_walk_clip("w30", frames=30)
    path = save_motion(clip, tmp_path / "w30.json")
    blob = path.with_suffix(".bin")
    blob.write_bytes(blob.read_bytes()[:-8])
    with pytest.raises(InconsistentVertexCount):
        load_motion(path)


def test_canonical_flag_checked():
    frames = np.zeros((2, 4, 3), dtype=np.float32)
    frames[:, 2, 0] = 0.5   # pelvis off origin
    clip = MotionClip("c", "walk", 30.0, frames,
                      {"feet": [0], "hips": [1], "pelvis": [2]},
                      canonical=True)
    with pytest.raises(ParseError):
        clip.validate(frame_range=None)
