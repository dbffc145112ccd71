import numpy as np
import pytest

from hsi_forge import _kernels_numpy
from hsi_forge.backends import kernels
from hsi_forge.errors import EmptyScene
from hsi_forge.kdtree import SceneIndex, build_index


def brute_nearest(points, q):
    """O(N) oracle: exact squared distances, ties to the lowest index."""
    d2 = ((points - q) ** 2).sum(axis=1)
    dmin = d2.min()
    return np.sqrt(dmin), int(np.flatnonzero(d2 == dmin).min())


def test_single_point_index():
    ix = SceneIndex.from_points(np.array([[0.0, 0.0, 0.0]]))
    assert len(ix) == 1
    hit = ix.nearest([3.0, 4.0, 0.0])
    assert hit.distance == 5.0
    assert hit.point_index == 0


def test_empty_raises():
    with pytest.raises(EmptyScene):
        SceneIndex.from_points(np.empty((0, 3)))


def test_query_on_indexed_point_is_zero(rng):
    pts = rng.uniform(-2, 2, size=(257, 3))
    ix = SceneIndex.from_points(pts)
    hit = ix.nearest(pts[123])
    assert hit.distance == 0.0
    assert hit.point_index == 123


def test_bounding_box_and_size(rng):
    pts = rng.uniform(-5, 9, size=(32768, 3))
    ix = SceneIndex.from_points(pts)
    assert len(ix) == 32768
    assert np.array_equal(ix.bounds_lo, pts.min(axis=0))
    assert np.array_equal(ix.bounds_hi, pts.max(axis=0))


def test_nearest_matches_brute_force_oracle(rng):
    pts = rng.uniform(-5, 5, size=(1000, 3))
    ix = SceneIndex.from_points(pts)
    for q in rng.uniform(-6, 6, size=(100, 3)):
        hit = ix.nearest(q)
        d, i = brute_nearest(pts, q)
        assert hit.distance == d
        assert hit.point_index == i


def test_tie_breaks_to_lowest_index():
    pts = np.array([[1.0, 0, 0], [0, 0, 0], [0, 0, 0], [-1.0, 0, 0]])
    ix = SceneIndex.from_points(pts)
    assert ix.nearest([0.0, 0.5, 0.0]).point_index == 1
    # symmetric pair equidistant from the query
    pts = np.array([[1.0, 0, 0], [-1.0, 0, 0]])
    ix = SceneIndex.from_points(pts)
    assert ix.nearest([0.0, 0.0, 0.0]).point_index == 0


def test_batch_min_all_on_scene_points(rng):
    pts = rng.uniform(-1, 1, size=(64, 3))
    ix = SceneIndex.from_points(pts)
    assert ix.min_distance_batch(pts[10:20]) == 0.0


def test_batch_min_sphere_analytic(rng):
    # queries on a radius-r sphere around a lone point -> exactly r
    r = 0.75
    dirs = rng.normal(size=(50, 3))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    ix = SceneIndex.from_points(np.array([[0.2, -0.3, 1.0]]))
    d = ix.min_distance_batch(np.array([0.2, -0.3, 1.0]) + r * dirs)
    assert d == pytest.approx(r, abs=1e-12)


def test_batch_min_matches_brute_force(rng):
    pts = rng.uniform(-3, 3, size=(512, 3))
    ix = SceneIndex.from_points(pts)
    queries = rng.uniform(-3.5, 3.5, size=(40, 3))
    brute = min(brute_nearest(pts, q)[0] for q in queries)
    assert ix.min_distance_batch(queries) == brute


def test_batch_min_floor_early_exit(rng):
    pts = rng.uniform(-1, 1, size=(256, 3))
    ix = SceneIndex.from_points(pts)
    queries = np.vstack([pts[7], rng.uniform(-1, 1, size=(10, 3))])
    d = ix.min_distance_batch(queries, floor=0.05)
    assert d <= 0.05


def test_radius_indices_matches_brute(rng):
    pts = rng.uniform(-2, 2, size=(400, 3))
    ix = SceneIndex.from_points(pts)
    q = np.array([0.1, 0.2, -0.3])
    got = ix.radius_indices(q, 1.0)
    want = np.flatnonzero(((pts - q) ** 2).sum(axis=1) < 1.0)
    assert np.array_equal(got, want)


def test_build_is_deterministic(rng):
    pts = rng.uniform(-2, 2, size=(300, 3))
    a = SceneIndex.from_points(pts)
    b = SceneIndex.from_points(pts)
    assert np.array_equal(a.idx, b.idx)
    assert np.array_equal(a.node_split, b.node_split)


def test_build_index_accepts_scene(room):
    scene, _ = room
    ix = build_index(scene)
    assert len(ix) == len(scene)


def test_backends_agree(rng):
    """The numba and numpy kernels return identical results."""
    pts = rng.uniform(-2, 2, size=(300, 3))
    ix = SceneIndex.from_points(pts)
    args = (ix.pts, ix.idx, ix.node_axis, ix.node_split, ix.node_left,
            ix.node_right, ix.node_lo, ix.node_hi)
    for q in rng.uniform(-2.5, 2.5, size=(25, 3)):
        d2_a, i_a = kernels.nn_query(*args, q)
        d2_b, i_b = _kernels_numpy.nn_query(*args, q)
        assert d2_a == d2_b and i_a == i_b
    queries = rng.uniform(-2.5, 2.5, size=(30, 3))
    assert kernels.batch_min(*args, queries, -1.0)[0] == \
        _kernels_numpy.batch_min(*args, queries, -1.0)[0]
    q = np.zeros(3)
    assert np.array_equal(kernels.radius_collect(*args, q, 1.5),
                          _kernels_numpy.radius_collect(*args, q, 1.5))
