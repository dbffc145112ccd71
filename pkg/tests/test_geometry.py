import numpy as np
import pytest

from hsi_forge.geometry import (convex_hull_2d, distance_to_hull,
                                estimate_normals, normalize_yaw,
                                point_segment_distance_2d, points_in_hull,
                                rotate_z, yaw_matrix)


def test_yaw_matrix_quarter_turn():
    m = yaw_matrix(np.pi / 2)
    assert np.allclose(m @ [1, 0, 0], [0, 1, 0], atol=1e-15)


def test_rotate_z_half_turn():
    out = rotate_z(np.array([[1.0, 0.0, 0.5]]), np.pi)
    assert np.allclose(out, [[-1.0, 0.0, 0.5]], atol=1e-12)


def test_normalize_yaw_wraps():
    assert normalize_yaw(-np.pi / 2) == pytest.approx(3 * np.pi / 2)
    assert normalize_yaw(2 * np.pi) == 0.0
    assert 0.0 <= normalize_yaw(123.456) < 2 * np.pi


def test_hull_of_square_with_interior_points(rng):
    corners = np.array([[0, 0], [1, 0], [1, 1], [0, 1.0]])
    pts = np.vstack([corners, rng.uniform(0.1, 0.9, size=(50, 2))])
    hull = convex_hull_2d(pts)
    assert sorted(map(tuple, hull)) == sorted(map(tuple, corners))


def test_hull_contains_all_inputs(rng):
    pts = rng.normal(size=(200, 2))
    hull = convex_hull_2d(pts)
    assert points_in_hull(pts, hull, eps=1e-9).all()


def test_degenerate_hulls():
    lone = convex_hull_2d(np.array([[2.0, 3.0]]))
    assert lone.shape == (1, 2)
    assert points_in_hull(np.array([[2.0, 3.0]]), lone)[0]
    collinear = convex_hull_2d(np.array([[0, 0], [1, 1], [2, 2.0]]))
    assert collinear.shape[0] == 2
    assert points_in_hull(np.array([[1.0, 1.0]]), collinear)[0]
    assert not points_in_hull(np.array([[1.0, 1.2]]), collinear)[0]


def test_distance_to_hull_square():
    hull = convex_hull_2d(np.array([[0, 0], [1, 0], [1, 1], [0, 1.0]]))
    d = distance_to_hull(np.array([[0.5, 0.5], [2.0, 0.5], [0.5, -0.3]]), hull)
    assert d[0] == 0.0
    assert d[1] == pytest.approx(1.0, abs=1e-12)
    assert d[2] == pytest.approx(0.3, abs=1e-12)


def test_point_segment_distance():
    assert point_segment_distance_2d([0, 1], [-1, 0], [1, 0]) == pytest.approx(1.0)
    assert point_segment_distance_2d([3, 4], [0, 0], [1, 0]) == pytest.approx(
        np.hypot(2, 4))


def test_normals_on_sphere(rng):
    # normals of a dense sphere sample point radially outward
    dirs = rng.normal(size=(500, 3))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    normals = estimate_normals(dirs, k=8)
    align = (normals * dirs).sum(axis=1)
    assert (align > 0.9).all()
