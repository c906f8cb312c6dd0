import math

import numpy as np
import pytest
import shapely
from hypothesis import given, settings
from hypothesis import strategies as st

from deepclaw.errors import BehindCameraError, InvalidDepthError
from deepclaw.geometry import (
    CameraIntrinsics,
    PixelCoord,
    RigidTransform,
    angle_diff,
    compose,
    convex_hull,
    deproject,
    image_to_base_angle,
    invert,
    min_area_rect,
    points_in_polygon,
    polygon_area,
    project,
    random_transform,
    rot_x,
    rot_z,
    wrap_angle,
)

K500 = CameraIntrinsics(500.0, 500.0, 320.0, 240.0, 640, 480)
K600 = CameraIntrinsics(600.0, 600.0, 320.0, 240.0, 640, 480)

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def test_compose_identity():
    i = RigidTransform.identity()
    assert compose(i, i) == i


def test_compose_with_inverse_is_identity():
    t = RigidTransform(rot_z(0.3) @ rot_x(-1.1), [0.4, -2.0, 7.0])
    assert compose(t, invert(t)).allclose(RigidTransform.identity(), atol=1e-12)
    assert compose(invert(t), t).allclose(RigidTransform.identity(), atol=1e-12)


def test_compose_rot_z_90_twice():
    # direct matrix product of two quarter turns about z
    expected = np.array([[-1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, 1.0]])
    q = RigidTransform(rot_z(math.pi / 2), np.zeros(3))
    assert np.allclose(compose(q, q).rotation, expected, atol=1e-12)


def test_compose_applies_b_first():
    a = RigidTransform(np.eye(3), [1.0, 0.0, 0.0])
    b = RigidTransform(rot_z(math.pi / 2), np.zeros(3))
    # b rotates (1,0,0) to (0,1,0), then a shifts by +x
    assert np.allclose(compose(a, b).apply([1.0, 0.0, 0.0]), [1.0, 1.0, 0.0])


def test_rejects_improper_rotation():
    with pytest.raises(ValueError):
        RigidTransform(np.diag([1.0, 1.0, -1.0]), np.zeros(3))
    with pytest.raises(ValueError):
        RigidTransform(2 * np.eye(3), np.zeros(3))


def test_small_drift_is_reorthonormalized():
    r = rot_z(0.4) + 1e-9
    t = RigidTransform(r, np.zeros(3))
    assert np.allclose(t.rotation.T @ t.rotation, np.eye(3), atol=1e-14)
    assert abs(np.linalg.det(t.rotation) - 1) < 1e-14


def test_dict_round_trip():
    t = RigidTransform(rot_z(1.0) @ rot_x(0.2), [0.1, 0.2, 0.3])
    d = t.to_dict()
    assert len(d["rotation"]) == 9
    assert RigidTransform.from_dict(d) == t


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_random_transforms_are_proper(seed):
    t = random_transform(np.random.default_rng(seed), 2.0)
    r = t.rotation
    assert abs(np.linalg.det(r) - 1) < 1e-9
    assert np.allclose(r.T @ r, np.eye(3), atol=1e-9)


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_compose_is_associative(seed):
    g = np.random.default_rng(seed)
    a, b, c = (random_transform(g, 3.0) for _ in range(3))
    assert compose(compose(a, b), c).allclose(compose(a, compose(b, c)), atol=1e-9)


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_compose_inverse_property(seed):
    t = random_transform(np.random.default_rng(seed), 5.0)
    assert compose(t, invert(t)).allclose(RigidTransform.identity(), atol=1e-9)


def test_deproject_principal_point():
    assert np.allclose(deproject(PixelCoord(K500.cx, K500.cy), 1.0, K500), [0, 0, 1])


def test_deproject_hand_example():
    # (420 - 320) / 500 = 0.2
    assert np.allclose(deproject(PixelCoord(420, 240), 1.0, K500), [0.2, 0.0, 1.0], atol=1e-15)


@pytest.mark.parametrize("depth", [0.0, -1.0, float("nan")])
def test_deproject_invalid_depth(depth):
    with pytest.raises(InvalidDepthError):
        deproject(PixelCoord(1, 1), depth, K500)


def test_project_examples():
    pix, z = project([0.0, 0.0, 1.0], K500)
    assert (pix.u, pix.v, z) == (320.0, 240.0, 1.0)
    pix, _ = project([0.2, 0.0, 1.0], K500)
    assert pix.u == pytest.approx(420.0, abs=1e-12)


@pytest.mark.parametrize("z", [0.0, -0.5])
def test_project_behind_camera(z):
    with pytest.raises(BehindCameraError):
        project([0.0, 0.0, z], K500)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 639), st.integers(0, 479), st.floats(0.05, 10.0))
def test_project_deproject_round_trip_on_pixel_grid(u, v, depth):
    pix, z = project(deproject(PixelCoord(u, v), depth, K600), K600)
    assert abs(pix.u - u) < 1e-9 and abs(pix.v - v) < 1e-9
    assert abs(z - depth) < 1e-12


@settings(max_examples=100, deadline=None)
@given(st.floats(-1, 1), st.floats(-1, 1), st.floats(0.1, 5))
def test_deproject_project_round_trip_in_frustum(x, y, z):
    p = np.array([x, y, z])
    pix, d = project(p, K600)
    assert np.allclose(deproject(pix, d, K600), p, atol=1e-12)


def test_intrinsics_validation():
    with pytest.raises(ValueError):
        CameraIntrinsics(0.0, 500.0, 320.0, 240.0, 640, 480)
    with pytest.raises(ValueError):
        CameraIntrinsics(500.0, 500.0, 640.0, 240.0, 640, 480)


def test_polygon_area_and_hull():
    square = [[0, 0], [1, 0], [1, 1], [0, 1]]
    assert polygon_area(square) == 1.0
    pts = square + [[0.5, 0.5], [0.2, 0.7]]
    hull = convex_hull(pts)
    assert len(hull) == 4
    assert polygon_area(hull) == 1.0


@settings(max_examples=80, deadline=None)
@given(seeds, st.integers(3, 30))
def test_min_area_rect_matches_shapely(seed, n):
    pts = np.random.default_rng(seed).normal(size=(n, 2))
    ours = min_area_rect(pts)
    oracle = shapely.MultiPoint(pts).minimum_rotated_rectangle
    assert ours.area == pytest.approx(oracle.area, rel=1e-9, abs=1e-12)
    # every input point lies inside (or on) the rectangle
    assert shapely.Polygon(ours.corners).buffer(1e-9).contains(shapely.MultiPoint(pts))


def test_min_area_rect_rotated_square():
    sq = np.array([[1, 0], [0, 1], [-1, 0], [0, -1]], dtype=float)
    r = min_area_rect(sq)
    assert r.area == pytest.approx(2.0)
    assert r.angle == pytest.approx(math.pi / 4)


def test_angle_helpers():
    assert wrap_angle(-0.5, math.pi) == pytest.approx(math.pi - 0.5)
    assert angle_diff(0.1, 2 * math.pi - 0.1) == pytest.approx(0.2)
    assert angle_diff(0.0, math.pi / 2, math.pi / 2) == pytest.approx(0.0)


def test_image_to_base_angle_downward_camera():
    # camera x along base x, camera y along base -y
    down = RigidTransform(np.diag([1.0, -1.0, -1.0]), [0, 0, 1])
    assert image_to_base_angle(0.0, down) == pytest.approx(0.0)
    assert image_to_base_angle(math.pi / 2, down) == pytest.approx(-math.pi / 2)


def test_points_in_polygon():
    poly = np.array([[0, 0], [2, 0], [2, 1], [0, 1]], dtype=float)
    inside = points_in_polygon([1.0, 3.0, 0.5], [0.5, 0.5, 1.5], poly)
    assert inside.tolist() == [True, False, False]
