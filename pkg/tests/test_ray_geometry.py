import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rayfield import (
    ORIGIN_RAY,
    Ray,
    RigidMotion,
    apply_motion,
    param_of,
    point_at,
    ray_angle,
    ray_distance,
    ray_through,
)
from conftest import make_motion, make_ray

finite = st.floats(-10.0, 10.0, allow_nan=False)


def test_ray_through_worked_example():
    x = ray_through((1.0, 0.0, 0.0), (0.0, 0.0, 2.0))
    assert np.allclose(x.d, [0.0, 0.0, 1.0])
    assert np.allclose(x.m, [0.0, -1.0, 0.0])


def test_translation_of_the_base_ray():
    g = RigidMotion(np.eye(3), np.array([1.0, 0.0, 0.0]))
    y = apply_motion(g, ORIGIN_RAY)
    assert np.allclose(y.d, [0.0, 0.0, 1.0])
    assert np.allclose(y.m, [0.0, -1.0, 0.0])


def test_distance_between_parallel_lines():
    y = Ray(np.array([0.0, 0.0, 1.0]), np.array([0.0, -1.0, 0.0]))
    assert ray_distance(ORIGIN_RAY, y) == pytest.approx(1.0, abs=1e-15)


def test_point_at_worked_example():
    y = Ray(np.array([0.0, 0.0, 1.0]), np.array([0.0, -1.0, 0.0]))
    assert np.allclose(point_at(y, 5.0), [1.0, 0.0, 5.0])


def test_ray_validation():
    with pytest.raises(ValueError):
        Ray(np.array([0.0, 0.0, 2.0]), np.zeros(3))  # not unit
    with pytest.raises(ValueError):
        Ray(np.array([0.0, 0.0, 1.0]), np.array([0.0, 0.0, 1.0]))  # not orthogonal
    with pytest.raises(ValueError):
        ray_through((0.0, 0.0, 0.0), (0.0, 0.0, 0.0))  # zero direction


def test_rigid_motion_validation():
    with pytest.raises(ValueError):
        RigidMotion(np.eye(3) * 2.0, np.zeros(3))
    with pytest.raises(ValueError):
        RigidMotion(np.diag([1.0, 1.0, -1.0]), np.zeros(3))  # reflection


def test_foot_is_closest_point(rng):
    for _ in range(50):
        x = make_ray(rng)
        assert abs(x.foot @ x.d) < 1e-12  # perpendicular offset
        assert np.linalg.norm(x.foot) == pytest.approx(ray_distance_to_origin(x), abs=1e-12)


def ray_distance_to_origin(x: Ray) -> float:
    return float(np.linalg.norm(x.m))  # |p x d| = distance for unit d


def test_array_round_trip_and_reversed(rng):
    x = make_ray(rng)
    assert np.array_equal(Ray.from_array(x.as_array()).as_array(), x.as_array())
    r = x.reversed()
    assert np.allclose(r.d, -x.d)
    assert np.allclose(r.m, -x.m)
    assert ray_distance(x, r) == pytest.approx(0.0, abs=1e-12)


@given(
    px=finite, py=finite, pz=finite,
    dx=finite, dy=finite, dz=finite,
    t=st.floats(-20.0, 20.0),
)
@settings(max_examples=100, deadline=None)
def test_ray_invariants_and_param_round_trip(px, py, pz, dx, dy, dz, t):
    d = np.array([dx, dy, dz])
    if np.linalg.norm(d) < 1e-6:
        return
    x = ray_through(np.array([px, py, pz]), d)
    assert abs(np.linalg.norm(x.d) - 1.0) < 1e-12
    assert abs(x.d @ x.m) < 1e-9
    assert param_of(x, point_at(x, t)) == pytest.approx(t, abs=1e-7)


def test_param_of_rejects_points_off_the_line():
    with pytest.raises(ValueError):
        param_of(ORIGIN_RAY, np.array([1.0, 0.0, 0.0]))


def test_motion_preserves_distance_and_angle(rng):
    for _ in range(50):
        x, y = make_ray(rng), make_ray(rng)
        g = make_motion(rng)
        gx, gy = apply_motion(g, x), apply_motion(g, y)
        assert ray_distance(gx, gy) == pytest.approx(ray_distance(x, y), abs=1e-9)
        assert ray_angle(gx, gy) == pytest.approx(ray_angle(x, y), abs=1e-9)


def test_motion_matches_point_transport(rng):
    for _ in range(50):
        x = make_ray(rng)
        g = make_motion(rng)
        p = point_at(x, rng.uniform(-2, 2))
        gx = apply_motion(g, x)
        # the transported point lies on the transported ray
        param_of(gx, g.transform_point(p))
