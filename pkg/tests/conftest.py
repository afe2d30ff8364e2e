import numpy as np
import pytest

from rayfield import Ray, RigidMotion, ray_through
from rayfield.group_theory import random_motion, random_rotation


@pytest.fixture
def rng():
    return np.random.default_rng(20240816)


def make_ray(rng, box: float = 1.0) -> Ray:
    d = rng.normal(size=3)
    d /= np.linalg.norm(d)
    return ray_through(rng.uniform(-box, box, size=3), d)


def make_motion(rng, t_scale: float = 1.0) -> RigidMotion:
    return random_motion(rng, t_scale=t_scale)


def make_rotation_motion(rng) -> RigidMotion:
    return RigidMotion(random_rotation(rng), np.zeros(3))


def assert_rays_equal(a: Ray, b: Ray, tol: float = 1e-12):
    assert np.abs(a.as_array() - b.as_array()).max() <= tol
