"""Stabilizer algebra, section maps, and twist functions.

The ray space is a homogeneous space of SE(3); the stabilizer of the base ray
(the oriented z-axis) is H = SO(2) x R, rotations about and translations along
that axis.  A section assigns to every ray a canonical motion carrying the
base ray onto it; the twist function measures the H-valued discrepancy

    h(g, x) = s(g.x)^{-1} g s(x)

between transporting a ray and re-sectioning it, and is the cocycle every
feature type in this package is twisted by.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ray_geometry import ORIGIN_RAY, Ray, RigidMotion, apply_motion

__all__ = [
    "StabilizerElement",
    "SphereSection",
    "TwistConsistencyError",
    "compose",
    "invert",
    "rot_z",
    "rot_y",
    "sphere_angles",
    "section_sphere",
    "section_ray",
    "section_point",
    "sphere_twist_angle",
    "twist_ray",
    "twist_point",
    "random_rotation",
    "random_motion",
]

TWO_PI = 2.0 * np.pi

#: Reconstruction residual above which twist extraction refuses to answer.
CONSISTENCY_TOL = 1e-9

#: |d_z| this close to 1 routes the sphere section through the pole branch.
POLE_EPS = 1e-12


class TwistConsistencyError(RuntimeError):
    """The section/twist decomposition failed to reconstruct the motion."""


def rot_z(angle: float) -> np.ndarray:
    """Rotation by ``angle`` about the z-axis."""
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def rot_y(angle: float) -> np.ndarray:
    """Rotation by ``angle`` about the y-axis."""
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


@dataclass(frozen=True)
class StabilizerElement:
    """Element ``(gamma, tau)`` of H: rotate by gamma about, then slide tau
    along, the base axis.  ``gamma`` is stored canonically in [0, 2*pi)."""

    gamma: float
    tau: float

    def __post_init__(self):
        object.__setattr__(self, "gamma", float(self.gamma) % TWO_PI)
        object.__setattr__(self, "tau", float(self.tau))

    def as_motion(self) -> RigidMotion:
        return RigidMotion(rot_z(self.gamma), np.array([0.0, 0.0, self.tau]))

    def compose(self, other: "StabilizerElement") -> "StabilizerElement":
        # H is abelian: SO(2) x R.
        return StabilizerElement(self.gamma + other.gamma, self.tau + other.tau)

    def inverse(self) -> "StabilizerElement":
        return StabilizerElement(-self.gamma, -self.tau)


@dataclass(frozen=True)
class SphereSection:
    """Angles ``(alpha, beta)`` of a direction: azimuth and polar angle."""

    alpha: float
    beta: float

    def rotation(self) -> np.ndarray:
        """The canonical rotation ``R_Z(alpha) R_Y(beta)`` sending e_z to d."""
        return rot_z(self.alpha) @ rot_y(self.beta)


def compose(g1: RigidMotion, g2: RigidMotion) -> RigidMotion:
    """Group product: apply ``g2`` first, then ``g1``."""
    return RigidMotion(g1.R @ g2.R, g1.R @ g2.t + g1.t)


def invert(g: RigidMotion) -> RigidMotion:
    return RigidMotion(g.R.T, -(g.R.T @ g.t))


def sphere_angles(d) -> SphereSection:
    """Azimuth/polar angles of a unit direction with the pole convention
    alpha = 0 at d = +/- e_z."""
    d = np.asarray(d, dtype=float)
    dz = float(np.clip(d[2], -1.0, 1.0))
    if abs(d[2]) >= 1.0 - POLE_EPS:
        return SphereSection(0.0, 0.0 if d[2] > 0 else np.pi)
    return SphereSection(float(np.arctan2(d[1], d[0])), float(np.arccos(dz)))


def section_sphere(d) -> np.ndarray:
    """Canonical rotation carrying e_z onto the unit direction ``d``."""
    return sphere_angles(d).rotation()


def section_ray(x: Ray) -> RigidMotion:
    """Canonical motion carrying the base ray onto ``x``.

    The rotation aligns directions through the sphere section; the
    translation moves the origin to the foot point of ``x``.
    """
    return RigidMotion(section_sphere(x.d), x.foot)


def section_point(p) -> RigidMotion:
    """Canonical motion carrying the origin onto the point ``p``: ``(I, p)``."""
    return RigidMotion(np.eye(3), np.asarray(p, dtype=float))


def sphere_twist_angle(R: np.ndarray, d) -> float:
    """SO(2) twist of a rotation at a direction on the sphere bundle.

    Angle of ``s(R d)^{-1} R s(d)``, which stabilizes e_z.
    """
    d = np.asarray(d, dtype=float)
    M = section_sphere(R @ d).T @ R @ section_sphere(d)
    return float(np.arctan2(M[1, 0], M[0, 0])) % TWO_PI


def twist_ray(g: RigidMotion, x: Ray) -> StabilizerElement:
    """Twist ``h(g, x) = s(g.x)^{-1} g s(x)`` of a motion at a ray.

    Returns
    -------
    StabilizerElement
        ``(gamma, tau)`` with ``gamma`` the rotation about and ``tau`` the
        slide along the base axis.

    Raises
    ------
    TwistConsistencyError
        If ``s(g.x) h`` fails to reconstruct ``g s(x)`` within 1e-9, which
        indicates the inputs violate the ray invariants.
    """
    gx = apply_motion(g, x)
    s_x = section_ray(x)
    s_gx = section_ray(gx)
    h = compose(invert(s_gx), compose(g, s_x))
    gamma = float(np.arctan2(h.R[1, 0], h.R[0, 0]))
    elem = StabilizerElement(gamma, float(h.t[2]))

    recon = compose(s_gx, elem.as_motion())
    target = compose(g, s_x)
    residual = max(
        float(np.abs(recon.R - target.R).max()),
        float(np.abs(recon.t - target.t).max()),
    )
    if residual > CONSISTENCY_TOL:
        raise TwistConsistencyError(
            f"section/twist reconstruction residual {residual:.3e} exceeds "
            f"{CONSISTENCY_TOL:.0e}"
        )
    return elem


def twist_point(g: RigidMotion, p) -> np.ndarray:
    """Twist of a motion at a point: the stabilizer SO(3) part, ``R_g``."""
    return g.R


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    """Rotation matrix drawn uniformly from SO(3) (unit-quaternion method)."""
    q = rng.normal(size=4)
    q /= np.linalg.norm(q)
    w, x, y, z = q
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )


def random_motion(rng: np.random.Generator, t_scale: float = 1.0) -> RigidMotion:
    """Random rigid motion: uniform rotation, normal translation."""
    return RigidMotion(random_rotation(rng), rng.normal(scale=t_scale, size=3))
