"""Oriented lines in Pluecker coordinates and the rigid-motion action on them.

A ray is an oriented line in 3-space written as a pair ``(d, m)`` with unit
direction ``d`` and moment ``m = p x d`` for any point ``p`` on the line.
The pair ``(-d, -m)`` is the same line traversed the other way and counts as
a different ray.  Rigid motions ``(R, t)`` act on rays by

    (R, t) . (d, m) = (R d, R m + t x (R d)),

which is the transport of the underlying line.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Ray",
    "RigidMotion",
    "ORIGIN_RAY",
    "ray_through",
    "apply_motion",
    "ray_distance",
    "ray_angle",
    "point_at",
    "param_of",
]

#: Tolerance for the unit-direction and orthogonality invariants.
UNIT_TOL = 1e-9

#: Below this cross-product norm two directions count as parallel.
PARALLEL_EPS = 1e-9


def _vec3(v) -> np.ndarray:
    a = np.asarray(v, dtype=float)
    if a.shape != (3,):
        raise ValueError(f"expected a 3-vector, got shape {a.shape}")
    return a


@dataclass(frozen=True)
class Ray:
    """Oriented line with unit direction ``d`` and moment ``m``, ``d . m = 0``.

    Parameters
    ----------
    d : array_like, shape (3,)
        Unit direction of the line.
    m : array_like, shape (3,)
        Moment ``p x d`` for any point ``p`` on the line.
    """

    d: np.ndarray
    m: np.ndarray

    def __post_init__(self):
        d = _vec3(self.d)
        m = _vec3(self.m)
        if abs(np.linalg.norm(d) - 1.0) > UNIT_TOL:
            raise ValueError("ray direction must have unit norm")
        if abs(float(d @ m)) > UNIT_TOL:
            raise ValueError("ray moment must be orthogonal to the direction")
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "m", m)

    @property
    def foot(self) -> np.ndarray:
        """Point of the line closest to the origin, ``d x m``."""
        return np.cross(self.d, self.m)

    def as_array(self) -> np.ndarray:
        """Return the ray as a flat ``(6,)`` array ``[d, m]``."""
        return np.concatenate([self.d, self.m])

    @classmethod
    def from_array(cls, a) -> "Ray":
        a = np.asarray(a, dtype=float)
        return cls(a[:3], a[3:])

    def reversed(self) -> "Ray":
        """Same line, opposite orientation."""
        return Ray(-self.d, -self.m)


@dataclass(frozen=True)
class RigidMotion:
    """Proper rigid motion ``p -> R p + t`` with ``R`` in SO(3).

    Parameters
    ----------
    R : array_like, shape (3, 3)
        Rotation matrix (orthonormal, det +1).
    t : array_like, shape (3,)
        Translation.
    """

    R: np.ndarray
    t: np.ndarray

    def __post_init__(self):
        R = np.asarray(self.R, dtype=float)
        t = _vec3(self.t)
        if R.shape != (3, 3):
            raise ValueError(f"rotation must be 3x3, got shape {R.shape}")
        if not np.allclose(R.T @ R, np.eye(3), atol=1e-9):
            raise ValueError("rotation matrix must be orthonormal")
        if np.linalg.det(R) < 0.0:
            raise ValueError("rotation matrix must have determinant +1")
        object.__setattr__(self, "R", R)
        object.__setattr__(self, "t", t)

    @classmethod
    def identity(cls) -> "RigidMotion":
        return cls(np.eye(3), np.zeros(3))

    def transform_point(self, p) -> np.ndarray:
        """Apply the motion to a point (or an ``(N, 3)`` stack of points)."""
        p = np.asarray(p, dtype=float)
        return p @ self.R.T + self.t


#: The distinguished base ray: the z-axis, oriented upward, through the origin.
ORIGIN_RAY = Ray(np.array([0.0, 0.0, 1.0]), np.zeros(3))


def ray_through(p, d) -> Ray:
    """Ray through point ``p`` with direction ``d`` (any nonzero length).

    Parameters
    ----------
    p : array_like, shape (3,)
        A point on the line.
    d : array_like, shape (3,)
        Direction; normalized internally.

    Returns
    -------
    Ray
        ``(d / |d|, p x d / |d|)``.

    Raises
    ------
    ValueError
        If ``d`` has norm below 1e-12.
    """
    p = _vec3(p)
    d = _vec3(d)
    n = np.linalg.norm(d)
    if n < 1e-12:
        raise ValueError("ray direction must be nonzero")
    d = d / n
    return Ray(d, np.cross(p, d))


def apply_motion(g: RigidMotion, x: Ray) -> Ray:
    """Transport a ray by a rigid motion.

    Returns ``(R d, R m + t x (R d))``.
    """
    d = g.R @ x.d
    return Ray(d, g.R @ x.m + np.cross(g.t, d))


def ray_distance(x: Ray, y: Ray) -> float:
    """Shortest Euclidean distance between the two underlying lines.

    For non-parallel lines this is the reciprocal-product formula
    ``|d_x . m_y + d_y . m_x| / |d_x x d_y|``; for (anti)parallel lines it is
    the perpendicular offset between the foot points.
    """
    cross = np.cross(x.d, y.d)
    n = np.linalg.norm(cross)
    if n > PARALLEL_EPS:
        return abs(float(x.d @ y.m + y.d @ x.m)) / n
    delta = y.foot - x.foot
    return float(np.linalg.norm(delta - (delta @ x.d) * x.d))


def ray_angle(x: Ray, y: Ray) -> float:
    """Angle in [0, pi] between the two oriented directions."""
    c = float(np.clip(x.d @ y.d, -1.0, 1.0))
    return float(np.arccos(c))


def point_at(x: Ray, t: float) -> np.ndarray:
    """Point at signed arc-length ``t`` from the foot point: ``d x m + t d``."""
    return x.foot + float(t) * x.d


def param_of(x: Ray, p) -> float:
    """Signed arc-length of point ``p`` along ``x``, inverse of :func:`point_at`.

    Raises
    ------
    ValueError
        If ``p`` is farther than 1e-9 from the line.
    """
    p = _vec3(p)
    t = float((p - x.foot) @ x.d)
    if np.linalg.norm(p - point_at(x, t)) > 1e-9:
        raise ValueError("point does not lie on the ray")
    return t
