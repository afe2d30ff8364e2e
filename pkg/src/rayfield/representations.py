"""Feature types and the group actions that transport them.

Three kinds of feature live on the geometry:

* ray irreps ``(omega1, omega2)`` of the base-ray stabilizer SO(2) x R,
  one complex number per channel, twisted by
  ``rho(gamma, tau) = exp(-i (omega1 gamma + omega2 tau))``;
* ray regular features, realized as :class:`AnchoredSamples`: complex values
  attached to explicit 3D anchor points along the ray, so the translation
  part of the stabilizer acts by transporting anchors rather than by phases;
* point irreps of SO(3) of degree l in {0, 1} in the real Cartesian basis.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .ray_geometry import Ray, RigidMotion, param_of, point_at
from .group_theory import StabilizerElement, sphere_twist_angle

__all__ = [
    "FieldType",
    "Feature",
    "AnchoredSamples",
    "SampledPointField",
    "GridMismatchError",
    "irrep_so2r",
    "wigner_d",
    "act_on_ray_field",
    "act_on_point_field",
    "act_on_anchored_samples",
    "transport_point_feature",
    "feature_inner",
    "frequency_grid",
    "irrep_to_samples",
    "samples_to_irrep",
]

_KINDS = ("ray_irrep", "ray_regular", "point_irrep")

#: Tolerance for "anchor lies on the ray" and grid-uniformity checks.
GRID_TOL = 1e-9


class GridMismatchError(ValueError):
    """Anchor grid and frequency grid do not form an exact transform pair."""


@dataclass(frozen=True)
class FieldType:
    """Type tag for a feature: which representation its values transform in."""

    kind: str
    omega1: int = 0
    omega2: float = 0.0
    l: int = 0
    samples: int = 0
    t_min: float = 0.0
    t_max: float = 0.0

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown field kind {self.kind!r}")
        if self.kind == "point_irrep" and self.l not in (0, 1):
            raise ValueError(f"unsupported spherical degree l={self.l}; only 0 and 1")
        if self.kind == "ray_regular":
            if self.samples < 1:
                raise ValueError("regular type needs at least one sample")
            if not self.t_max > self.t_min:
                raise ValueError("regular type needs a nonempty depth window")

    @classmethod
    def scalar(cls) -> "FieldType":
        """The trivial ray type (omega1 = 0, omega2 = 0)."""
        return cls("ray_irrep")

    @classmethod
    def ray(cls, omega1: int, omega2: float) -> "FieldType":
        return cls("ray_irrep", omega1=int(omega1), omega2=float(omega2))

    @classmethod
    def regular(cls, omega1: int, samples: int, t_min: float, t_max: float) -> "FieldType":
        return cls(
            "ray_regular",
            omega1=int(omega1),
            samples=int(samples),
            t_min=float(t_min),
            t_max=float(t_max),
        )

    @classmethod
    def point(cls, l: int) -> "FieldType":
        return cls("point_irrep", l=int(l))

    @property
    def rep_dim(self) -> int:
        if self.kind == "ray_irrep":
            return 1
        if self.kind == "ray_regular":
            return self.samples
        return 2 * self.l + 1

    @property
    def is_trivial(self) -> bool:
        """True for types whose values are left untouched by every motion."""
        return (self.kind == "ray_irrep" and self.omega1 == 0 and self.omega2 == 0.0) or (
            self.kind == "point_irrep" and self.l == 0
        )


@dataclass(frozen=True)
class Feature:
    """A typed value: complex array of shape ``(channels, rep_dim)``."""

    ftype: FieldType
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.ndim == 1:
            v = v[None, :]
        if v.ndim != 2 or v.shape[1] != self.ftype.rep_dim:
            raise ValueError(
                f"values shape {v.shape} does not match rep dim {self.ftype.rep_dim}"
            )
        if self.ftype.kind == "point_irrep" and np.abs(v.imag).max(initial=0.0) > 1e-12:
            raise ValueError("point-irrep values must be real in the Cartesian basis")
        object.__setattr__(self, "values", v)

    @property
    def channels(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class SampledPointField:
    """Finite point field: ``points`` (N, 3) with per-point typed values (N, C, dim)."""

    points: np.ndarray
    values: np.ndarray
    ftype: FieldType

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        val = np.asarray(self.values, dtype=complex)
        if pts.ndim != 2 or pts.shape[1] != 3:
            raise ValueError("points must have shape (N, 3)")
        if val.shape[0] != pts.shape[0] or val.shape[-1] != self.ftype.rep_dim:
            raise ValueError("values must have shape (N, C, rep_dim)")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "values", val)


@dataclass(frozen=True)
class AnchoredSamples:
    """Regular ray feature sampled at explicit anchor points along one ray.

    ``anchors`` are 3D points on ``ray`` with strictly increasing signed
    parameter; ``values`` is complex of shape ``(n_anchors, channels)``; each
    channel carries its own SO(2) type in ``omega1``.  Because anchors are
    world points, rigid motions transport them exactly and the translation
    part of the stabilizer never appears as a phase.
    """

    ray: Ray
    anchors: np.ndarray
    values: np.ndarray
    omega1: tuple

    def __post_init__(self):
        anchors = np.asarray(self.anchors, dtype=float)
        values = np.asarray(self.values, dtype=complex)
        if anchors.ndim != 2 or anchors.shape[1] != 3:
            raise ValueError("anchors must have shape (n, 3)")
        if values.shape != (anchors.shape[0], len(self.omega1)):
            raise ValueError(
                f"values shape {values.shape} does not match "
                f"{anchors.shape[0]} anchors x {len(self.omega1)} channels"
            )
        params = np.array([param_of(self.ray, p) for p in anchors])
        if anchors.shape[0] > 1 and not np.all(np.diff(params) > 0):
            raise ValueError("anchor parameters must be strictly increasing")
        object.__setattr__(self, "anchors", anchors)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "omega1", tuple(int(w) for w in self.omega1))
        object.__setattr__(self, "_params", params)

    @property
    def params(self) -> np.ndarray:
        """Signed parameters of the anchors along the ray."""
        return self._params

    @property
    def n_anchors(self) -> int:
        return self.anchors.shape[0]

    @property
    def channels(self) -> int:
        return len(self.omega1)

    @classmethod
    def along(cls, ray: Ray, params, channels_omega1, values=None) -> "AnchoredSamples":
        """Build anchors at the given signed parameters along ``ray``."""
        params = np.asarray(params, dtype=float)
        anchors = np.stack([point_at(ray, t) for t in params])
        omega1 = tuple(channels_omega1)
        if values is None:
            values = np.zeros((len(params), len(omega1)), dtype=complex)
        return cls(ray, anchors, values, omega1)


def irrep_so2r(omegas, h) -> complex:
    """Value of the stabilizer irrep ``(omega1, omega2)`` at ``h = (gamma, tau)``.

    Returns ``exp(-i (omega1 gamma + omega2 tau))``.
    """
    if isinstance(omegas, FieldType):
        if omegas.kind != "ray_irrep":
            raise ValueError("irrep_so2r takes a ray-irrep type")
        w1, w2 = omegas.omega1, omegas.omega2
    else:
        w1, w2 = omegas
    if isinstance(h, StabilizerElement):
        gamma, tau = h.gamma, h.tau
    else:
        gamma, tau = h
    return complex(np.exp(-1j * (w1 * gamma + w2 * tau)))


def wigner_d(l: int, R: np.ndarray) -> np.ndarray:
    """Wigner D-matrix of degree ``l`` in the real Cartesian basis.

    Degree 0 is the 1x1 identity; degree 1 is the rotation matrix itself.
    Higher degrees are not implemented.
    """
    if l == 0:
        return np.ones((1, 1))
    if l == 1:
        return np.asarray(R, dtype=float)
    raise ValueError(f"unsupported spherical degree l={l}; only 0 and 1")


# -- batched sphere-section machinery ---------------------------------------

def _section_cols(D: np.ndarray):
    """First two columns of the sphere section for each unit row of ``D``.

    Columns of R_Z(alpha) R_Y(beta): c1 = (ca*cb, sa*cb, -sb), c2 = (-sa, ca, 0).
    """
    D = np.atleast_2d(D)
    dz = np.clip(D[:, 2], -1.0, 1.0)
    pole = np.abs(D[:, 2]) >= 1.0 - 1e-12
    alpha = np.where(pole, 0.0, np.arctan2(D[:, 1], D[:, 0]))
    beta = np.arccos(dz)
    ca, sa = np.cos(alpha), np.sin(alpha)
    cb, sb = np.cos(beta), np.sin(beta)
    c1 = np.stack([ca * cb, sa * cb, -sb], axis=1)
    c2 = np.stack([-sa, ca, np.zeros_like(sa)], axis=1)
    return c1, c2


def sphere_twist_angles(R: np.ndarray, D: np.ndarray) -> np.ndarray:
    """Vectorized :func:`rayfield.group_theory.sphere_twist_angle` over rows of ``D``."""
    D = np.atleast_2d(np.asarray(D, dtype=float))
    Dp = D @ R.T
    c1p, c2p = _section_cols(Dp)
    c1, _ = _section_cols(D)
    a0 = c1 @ R.T  # rotated first section column, per row
    return np.mod(
        np.arctan2(np.sum(c2p * a0, axis=1), np.sum(c1p * a0, axis=1)), 2.0 * np.pi
    )


# -- actions -----------------------------------------------------------------

def act_on_ray_field(g: RigidMotion, field):
    """Transport a sampled ray field: rays move, values pick up the twist phase.

    The value carried to the transported ray is ``rho(h(g, x)) f(x)``, the
    evaluation of the induced action at the new location.  Only uniform
    ray-irrep fields are supported; regular features travel as
    :class:`AnchoredSamples`.
    """
    ftype = field.ftype
    if ftype.kind != "ray_irrep":
        raise ValueError("act_on_ray_field expects a ray-irrep field")
    D, M = field.rays[:, :3], field.rays[:, 3:]
    Dp = D @ g.R.T
    Mp = M @ g.R.T + np.cross(g.t, Dp)
    rays = np.hstack([Dp, Mp])
    if ftype.is_trivial:
        return replace(field, rays=rays, values=field.values)
    gamma = sphere_twist_angles(g.R, D)
    tau = Dp @ g.t
    mult = np.exp(-1j * (ftype.omega1 * gamma + ftype.omega2 * tau))
    return replace(field, rays=rays, values=field.values * mult[:, None])


def act_on_point_field(g: RigidMotion, field: SampledPointField) -> SampledPointField:
    """Transport a sampled point field; degree-1 values rotate with the frame."""
    points = field.points @ g.R.T + g.t
    if field.ftype.l == 0:
        values = field.values
    else:
        values = field.values @ g.R.T
    return replace(field, points=points, values=values)


def transport_point_feature(g: RigidMotion, f: Feature) -> Feature:
    """Value of a point feature after the motion: ``D_l(R_g)`` applied per channel."""
    if f.ftype.kind != "point_irrep":
        raise ValueError("transport_point_feature expects a point-irrep feature")
    if f.ftype.l == 0:
        return f
    return Feature(f.ftype, f.values @ g.R.T)


def act_on_anchored_samples(g: RigidMotion, a: AnchoredSamples) -> AnchoredSamples:
    """Transport anchored samples: ray and anchors move, channels pick up
    their SO(2) twist phase ``exp(-i omega1 gamma)``."""
    from .ray_geometry import apply_motion  # local to avoid a wide import surface

    ray = apply_motion(g, a.ray)
    anchors = a.anchors @ g.R.T + g.t
    gamma = float(sphere_twist_angle(g.R, a.ray.d))
    mult = np.exp(-1j * gamma * np.asarray(a.omega1, dtype=float))
    return AnchoredSamples(ray, anchors, a.values * mult[None, :], a.omega1)


def feature_inner(a: Feature, b: Feature) -> complex:
    """Hermitian pairing ``sum(conj(a) * b)`` of two features of equal type."""
    if a.ftype != b.ftype:
        raise ValueError("feature_inner requires matching types")
    return complex(np.sum(np.conj(a.values) * b.values))


# -- Fourier pairing between regular samples and omega2 irreps ---------------

def frequency_grid(samples: int, t_min: float, t_max: float) -> np.ndarray:
    """The omega2 grid ``2 pi k / (t_max - t_min)`` for ``k = 0 .. samples-1``."""
    return 2.0 * np.pi * np.arange(samples) / (t_max - t_min)


def _check_transform_pair(params: np.ndarray, frequencies: np.ndarray):
    n = len(params)
    if len(frequencies) != n:
        raise GridMismatchError(
            f"{len(frequencies)} frequencies for {n} anchors; counts must match"
        )
    if n < 2:
        return
    dt = np.diff(params)
    if np.abs(dt - dt[0]).max() > GRID_TOL:
        raise GridMismatchError("anchor parameters must be uniformly spaced")
    dw = np.diff(frequencies)
    fundamental = 2.0 * np.pi / (n * dt[0])
    if np.abs(dw - fundamental).max() > GRID_TOL * max(1.0, fundamental):
        raise GridMismatchError(
            "frequency spacing must equal 2*pi / (n_anchors * anchor spacing)"
        )


def irrep_to_samples(coeffs: Sequence[Feature], ray: Ray, anchors) -> AnchoredSamples:
    """Evaluate a stack of ``(omega1, omega2_k)`` coefficients on an anchor grid.

    The k-th input feature carries frequency ``omega2_k``; the output anchor
    value at parameter t is ``sum_k c_k exp(i omega2_k t)``.
    """
    if not coeffs:
        raise ValueError("need at least one coefficient feature")
    w1 = coeffs[0].ftype.omega1
    channels = coeffs[0].channels
    for f in coeffs:
        if f.ftype.kind != "ray_irrep" or f.ftype.omega1 != w1 or f.channels != channels:
            raise ValueError("coefficients must share omega1 and channel count")
    freqs = np.array([f.ftype.omega2 for f in coeffs])
    c = np.stack([f.values[:, 0] for f in coeffs])  # (K, C)
    out = AnchoredSamples.along(
        ray,
        [param_of(ray, p) for p in np.asarray(anchors, dtype=float)],
        (w1,) * channels,
    )
    _check_transform_pair(out.params, freqs)
    phases = np.exp(1j * np.outer(out.params, freqs))  # (n, K)
    return replace(out, values=phases @ c)


def samples_to_irrep(a: AnchoredSamples, frequencies) -> list:
    """Discrete inverse of :func:`irrep_to_samples` on the same grids.

    Returns one feature per frequency, of type ``(omega1, omega2_k)``, with
    ``c_k = mean_j f_j exp(-i omega2_k t_j)``.
    """
    freqs = np.asarray(frequencies, dtype=float)
    _check_transform_pair(a.params, freqs)
    w1 = set(a.omega1)
    if len(w1) != 1:
        raise ValueError("samples_to_irrep needs a single omega1 across channels")
    (w1,) = w1
    phases = np.exp(-1j * np.outer(freqs, a.params))  # (K, n)
    c = phases @ a.values / a.n_anchors  # (K, C)
    return [
        Feature(FieldType.ray(w1, w), c[k][:, None]) for k, w in enumerate(freqs)
    ]
