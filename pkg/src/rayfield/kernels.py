"""Analytic equivariant kernels on ray space and their constraint checker.

Every kernel here is a closed-form solution of the equivariance constraint

    kappa(h x) = rho_out(h) kappa(x) rho_in(h(h, x))^{-1},   h in SO(2) x R,

over the base-ray frame, parameterized by a free radial (or radial x angular)
profile.  The solutions split into an SO(2) factor (kappa1), a translation
factor (kappa2, in irrep or regular form), and a separate family mapping ray
fields to point features.  Pole directions (d parallel to the base axis) form
their own branches, guarded at |d_z -+ 1| < 1e-9.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field as dataclass_field
from typing import Optional

import numpy as np

from .ray_geometry import Ray
from .group_theory import StabilizerElement
from .representations import FieldType, _section_cols

__all__ = [
    "RadialProfile",
    "KernelSupport",
    "KernelEntry",
    "KernelBank",
    "MissingKernelError",
    "BankFormatError",
    "kappa1",
    "height_g",
    "kappa2_irrep",
    "kappa2_regular",
    "kappa_ray_to_point",
    "Kappa1Kernel",
    "Kappa2IrrepKernel",
    "Kappa2RegularKernel",
    "RayToPointKernel",
    "RayToRayKernel",
    "verify_kernel_constraint",
    "constraint_residuals",
    "write_kernel_bank",
    "read_kernel_bank",
    "bank_to_dict",
    "bank_from_dict",
    "profile_to_dict",
    "profile_from_dict",
]

#: Pole-branch guard of the kernel solutions.
POLE_GUARD = 1e-9

#: Below this moment norm a ray counts as passing through the reference point.
AXIS_EPS = 1e-9


class MissingKernelError(LookupError):
    """No bank entry matches the requested type pair."""


class BankFormatError(ValueError):
    """A kernel-bank file is malformed; the message names the offending field."""


# ---------------------------------------------------------------------------
# radial profiles


@dataclass(frozen=True)
class RadialProfile:
    """Free kernel profile: complex combination of Gaussian bumps.

    Radial basis: ``exp(-(r - centers_j)^2 / (2 sigma^2))``.  When
    ``ang_centers`` is present the profile is the separable product with the
    analogous angular bumps.  ``coeffs`` has shape ``(value_dim, n_radial)``
    or ``(value_dim, n_radial, n_angular)``; ``value_dim`` is 1 for scalar
    kernels and ``2l + 1`` for the ray-to-point family.
    """

    centers: np.ndarray
    sigma: float
    coeffs: np.ndarray
    ang_centers: Optional[np.ndarray] = None
    ang_sigma: Optional[float] = None

    def __post_init__(self):
        centers = np.asarray(self.centers, dtype=float).ravel()
        coeffs = np.asarray(self.coeffs, dtype=complex)
        if coeffs.ndim == 1:
            coeffs = coeffs[None, :]
        ang = None
        if self.ang_centers is not None:
            ang = np.asarray(self.ang_centers, dtype=float).ravel()
            if self.ang_sigma is None:
                raise ValueError("angular centers require ang_sigma")
            if coeffs.ndim != 3 or coeffs.shape[1:] != (len(centers), len(ang)):
                raise ValueError(
                    f"coeffs shape {coeffs.shape} does not match "
                    f"({len(centers)} radial, {len(ang)} angular) bumps"
                )
        elif coeffs.ndim != 2 or coeffs.shape[1] != len(centers):
            raise ValueError(
                f"coeffs shape {coeffs.shape} does not match {len(centers)} bumps"
            )
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "ang_centers", ang)

    @property
    def value_dim(self) -> int:
        return self.coeffs.shape[0]

    @property
    def has_angular(self) -> bool:
        return self.ang_centers is not None

    def basis(self, r) -> np.ndarray:
        """Radial bump responses at radii ``r``; shape ``(N, n_radial)``."""
        r = np.atleast_1d(np.asarray(r, dtype=float))
        return np.exp(-((r[:, None] - self.centers[None, :]) ** 2) / (2.0 * self.sigma**2))

    def __call__(self, r, ang=None) -> np.ndarray:
        """Evaluate at radii ``r`` (scalar or (N,)); returns ``(N, value_dim)``."""
        r = np.atleast_1d(np.asarray(r, dtype=float))
        B = self.basis(r)
        if self.has_angular:
            if ang is None:
                raise ValueError("this profile needs an angular argument")
            ang = np.atleast_1d(np.asarray(ang, dtype=float))
            A = np.exp(
                -((ang[:, None] - self.ang_centers[None, :]) ** 2)
                / (2.0 * self.ang_sigma**2)
            )
            return np.einsum("nj,na,vja->nv", B, A, self.coeffs)
        return B @ self.coeffs.T

    def scalar(self, r, ang=None) -> complex:
        """Evaluate at one radius; requires ``value_dim == 1``."""
        if self.value_dim != 1:
            raise ValueError("scalar() needs a value_dim-1 profile")
        return complex(self(r, ang)[0, 0])

    def vector(self, r, ang=None) -> np.ndarray:
        """Evaluate at one radius; returns ``(value_dim,)``."""
        return self(r, ang)[0]

    @classmethod
    def bumps(
        cls,
        d0: float,
        beta0: Optional[float] = None,
        value_dim: int = 1,
        n_radial: int = 8,
        n_angular: int = 4,
        coeffs=None,
        rng: Optional[np.random.Generator] = None,
        complex_coeffs: bool = True,
    ) -> "RadialProfile":
        """Standard bump layout: ``n_radial`` centers uniform on [0, d0] with
        sigma = d0 / n_radial, optionally times ``n_angular`` bumps on [0, beta0].
        Coefficients default to a seeded uniform draw in [-0.5, 0.5]."""
        centers = np.linspace(0.0, d0, n_radial)
        sigma = d0 / n_radial
        ang_centers = ang_sigma = None
        shape = (value_dim, n_radial)
        if beta0 is not None:
            ang_centers = np.linspace(0.0, beta0, n_angular)
            ang_sigma = beta0 / n_angular
            shape = (value_dim, n_radial, n_angular)
        if coeffs is None:
            rng = rng if rng is not None else np.random.default_rng(0)
            coeffs = rng.uniform(-0.5, 0.5, size=shape).astype(complex)
            if complex_coeffs:
                coeffs = coeffs + 1j * rng.uniform(-0.5, 0.5, size=shape)
        return cls(centers, sigma, np.asarray(coeffs, dtype=complex), ang_centers, ang_sigma)


@dataclass(frozen=True)
class KernelSupport:
    """Compact support of a bank: max ray distance ``d0`` and max angle ``beta0``."""

    d0: float
    beta0: float = np.pi


# ---------------------------------------------------------------------------
# frame features of a ray relative to the base axis


@dataclass(frozen=True)
class _Frame:
    dz: np.ndarray
    r: np.ndarray        # distance between the ray and the base axis
    ang: np.ndarray      # angle between d and e_z
    phi: np.ndarray      # azimuth of d
    g: np.ndarray        # height function (off-pole rows only)
    m_norm: np.ndarray
    m_phi: np.ndarray    # azimuth of the moment
    north: np.ndarray
    south: np.ndarray
    off: np.ndarray


def _frame(D: np.ndarray, M: np.ndarray) -> _Frame:
    D = np.atleast_2d(np.asarray(D, dtype=float))
    M = np.atleast_2d(np.asarray(M, dtype=float))
    dz = D[:, 2]
    north = dz > 1.0 - POLE_GUARD
    south = dz < -1.0 + POLE_GUARD
    off = ~(north | south)
    C = np.cross(D, M)
    sin2 = np.maximum(1.0 - dz**2, 0.0)
    # distance to the axis: reciprocal product off-pole, foot offset at poles
    with np.errstate(divide="ignore", invalid="ignore"):
        r_off = np.abs(M[:, 2]) / np.sqrt(sin2)
        g = np.where(off, C[:, 2] / np.where(off, sin2, 1.0), 0.0)
    r_pole = np.hypot(C[:, 0], C[:, 1])
    r = np.where(off, np.where(np.sqrt(sin2) > 0, r_off, 0.0), r_pole)
    ang = np.arccos(np.clip(dz, -1.0, 1.0))
    return _Frame(
        dz=dz,
        r=r,
        ang=ang,
        phi=np.arctan2(D[:, 1], D[:, 0]),
        g=g,
        m_norm=np.linalg.norm(M, axis=1),
        m_phi=np.arctan2(M[:, 1], M[:, 0]),
        north=north,
        south=south,
        off=off,
    )


def _profile_values(profile: RadialProfile, fr: _Frame) -> np.ndarray:
    """Scalar profile over a frame, with the pole angle pinned to 0 / pi."""
    ang = np.where(fr.north, 0.0, np.where(fr.south, np.pi, fr.ang))
    if profile.has_angular:
        return profile(fr.r, ang)[:, 0]
    return profile(fr.r)[:, 0]


def _kappa1_phase(w_in: int, w_out: int, fr: _Frame) -> np.ndarray:
    """Profile-free SO(2) factor of the ray-to-ray kernel."""
    out = np.zeros(len(fr.dz), dtype=complex)
    out[fr.off] = np.exp(-1j * w_out * fr.phi[fr.off])
    for pole, rel in ((fr.north, w_out - w_in), (fr.south, w_out + w_in)):
        if not pole.any():
            continue
        on_axis = pole & (fr.r <= AXIS_EPS)
        off_axis = pole & ~on_axis
        if rel == 0:
            out[pole] = 1.0
        else:
            out[on_axis] = 0.0
            out[off_axis] = np.exp(-1j * rel * fr.m_phi[off_axis])
    return out


def _kappa1_values(w_in, w_out, D, M, profile) -> np.ndarray:
    fr = _frame(D, M)
    vals = _profile_values(profile, fr) * _kappa1_phase(w_in, w_out, fr)
    # the matching pole branch is a constant, pinned to the profile at r = 0
    for pole, rel, ang0 in ((fr.north, w_out - w_in, 0.0), (fr.south, w_out + w_in, np.pi)):
        if rel == 0 and pole.any():
            const = profile.scalar(0.0, ang0 if profile.has_angular else None)
            vals[pole] = const
    return vals


def _kappa2_phase(w2_in: float, w2_out: float, fr: _Frame) -> np.ndarray:
    """Profile-free translation factor of the ray-to-ray irrep kernel."""
    out = np.zeros(len(fr.dz), dtype=complex)
    out[fr.off] = np.exp(-1j * (w2_out - w2_in * fr.dz[fr.off]) * fr.g[fr.off])
    if fr.north.any() and abs(w2_out - w2_in) < 1e-12:
        out[fr.north] = 1.0
    if fr.south.any() and abs(w2_out + w2_in) < 1e-12:
        out[fr.south] = 1.0
    return out


def _kappa2_irrep_values(w2_in, w2_out, D, M, profile) -> np.ndarray:
    fr = _frame(D, M)
    return _profile_values(profile, fr) * _kappa2_phase(w2_in, w2_out, fr)


def _kappa2_regular_values(w2_in, D, M, profile):
    """Dirac weights and anchor parameters of the regular-output kernel."""
    fr = _frame(D, M)
    weights = np.zeros(len(fr.dz), dtype=complex)
    weights[fr.off] = (
        _profile_values(profile, fr)[fr.off]
        * np.exp(1j * w2_in * fr.dz[fr.off] * fr.g[fr.off])
    )
    params = np.where(fr.off, fr.g, 0.0)
    return weights, params


def _ray_to_point_values(l_out: int, D, M, profile, d0=None) -> np.ndarray:
    D = np.atleast_2d(np.asarray(D, dtype=float))
    M = np.atleast_2d(np.asarray(M, dtype=float))
    dim = 2 * l_out + 1
    if profile.value_dim != dim:
        raise ValueError(f"profile value_dim {profile.value_dim} != {dim} for l={l_out}")
    mn = np.linalg.norm(M, axis=1)
    out = np.zeros((len(mn), dim), dtype=complex)
    through = mn <= AXIS_EPS
    if through.any():
        c = profile.vector(0.0)[0]
        out[through] = c * (np.ones((through.sum(), 1)) if l_out == 0 else D[through])
    main = ~through
    if d0 is not None:
        main &= mn <= d0
    if main.any():
        f = profile(mn[main])  # (k, dim)
        if l_out == 0:
            out[main] = f
        else:
            m_hat = M[main] / mn[main][:, None]
            frame = np.stack([D[main], m_hat, np.cross(D[main], m_hat)], axis=2)
            out[main] = np.einsum("nij,nj->ni", frame, f)
    return out


# ---------------------------------------------------------------------------
# scalar entry points


def kappa1(omega1_in: int, omega1_out: int, x: Ray, profile: RadialProfile) -> complex:
    """SO(2) kernel factor at one ray.

    Off the poles: ``profile(d(axis, x), angle(e_z, d)) * exp(-i omega1_out
    * azimuth(d))``.  At d = +/- e_z the solution degenerates: a constant when
    the types match (omega1_out = omega1_in at the north pole, = -omega1_in at
    the south pole), zero on the base ray itself when they do not, and a
    moment-azimuth phase otherwise.
    """
    return complex(_kappa1_values(omega1_in, omega1_out, x.d, x.m, profile)[0])


def height_g(x: Ray) -> float:
    """Height of the ray over the base axis.

    The z-coordinate of the intersection with the base axis, or of the foot
    of their common perpendicular on the axis; equals ``c_z / (1 - d_z^2)``
    with ``c = d x m``.  Satisfies ``height_g(h x) = tau + height_g(x)`` for
    every stabilizer element ``h = (gamma, tau)``.

    Raises
    ------
    ValueError
        For rays parallel to the axis (|d_z| within 1e-9 of 1), where no
        single closest point exists.
    """
    fr = _frame(x.d, x.m)
    if not fr.off[0]:
        raise ValueError("height is undefined for rays parallel to the base axis")
    return float(fr.g[0])


def kappa2_irrep(
    omega2_in: float, omega2_out: float, x: Ray, profile: RadialProfile
) -> complex:
    """Translation kernel factor with irrep output at one ray.

    Off the poles: ``profile(...) * exp(-i (omega2_out - omega2_in * d_z)
    * height_g(x))``.  At the poles it is the bare profile when the
    frequencies match (omega2_out = +/- omega2_in at north/south) and zero
    otherwise.
    """
    return complex(_kappa2_irrep_values(omega2_in, omega2_out, x.d, x.m, profile)[0])


def kappa2_regular(omega2_in: float, x: Ray, profile: RadialProfile):
    """Translation kernel factor with regular output: one Dirac per ray.

    Returns ``(weight, anchor_param)``: the complex mass
    ``profile(...) * exp(i omega2_in d_z height_g(x))`` placed at parameter
    ``height_g(x)`` along the base axis.  Pole directions carry zero weight
    (not an error): a parallel ray has no height.
    """
    w, t = _kappa2_regular_values(omega2_in, x.d, x.m, profile)
    return complex(w[0]), float(t[0])


def kappa_ray_to_point(
    l_out: int, x: Ray, profile: RadialProfile, d0: Optional[float] = None
) -> np.ndarray:
    """Kernel mapping a scalar ray field to a degree-l point feature.

    For rays through the reference point (``|m| = 0``) the value is
    ``c * Y_l(d)`` with the constant taken from the profile at r = 0; away
    from it, the rotation with columns ``(d, m/|m|, d x m/|m|)`` applied to
    ``profile(|m|)``.  Zero outside the support radius ``d0`` when given.
    """
    if l_out not in (0, 1):
        raise ValueError(f"unsupported spherical degree l={l_out}; only 0 and 1")
    return _ray_to_point_values(l_out, x.d, x.m, profile, d0)[0]


# ---------------------------------------------------------------------------
# kernel families (bundled evaluation + covariance rule, for the checker)


@dataclass(frozen=True)
class Kappa1Kernel:
    omega1_in: int
    omega1_out: int
    profile: RadialProfile

    def batch(self, D, M):
        return _kappa1_values(self.omega1_in, self.omega1_out, D, M, self.profile)

    def __call__(self, x: Ray) -> complex:
        return kappa1(self.omega1_in, self.omega1_out, x, self.profile)

    def expected(self, h: StabilizerElement, twist: StabilizerElement, value):
        return (
            np.exp(-1j * self.omega1_out * h.gamma)
            * value
            * np.exp(1j * self.omega1_in * twist.gamma)
        )


@dataclass(frozen=True)
class Kappa2IrrepKernel:
    omega2_in: float
    omega2_out: float
    profile: RadialProfile

    def batch(self, D, M):
        return _kappa2_irrep_values(self.omega2_in, self.omega2_out, D, M, self.profile)

    def __call__(self, x: Ray) -> complex:
        return kappa2_irrep(self.omega2_in, self.omega2_out, x, self.profile)

    def expected(self, h: StabilizerElement, twist: StabilizerElement, value):
        return (
            np.exp(-1j * self.omega2_out * h.tau)
            * value
            * np.exp(1j * self.omega2_in * twist.tau)
        )


@dataclass(frozen=True)
class Kappa2RegularKernel:
    omega2_in: float
    profile: RadialProfile

    def __call__(self, x: Ray):
        return kappa2_regular(self.omega2_in, x, self.profile)


@dataclass(frozen=True)
class RayToPointKernel:
    l_out: int
    profile: RadialProfile
    d0: Optional[float] = None

    def batch(self, D, M):
        return _ray_to_point_values(self.l_out, D, M, self.profile, self.d0)

    def __call__(self, x: Ray) -> np.ndarray:
        return kappa_ray_to_point(self.l_out, x, self.profile, self.d0)


@dataclass(frozen=True)
class RayToRayKernel:
    """Full ray-to-ray kernel for one irrep type pair: profile times the two
    phase factors, with the joint pole branches."""

    type_in: FieldType
    type_out: FieldType
    profile: RadialProfile

    def batch(self, D, M):
        fr = _frame(D, M)
        return (
            _profile_values(self.profile, fr)
            * _kappa1_phase(self.type_in.omega1, self.type_out.omega1, fr)
            * _kappa2_phase(self.type_in.omega2, self.type_out.omega2, fr)
        )

    def __call__(self, x: Ray) -> complex:
        return complex(self.batch(x.d, x.m)[0])

    def expected(self, h: StabilizerElement, twist: StabilizerElement, value):
        rho_out = np.exp(
            -1j * (self.type_out.omega1 * h.gamma + self.type_out.omega2 * h.tau)
        )
        rho_in_inv = np.exp(
            1j * (self.type_in.omega1 * twist.gamma + self.type_in.omega2 * twist.tau)
        )
        return rho_out * value * rho_in_inv


# ---------------------------------------------------------------------------
# constraint verification


def _random_unit_vectors(rng: np.random.Generator, n: int, max_abs_dz=None) -> np.ndarray:
    out = np.empty((0, 3))
    while len(out) < n:
        cand = rng.normal(size=(2 * (n - len(out)) + 8, 3))
        cand /= np.linalg.norm(cand, axis=1, keepdims=True)
        if max_abs_dz is not None:
            cand = cand[np.abs(cand[:, 2]) <= max_abs_dz]
        out = np.vstack([out, cand])
    return out[:n]


def _random_offaxis_rays(rng: np.random.Generator, n: int, max_abs_dz: float = 0.98):
    """Rays drawn away from the pole branches: |d_z| bounded off 1."""
    D = _random_unit_vectors(rng, n, max_abs_dz)
    C = rng.normal(scale=0.7, size=(n, 3))
    C -= np.sum(C * D, axis=1, keepdims=True) * D
    return D, np.cross(C, D)


def _random_rotations(rng: np.random.Generator, n: int) -> np.ndarray:
    """Uniform rotation matrices, shape (n, 3, 3), via unit quaternions."""
    q = rng.normal(size=(n, 4))
    q /= np.linalg.norm(q, axis=1, keepdims=True)
    w, x, y, z = q.T
    return np.stack(
        [
            np.stack([1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)], axis=1),
            np.stack([2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)], axis=1),
            np.stack([2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)], axis=1),
        ],
        axis=1,
    )


def _apply_stabilizer(gamma: np.ndarray, tau: np.ndarray, D: np.ndarray, M: np.ndarray):
    """Batched stabilizer action: rotate about the axis, then slide along it."""
    cg, sg = np.cos(gamma), np.sin(gamma)
    Dr = np.stack([cg * D[:, 0] - sg * D[:, 1], sg * D[:, 0] + cg * D[:, 1], D[:, 2]], axis=1)
    Mr = np.stack([cg * M[:, 0] - sg * M[:, 1], sg * M[:, 0] + cg * M[:, 1], M[:, 2]], axis=1)
    slide = tau[:, None] * np.stack([-Dr[:, 1], Dr[:, 0], np.zeros(len(Dr))], axis=1)
    return Dr, Mr + slide


def _stabilizer_twists(gamma: np.ndarray, tau: np.ndarray, D: np.ndarray, Dr: np.ndarray):
    """Batched frame-change twist of a stabilizer element at each ray:
    the sphere-section angle between ``s(R d)`` and ``R s(d)``, and the
    slide the rotated direction picks up."""
    cg, sg = np.cos(gamma), np.sin(gamma)
    c1, _ = _section_cols(D)
    a = np.stack([cg * c1[:, 0] - sg * c1[:, 1], sg * c1[:, 0] + cg * c1[:, 1], c1[:, 2]], axis=1)
    c1r, c2r = _section_cols(Dr)
    g_tw = np.arctan2(np.sum(c2r * a, axis=1), np.sum(c1r * a, axis=1))
    return g_tw, tau * D[:, 2]


def _irrep_frequencies(kernel):
    if isinstance(kernel, Kappa1Kernel):
        return kernel.omega1_in, kernel.omega1_out, 0.0, 0.0
    if isinstance(kernel, Kappa2IrrepKernel):
        return 0, 0, kernel.omega2_in, kernel.omega2_out
    return (
        kernel.type_in.omega1,
        kernel.type_out.omega1,
        kernel.type_in.omega2,
        kernel.type_out.omega2,
    )


def constraint_residuals(kernel, n_samples: int, seed: int = 0) -> np.ndarray:
    """Residuals ``|kappa(h x) - rho_out(h) kappa(x) rho_in(twist)^{-1}|`` over
    random stabilizer elements and rays drawn away from the branch boundaries.

    For the ray-to-point family the stabilizer is SO(3) and the rule is
    ``kappa(R x) = D_l(R) kappa(x)`` (scalar input).  For the regular-output
    family the check covers both the weight phase and the parameter shift.
    """
    rng = np.random.default_rng(seed)

    if isinstance(kernel, RayToPointKernel):
        D = _random_unit_vectors(rng, n_samples)
        P = rng.normal(scale=0.5, size=(n_samples, 3))
        M = np.cross(P, D)
        R = _random_rotations(rng, n_samples)
        lhs = kernel.batch(
            np.einsum("nij,nj->ni", R, D), np.einsum("nij,nj->ni", R, M)
        )
        k = kernel.batch(D, M)
        rhs = k if kernel.l_out == 0 else np.einsum("nij,nj->ni", R, k)
        return np.abs(lhs - rhs).max(axis=1)

    D, M = _random_offaxis_rays(rng, n_samples)
    gamma = rng.uniform(0, 2 * np.pi, size=n_samples)
    tau = rng.normal(scale=0.7, size=n_samples)
    Dh, Mh = _apply_stabilizer(gamma, tau, D, M)

    if isinstance(kernel, Kappa2RegularKernel):
        w0, t0 = _kappa2_regular_values(kernel.omega2_in, D, M, kernel.profile)
        w1, t1 = _kappa2_regular_values(kernel.omega2_in, Dh, Mh, kernel.profile)
        w_expect = w0 * np.exp(1j * kernel.omega2_in * D[:, 2] * tau)
        return np.maximum(np.abs(w1 - w_expect), np.abs(t1 - (t0 + tau)))

    g_tw, t_tw = _stabilizer_twists(gamma, tau, D, Dh)
    w1i, w1o, w2i, w2o = _irrep_frequencies(kernel)
    lhs = kernel.batch(Dh, Mh)
    rhs = (
        np.exp(-1j * (w1o * gamma + w2o * tau))
        * kernel.batch(D, M)
        * np.exp(1j * (w1i * g_tw + w2i * t_tw))
    )
    return np.abs(lhs - rhs)


def verify_kernel_constraint(kernel, n_samples: int = 1000, seed: int = 0) -> float:
    """Max constraint residual of a kernel over ``n_samples`` random draws."""
    return float(constraint_residuals(kernel, n_samples, seed).max())


# ---------------------------------------------------------------------------
# kernel banks


@dataclass(frozen=True)
class KernelEntry:
    type_in: FieldType
    type_out: FieldType
    profile: RadialProfile
    role: str = "conv"


@dataclass(frozen=True)
class KernelBank:
    entries: tuple
    support: KernelSupport

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))

    def entries_for(self, type_in: FieldType, type_out: FieldType, role: str = "conv"):
        return [
            e
            for e in self.entries
            if e.type_in == type_in and e.type_out == type_out and e.role == role
        ]

    def profile_for(
        self, type_in: FieldType, type_out: FieldType, role: str = "conv"
    ) -> RadialProfile:
        found = self.entries_for(type_in, type_out, role)
        if not found:
            raise MissingKernelError(
                f"no {role!r} entry maps {type_in} to {type_out} in this bank"
            )
        if len(found) > 1:
            raise MissingKernelError(
                f"{len(found)} {role!r} entries map {type_in} to {type_out}; "
                "expected exactly one"
            )
        return found[0].profile


def _type_to_dict(t: FieldType) -> dict:
    d = {"kind": t.kind}
    if t.kind == "ray_irrep":
        d.update(omega1=t.omega1, omega2=t.omega2)
    elif t.kind == "ray_regular":
        d.update(omega1=t.omega1, samples=t.samples, t_min=t.t_min, t_max=t.t_max)
    else:
        d.update(l=t.l)
    return d


def _type_from_dict(d: dict) -> FieldType:
    kind = d["kind"]
    if kind == "ray_irrep":
        return FieldType.ray(d["omega1"], d["omega2"])
    if kind == "ray_regular":
        return FieldType.regular(d["omega1"], d["samples"], d["t_min"], d["t_max"])
    if kind == "point_irrep":
        return FieldType.point(d["l"])
    raise BankFormatError(f"unknown field kind {kind!r}")


def profile_to_dict(p: RadialProfile) -> dict:
    rec = {
        "centers": p.centers.tolist(),
        "sigma": p.sigma,
        "coeffs_re": p.coeffs.real.tolist(),
        "coeffs_im": p.coeffs.imag.tolist(),
    }
    if p.has_angular:
        rec["ang_centers"] = p.ang_centers.tolist()
        rec["ang_sigma"] = p.ang_sigma
    return rec


def profile_from_dict(rec: dict, where: str = "profile") -> RadialProfile:
    try:
        coeffs = np.asarray(rec["coeffs_re"]) + 1j * np.asarray(rec["coeffs_im"])
        return RadialProfile(
            np.asarray(rec["centers"], dtype=float),
            float(rec["sigma"]),
            coeffs,
            np.asarray(rec["ang_centers"], dtype=float) if "ang_centers" in rec else None,
            rec.get("ang_sigma"),
        )
    except KeyError as exc:
        raise BankFormatError(f"{where}: missing key {exc.args[0]!r}") from None


def bank_to_dict(bank: KernelBank) -> dict:
    entries = []
    for e in bank.entries:
        rec = profile_to_dict(e.profile)
        rec["type_in"] = _type_to_dict(e.type_in)
        rec["type_out"] = _type_to_dict(e.type_out)
        rec["role"] = e.role
        entries.append(rec)
    return {
        "entries": entries,
        "support": {"d0": bank.support.d0, "beta0": bank.support.beta0},
    }


def bank_from_dict(doc: dict) -> KernelBank:
    try:
        support = KernelSupport(doc["support"]["d0"], doc["support"]["beta0"])
    except KeyError as exc:
        raise BankFormatError(f"support: missing key {exc.args[0]!r}") from None
    entries = []
    for i, rec in enumerate(doc.get("entries", [])):
        where = f"entry {i}"
        profile = profile_from_dict(rec, where)
        try:
            entries.append(
                KernelEntry(
                    _type_from_dict(rec["type_in"]),
                    _type_from_dict(rec["type_out"]),
                    profile,
                    rec.get("role", "conv"),
                )
            )
        except KeyError as exc:
            raise BankFormatError(f"{where}: missing key {exc.args[0]!r}") from None
    return KernelBank(tuple(entries), support)


def write_kernel_bank(bank: KernelBank, path) -> None:
    """Serialize a bank to JSON: entries with centers/sigma/coefficients plus
    the shared support."""
    with open(path, "w") as fh:
        json.dump(bank_to_dict(bank), fh, indent=1)


def read_kernel_bank(path) -> KernelBank:
    with open(path) as fh:
        doc = json.load(fh)
    return bank_from_dict(doc)
