"""Equivariant convolution of sampled ray fields.

A convolution at a query ray transports every sample into the query's
canonical frame, evaluates an analytic kernel there, twists the sample value
by the input representation of the frame-change cocycle, and sums:

    f_out(x) = sum_y kappa(s(x)^{-1} y) rho_in(h(s(x)^{-1} s(y))) f(y).

Finite unit-weight sums stand in for the integral; neighborhoods are found by
brute force inside the kernel support.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .ray_geometry import Ray, param_of, ray_through
from .group_theory import section_sphere
from .representations import (
    AnchoredSamples,
    Feature,
    FieldType,
    _section_cols,
)
from .kernels import (
    KernelBank,
    KernelSupport,
    RayToRayKernel,
    _frame,
    _kappa1_phase,
    _kappa2_regular_values,
    _ray_to_point_values,
)

__all__ = [
    "SampledRayField",
    "neighborhood",
    "conv_ray_to_ray",
    "conv_ray_to_point",
    "conv_ray_to_ray_regular",
    "spherical_conv_intra_view",
]


@dataclass(frozen=True)
class SampledRayField:
    """Finite ray field: ``rays`` (N, 6) as ``[d, m]`` rows, complex ``values``
    (N, channels) of one uniform type, and an optional per-ray view id."""

    rays: np.ndarray
    values: np.ndarray
    ftype: FieldType
    views: Optional[np.ndarray] = None

    def __post_init__(self):
        rays = np.asarray(self.rays, dtype=float)
        values = np.asarray(self.values, dtype=complex)
        if rays.ndim != 2 or rays.shape[1] != 6:
            raise ValueError("rays must have shape (N, 6)")
        if values.ndim != 2 or values.shape[0] != rays.shape[0]:
            raise ValueError("values must have shape (N, channels)")
        norms = np.linalg.norm(rays[:, :3], axis=1)
        if np.abs(norms - 1.0).max(initial=0.0) > 1e-9:
            raise ValueError("ray directions must be unit vectors")
        dots = np.abs(np.sum(rays[:, :3] * rays[:, 3:], axis=1))
        if dots.max(initial=0.0) > 1e-9:
            raise ValueError("ray moments must be orthogonal to directions")
        views = self.views
        if views is not None:
            views = np.asarray(views, dtype=int)
            if views.shape != (rays.shape[0],):
                raise ValueError("views must have shape (N,)")
        object.__setattr__(self, "rays", rays)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "views", views)

    @property
    def n_rays(self) -> int:
        return self.rays.shape[0]

    @property
    def channels(self) -> int:
        return self.values.shape[1]

    def ray(self, i: int) -> Ray:
        return Ray(self.rays[i, :3], self.rays[i, 3:])

    def restrict_to_view(self, view: int) -> "SampledRayField":
        if self.views is None:
            raise ValueError("field carries no view ids")
        keep = self.views == view
        return replace(
            self, rays=self.rays[keep], values=self.values[keep], views=self.views[keep]
        )


def _distances_to(query: Ray, D: np.ndarray, M: np.ndarray) -> np.ndarray:
    """Line-to-line distances from the query to each sample ray."""
    cross = np.cross(np.broadcast_to(query.d, D.shape), D)
    n = np.linalg.norm(cross, axis=1)
    recip = np.abs(M @ query.d + D @ query.m)
    feet = np.cross(D, M)
    delta = feet - query.foot
    perp = delta - np.outer(delta @ query.d, query.d)
    par = np.linalg.norm(perp, axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(n > 1e-9, recip / np.where(n > 0, n, 1.0), par)


def neighborhood(field: SampledRayField, query: Ray, support: KernelSupport) -> np.ndarray:
    """Indices (ascending) of field rays inside the kernel support of the query."""
    D, M = field.rays[:, :3], field.rays[:, 3:]
    dist = _distances_to(query, D, M)
    ang = np.arccos(np.clip(D @ query.d, -1.0, 1.0))
    return np.nonzero((dist <= support.d0) & (ang <= support.beta0))[0]


def _transport_to_frame(query: Ray, D: np.ndarray, M: np.ndarray):
    """Sample rays expressed in the query's canonical frame ``s(x)^{-1} y``."""
    S = section_sphere(query.d)
    foot = query.foot
    Dz = D @ S
    Mz = (M - np.cross(np.broadcast_to(foot, D.shape), D)) @ S
    return Dz, Mz, S


def _origin_twists(query: Ray, D: np.ndarray, M: np.ndarray, Dz: np.ndarray, S: np.ndarray):
    """Stabilizer twist ``h(s(x)^{-1} s(y))`` per sample: angles and slides."""
    c1_y, _ = _section_cols(D)
    a0 = c1_y @ S  # first column of R_a = S^T R_y, one row per sample
    c1_z, c2_z = _section_cols(Dz)
    gamma = np.arctan2(np.sum(c2_z * a0, axis=1), np.sum(c1_z * a0, axis=1))
    feet_y = np.cross(D, M)
    t_a = (feet_y - query.foot) @ S
    tau = np.sum(t_a * Dz, axis=1)
    return gamma, tau


def _rho_in_factors(ftype: FieldType, query: Ray, D, M, Dz, S) -> np.ndarray:
    if ftype.omega1 == 0 and ftype.omega2 == 0.0:
        return np.ones(len(Dz), dtype=complex)
    gamma, tau = _origin_twists(query, D, M, Dz, S)
    return np.exp(-1j * (ftype.omega1 * gamma + ftype.omega2 * tau))


def conv_ray_to_ray(
    field: SampledRayField, bank: KernelBank, query: Ray, type_out: FieldType
) -> Feature:
    """Convolve a ray-irrep field to a ray-irrep output at the query ray.

    Sums kernel-weighted, twist-corrected samples over the support
    neighborhood; an empty neighborhood yields the zero feature.
    """
    if field.ftype.kind != "ray_irrep" or type_out.kind != "ray_irrep":
        raise ValueError("conv_ray_to_ray maps ray irreps to ray irreps")
    entries = bank.entries_for(field.ftype, type_out)
    if not entries:
        from .kernels import MissingKernelError

        raise MissingKernelError(f"no entry maps {field.ftype} to {type_out}")
    idx = neighborhood(field, query, bank.support)
    out = np.zeros(field.channels, dtype=complex)
    if len(idx):
        D, M = field.rays[idx, :3], field.rays[idx, 3:]
        Dz, Mz, S = _transport_to_frame(query, D, M)
        rho = _rho_in_factors(field.ftype, query, D, M, Dz, S)
        for e in entries:
            k = RayToRayKernel(field.ftype, type_out, e.profile).batch(Dz, Mz)
            out += (k * rho) @ field.values[idx]
    return Feature(type_out, out[:, None])


def conv_ray_to_point(
    field: SampledRayField, bank: KernelBank, point, l_out: int
) -> Feature:
    """Convolve a scalar ray field to a degree-l point feature.

    The neighborhood is every ray passing within the support radius of the
    point; the input type must be scalar (the kernel family is only solved
    for trivial input).
    """
    if field.ftype != FieldType.scalar():
        raise ValueError("conv_ray_to_point requires a scalar input field")
    point = np.asarray(point, dtype=float)
    entries = bank.entries_for(FieldType.scalar(), FieldType.point(l_out))
    if not entries:
        from .kernels import MissingKernelError

        raise MissingKernelError(f"no entry maps scalar rays to point l={l_out}")
    D, M = field.rays[:, :3], field.rays[:, 3:]
    Mp = M - np.cross(np.broadcast_to(point, D.shape), D)
    keep = np.linalg.norm(Mp, axis=1) <= bank.support.d0
    dim = 2 * l_out + 1
    out = np.zeros((field.channels, dim), dtype=complex)
    if keep.any():
        for e in entries:
            k = _ray_to_point_values(l_out, D[keep], Mp[keep], e.profile)
            out += np.einsum("nd,nc->cd", k, field.values[keep])
    return Feature(FieldType.point(l_out), out)


def _regular_contributions(
    field: SampledRayField, bank: KernelBank, query: Ray, type_out: FieldType, role: str
):
    """Shared machinery of the regular-output ops: per-sample Dirac weights
    (kappa1 phase included), their anchor parameters, and the sample indices."""
    if field.ftype != FieldType.scalar():
        raise ValueError("regular-output convolution requires a scalar input field")
    if type_out.kind != "ray_regular":
        raise ValueError("type_out must be a regular ray type")
    profile = bank.profile_for(FieldType.scalar(), type_out, role)
    idx = neighborhood(field, query, bank.support)
    if not len(idx):
        return idx, np.zeros(0, dtype=complex), np.zeros(0)
    D, M = field.rays[idx, :3], field.rays[idx, 3:]
    Dz, Mz, _ = _transport_to_frame(query, D, M)
    fr = _frame(Dz, Mz)
    weights, params = _kappa2_regular_values(0.0, Dz, Mz, profile)
    weights = weights * _kappa1_phase(0, type_out.omega1, fr)
    # parallel rays never cross the query and carry no Dirac; drop them so
    # every kernel role sees the same contributor set
    live = fr.off
    return idx[live], weights[live], params[live]


def nearest_anchor_bins(params: np.ndarray, anchor_params: np.ndarray) -> np.ndarray:
    """Nearest-anchor assignment (no interpolation), shared by every
    regular-output op so transported contributions bin identically."""
    return np.abs(params[:, None] - anchor_params[None, :]).argmin(axis=1)


def conv_ray_to_ray_regular(
    field: SampledRayField,
    bank: KernelBank,
    query: Ray,
    type_out: FieldType,
    anchors,
) -> AnchoredSamples:
    """Convolve a scalar ray field to a regular (depth-resolved) ray feature.

    Each sample ray deposits its Dirac weight at the height where it crosses
    the query (mapped through the query's section), binned to the nearest
    anchor; the SO(2) factor of the kernel is applied per ``omega1`` of the
    output type.
    """
    out = AnchoredSamples.along(
        query,
        [param_of(query, p) for p in np.asarray(anchors, dtype=float)],
        (type_out.omega1,) * field.channels,
    )
    if type_out.samples != out.n_anchors:
        raise ValueError(
            f"type declares {type_out.samples} samples but {out.n_anchors} anchors given"
        )
    idx, weights, params = _regular_contributions(field, bank, query, type_out, "conv")
    values = np.zeros((out.n_anchors, field.channels), dtype=complex)
    if len(idx):
        bins = nearest_anchor_bins(params, out.params)
        np.add.at(values, bins, weights[:, None] * field.values[idx])
    return replace(out, values=values)


def spherical_conv_intra_view(
    field: SampledRayField,
    center,
    kernel: RayToRayKernel,
    query_dir,
    beta0: float = np.pi,
) -> Feature:
    """Convolution of a single-view field, written as a spherical convolution.

    For rays through one camera center and a translation-trivial input type,
    the ray convolution collapses to a convolution on the direction sphere:
    the kernel is evaluated on the section-transported direction paired with
    the moment it acquires from the center's height on the query, and samples
    are twisted by the SO(2) sphere cocycle only.  Matches
    :func:`conv_ray_to_ray` on the same samples to float accuracy.
    """
    if kernel.type_in.omega2 != 0.0 or kernel.type_out.omega2 != 0.0:
        raise ValueError("the spherical form needs translation-trivial types")
    if field.ftype != kernel.type_in:
        raise ValueError("field type does not match the kernel input type")
    center = np.asarray(center, dtype=float)
    D, M = field.rays[:, :3], field.rays[:, 3:]
    off = np.linalg.norm(M - np.cross(np.broadcast_to(center, D.shape), D), axis=1)
    if off.max(initial=0.0) > 1e-9:
        raise ValueError("field mixes camera centers: a ray misses the given center")
    query_dir = np.asarray(query_dir, dtype=float)
    query_dir = query_dir / np.linalg.norm(query_dir)
    x = ray_through(center, query_dir)
    zc = param_of(x, center)

    S = section_sphere(query_dir)
    delta = D @ S
    mom = zc * np.stack([-delta[:, 1], delta[:, 0], np.zeros(len(delta))], axis=1)
    k = kernel.batch(delta, mom)

    c1_y, _ = _section_cols(D)
    a0 = c1_y @ S
    c1_d, c2_d = _section_cols(delta)
    gamma = np.arctan2(np.sum(c2_d * a0, axis=1), np.sum(c1_d * a0, axis=1))
    rho = np.exp(-1j * kernel.type_in.omega1 * gamma)

    keep = np.arccos(np.clip(D @ query_dir, -1.0, 1.0)) <= beta0
    out = (k[keep] * rho[keep]) @ field.values[keep]
    return Feature(kernel.type_out, out[:, None])
