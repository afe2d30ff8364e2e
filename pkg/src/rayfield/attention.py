"""Equivariant attention over rays and along rays.

Keys and values are single convolution terms (so they inherit the kernel
constraint), queries are Schur-restricted linear images of a feature already
living at the site, and attention scores are real parts of the typed Hermitian
inner product.  Scores built this way are invariant under the group action,
so reweighting values by their softmax preserves equivariance.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .ray_geometry import Ray
from .representations import AnchoredSamples, Feature, FieldType
from .kernels import KernelBank, RadialProfile, _ray_to_point_values
from .conv import (
    SampledRayField,
    _regular_contributions,
    nearest_anchor_bins,
)

__all__ = [
    "AttentionHeadSpec",
    "EquivariantLinear",
    "SchurError",
    "EmptyNeighborhoodError",
    "build_key_value",
    "cross_attention_ray_to_point",
    "cross_attention_ray_to_ray_regular",
    "self_attention_along_ray",
    "gated_nonlinearity",
    "signed_bumps",
]


class SchurError(ValueError):
    """A linear map between distinct irrep types was requested."""


class EmptyNeighborhoodError(RuntimeError):
    """No ray falls inside the attention support of the site."""

    code = "empty-neighborhood"


@dataclass(frozen=True)
class AttentionHeadSpec:
    """Shape of one attention stage: which types are paired in the score,
    which types the values carry, the head count, and the softmax temperature
    (default: sqrt of the per-head key dimension)."""

    key_types: tuple
    value_types: tuple
    channels: int
    heads: int = 1
    temperature: Optional[float] = None

    def __post_init__(self):
        if self.channels % self.heads:
            raise ValueError("head count must divide the channel count")

    def resolved_temperature(self) -> float:
        if self.temperature is not None:
            return self.temperature
        dim = sum(t.rep_dim if isinstance(t, FieldType) else 1 for t in self.key_types)
        return float(np.sqrt(dim * self.channels / self.heads))


@dataclass
class EquivariantLinear:
    """Per-type complex channel-mixing matrices.

    By Schur's lemma an equivariant linear map cannot mix distinct irrep
    types, so the weights are a dict keyed by type (a :class:`FieldType`, or
    a bare ``omega1`` integer for anchored regular channels), each value a
    ``(c_out, c_in)`` matrix acting on channels only.
    """

    weights: dict

    @classmethod
    def for_pair(cls, type_in, type_out, matrix) -> "EquivariantLinear":
        if type_in != type_out:
            raise SchurError(
                f"no equivariant linear map exists from {type_in} to {type_out}"
            )
        return cls({type_in: np.asarray(matrix, dtype=complex)})

    def __call__(self, f: Feature) -> Feature:
        try:
            W = self.weights[f.ftype]
        except KeyError:
            raise SchurError(f"no weight registered for type {f.ftype}") from None
        return Feature(f.ftype, np.asarray(W, dtype=complex) @ f.values)

    def apply_bundle(self, bundle: Sequence[Feature]) -> list:
        return [self(f) for f in bundle]

    def apply_anchored(self, a: AnchoredSamples) -> AnchoredSamples:
        values = np.empty_like(a.values)
        omega = np.asarray(a.omega1)
        for w in sorted(set(a.omega1)):
            cols = np.nonzero(omega == w)[0]
            try:
                W = np.asarray(self.weights[int(w)], dtype=complex)
            except KeyError:
                raise SchurError(f"no weight registered for omega1={w}") from None
            values[:, cols] = a.values[:, cols] @ W.T
        return replace(a, values=values)


def _softmax(scores: np.ndarray, axis: int = -1) -> np.ndarray:
    z = scores - scores.max(axis=axis, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=axis, keepdims=True)


def _head_slices(channels: int, heads: int):
    step = channels // heads
    return [slice(h * step, (h + 1) * step) for h in range(heads)]


def signed_bumps(
    span: float,
    n: int = 5,
    coeffs=None,
    rng: Optional[np.random.Generator] = None,
    complex_coeffs: bool = True,
) -> RadialProfile:
    """Gaussian bumps of a signed distance: ``n`` centers uniform on
    [-span, span], for the along-ray attention couplings."""
    centers = np.linspace(-span, span, n)
    sigma = 2.0 * span / n
    if coeffs is None:
        rng = rng if rng is not None else np.random.default_rng(0)
        coeffs = rng.uniform(-0.5, 0.5, size=(1, n)).astype(complex)
        if complex_coeffs:
            coeffs = coeffs + 1j * rng.uniform(-0.5, 0.5, size=(1, n))
    return RadialProfile(centers, sigma, np.asarray(coeffs, dtype=complex))


# ---------------------------------------------------------------------------
# ray -> point cross attention


def _point_frame(field: SampledRayField, point: np.ndarray):
    D, M = field.rays[:, :3], field.rays[:, 3:]
    Mp = M - np.cross(np.broadcast_to(point, D.shape), D)
    return D, Mp


def build_key_value(bank: KernelBank, site, y: Ray, f1: np.ndarray):
    """Key and value bundles contributed by one neighbor ray at a point site.

    Single convolution terms: ``kappa_role(s(site)^{-1} y) f1(y)`` for the
    bank's key- and value-role entries.  ``f1`` is the neighbor's scalar
    channel vector.
    """
    site = np.asarray(site, dtype=float)
    f1 = np.asarray(f1, dtype=complex)
    out = []
    for role in ("key", "value"):
        feats = []
        for e in bank.entries:
            if e.role != role:
                continue
            l = e.type_out.l
            k = _ray_to_point_values(
                l, y.d[None, :], (y.m - np.cross(site, y.d))[None, :], e.profile
            )[0]
            feats.append(Feature(e.type_out, np.outer(f1, k)))
        out.append(tuple(feats))
    return tuple(out)


@dataclass(frozen=True)
class PointAttentionResult:
    features: tuple
    weights: np.ndarray  # (heads, n_neighbors)
    indices: np.ndarray


def cross_attention_ray_to_point(
    field: SampledRayField,
    bank: KernelBank,
    spec: AttentionHeadSpec,
    point,
    query_feature: Sequence[Feature],
    w_q: Optional[EquivariantLinear] = None,
) -> PointAttentionResult:
    """Attend from a point over nearby rays; keys/values are kernel terms.

    Raises
    ------
    EmptyNeighborhoodError
        If no ray passes within the bank support radius of the point.
    """
    if field.ftype != FieldType.scalar():
        raise ValueError("cross attention to a point needs a scalar ray field")
    if spec.channels != field.channels:
        raise ValueError("spec channel width must match the field channels")
    point = np.asarray(point, dtype=float)
    D, Mp = _point_frame(field, point)
    keep = np.nonzero(np.linalg.norm(Mp, axis=1) <= bank.support.d0)[0]
    if not len(keep):
        raise EmptyNeighborhoodError(
            f"no ray within {bank.support.d0} of point {point.tolist()}"
        )
    vals = field.values[keep]

    q_bundle = list(query_feature)
    if w_q is not None:
        q_bundle = w_q.apply_bundle(q_bundle)
    q_by_type = {f.ftype: f.values for f in q_bundle}

    slices = _head_slices(spec.channels, spec.heads)
    scores = np.zeros((spec.heads, len(keep)))
    key_terms = {}
    for t in spec.key_types:
        profile = bank.profile_for(FieldType.scalar(), t, "key")
        k = _ray_to_point_values(t.l, D[keep], Mp[keep], profile)  # (n, dim)
        K = np.einsum("nd,nc->ncd", k, vals)  # (n, C, dim)
        key_terms[t] = K
        if t not in q_by_type:
            raise ValueError(f"query feature is missing key type {t}")
        q = q_by_type[t]  # (C, dim)
        for h, sl in enumerate(slices):
            scores[h] += np.real(
                np.einsum("cd,ncd->n", np.conj(q[sl]), K[:, sl])
            )
    weights = _softmax(scores / spec.resolved_temperature(), axis=1)

    out = []
    for t in spec.value_types:
        profile = bank.profile_for(FieldType.scalar(), t, "value")
        k = _ray_to_point_values(t.l, D[keep], Mp[keep], profile)
        V = np.einsum("nd,nc->ncd", k, vals)
        agg = np.empty((spec.channels, t.rep_dim), dtype=complex)
        for h, sl in enumerate(slices):
            agg[sl] = np.einsum("n,ncd->cd", weights[h], V[:, sl])
        out.append(Feature(t, agg))
    return PointAttentionResult(tuple(out), weights, keep)


# ---------------------------------------------------------------------------
# ray -> ray cross attention on regular features


@dataclass(frozen=True)
class RegularAttentionResult:
    samples: AnchoredSamples
    weights: np.ndarray    # per contributor, (n_contributors, heads)
    bins: np.ndarray       # anchor index per contributor
    indices: np.ndarray    # field index per contributor
    aux: Optional[np.ndarray] = None


def cross_attention_ray_to_ray_regular(
    field: SampledRayField,
    bank: KernelBank,
    spec: AttentionHeadSpec,
    query: Ray,
    prior: AnchoredSamples,
    w_q: Optional[EquivariantLinear] = None,
    aux: Optional[np.ndarray] = None,
) -> RegularAttentionResult:
    """Per-anchor attention over the rays whose Dirac lands in each bin.

    Keys and values are single terms of the regular-output convolution, so
    every contributor is weighed at the depth where it crosses the query ray.
    Anchors that receive no contributor carry the prior through unchanged.
    When ``aux`` (one row per field ray; e.g. per-view radiance) is given,
    the same attention weights are applied to it directly, head-averaged.
    """
    key_types = list(spec.key_types)
    value_types = list(spec.value_types)
    if spec.channels != field.channels:
        raise ValueError("spec channel width must match the field channels")
    expect_omega = tuple(
        int(t.omega1) for t in value_types for _ in range(spec.channels)
    )
    if prior.omega1 != expect_omega:
        raise ValueError("prior channel layout does not match the value types")

    idx, _, params = _regular_contributions(field, bank, query, key_types[0], "key")
    n_anchors = prior.n_anchors
    out_values = prior.values.copy()
    aux_out = None
    if aux is not None:
        aux = np.asarray(aux)
        aux_out = np.zeros((n_anchors, aux.shape[1]))
    if not len(idx):
        return RegularAttentionResult(
            replace(prior, values=out_values),
            np.zeros((0, spec.heads)),
            np.zeros(0, dtype=int),
            idx,
            aux_out,
        )
    bins = nearest_anchor_bins(params, prior.params)
    vals = field.values[idx]

    def role_terms(role, types):
        terms = {}
        for t in types:
            sub, w, p = _regular_contributions(field, bank, query, t, role)
            if not np.array_equal(sub, idx):
                raise ValueError("kernel roles disagree on the support set")
            terms[t] = w[:, None] * vals  # (n, C)
        return terms

    keys = role_terms("key", key_types)
    values = role_terms("value", value_types)

    prior_by_type = {}
    col = 0
    for t in value_types:
        prior_by_type[int(t.omega1)] = prior.values[:, col : col + spec.channels]
        col += spec.channels

    slices = _head_slices(spec.channels, spec.heads)
    scores = np.zeros((len(idx), spec.heads))
    for t in key_types:
        q_block = prior_by_type[int(t.omega1)]  # (n_anchors, C)
        if w_q is not None:
            W = np.asarray(w_q.weights[int(t.omega1)], dtype=complex)
            q_block = q_block @ W.T
        q_at = q_block[bins]  # (n, C)
        K = keys[t]
        for h, sl in enumerate(slices):
            scores[:, h] += np.real(np.sum(np.conj(q_at[:, sl]) * K[:, sl], axis=1))
    scores /= spec.resolved_temperature()

    # per-bin softmax over contributors
    weights = np.zeros_like(scores)
    for j in np.unique(bins):
        rows = bins == j
        weights[rows] = _softmax(scores[rows], axis=0)

    col = 0
    for t in value_types:
        V = values[t]
        for h, sl in enumerate(slices):
            block = weights[:, h, None] * V[:, sl]
            agg = np.zeros((n_anchors, sl.stop - sl.start), dtype=complex)
            np.add.at(agg, bins, block)
            touched = np.zeros(n_anchors, dtype=bool)
            touched[bins] = True
            out_values[touched, col + sl.start : col + sl.stop] = agg[touched]
        col += spec.channels

    if aux is not None:
        mean_w = weights.mean(axis=1)
        np.add.at(aux_out, bins, mean_w[:, None] * aux[idx])

    return RegularAttentionResult(
        replace(prior, values=out_values), weights, bins, idx, aux_out
    )


# ---------------------------------------------------------------------------
# self attention along one ray


@dataclass(frozen=True)
class AlongRayAttentionResult:
    samples: AnchoredSamples
    weights: np.ndarray  # (n_anchors, n_anchors)


def self_attention_along_ray(
    a: AnchoredSamples,
    c_k: RadialProfile,
    c_v: RadialProfile,
    c_q: complex,
    temperature: Optional[float] = None,
) -> AlongRayAttentionResult:
    """Attention among the anchors of one ray.

    Keys and values couple anchors through profiles of the signed distance
    ``t_j - t_i`` times the identity on channels; the query is a constant
    multiple of the anchor's own feature.  The scores depend only on signed
    distances and typed inner products, hence are invariant.
    """
    dt = a.params[None, :] - a.params[:, None]  # (n, n), signed
    ck = c_k(dt.ravel())[:, 0].reshape(dt.shape)
    cv = c_v(dt.ravel())[:, 0].reshape(dt.shape)
    inner = np.einsum("ic,jc->ij", np.conj(a.values), a.values)
    temp = temperature if temperature is not None else float(np.sqrt(a.channels))
    scores = np.real(np.conj(c_q) * ck * inner) / temp
    weights = _softmax(scores, axis=1)
    out = np.einsum("ij,jc->ic", weights * cv, a.values)
    return AlongRayAttentionResult(replace(a, values=out), weights)


# ---------------------------------------------------------------------------
# gated nonlinearity


def _sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


def gated_nonlinearity(f, a, b):
    """Pointwise nonlinearity that respects the type.

    Trivial (type-0) channels pass through tanh; every other channel is
    gated by a sigmoid of its norm: ``z -> sigmoid(a |z| + b) z``, which
    commutes with phases and rotations.  ``a`` and ``b`` are per-channel.
    """
    channels = f.channels
    a = np.broadcast_to(np.asarray(a, dtype=float), (channels,))
    b = np.broadcast_to(np.asarray(b, dtype=float), (channels,))
    if isinstance(f, AnchoredSamples):
        omega = np.asarray(f.omega1)
        values = f.values.copy()
        triv = omega == 0
        if triv.any():
            values[:, triv] = np.tanh(values[:, triv])
        rest = ~triv
        if rest.any():
            mag = np.abs(values[:, rest])
            gate = _sigmoid(a[rest][None, :] * mag + b[rest][None, :])
            values[:, rest] = gate * values[:, rest]
        return replace(f, values=values)

    if f.ftype.is_trivial:
        return Feature(f.ftype, np.tanh(f.values))
    norms = np.linalg.norm(f.values, axis=1)
    gate = _sigmoid(a * norms + b)
    return Feature(f.ftype, gate[:, None] * f.values)
