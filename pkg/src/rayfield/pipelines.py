"""Toy forward pipelines built from the equivariant blocks.

Two end-to-end paths: a signed-distance head (ray field -> point features ->
invariant scalar) and a renderer (ray field -> depth-resolved features along
a target ray -> colors and densities -> volumetric composite).  Weights are
seeded-random — equivariance must hold for arbitrary coefficients — or come
from the closed-form least-squares profile fit.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, replace
from typing import Optional

import numpy as np

from .ray_geometry import Ray, param_of
from .representations import AnchoredSamples, Feature, FieldType
from .kernels import (
    BankFormatError,
    KernelBank,
    KernelEntry,
    KernelSupport,
    RadialProfile,
    RayToRayKernel,
    _ray_to_point_values,
    _type_from_dict,
    _type_to_dict,
    bank_from_dict,
    bank_to_dict,
    profile_from_dict,
    profile_to_dict,
)
from .conv import (
    SampledRayField,
    conv_ray_to_point,
    conv_ray_to_ray_regular,
    spherical_conv_intra_view,
)
from .attention import (
    AttentionHeadSpec,
    EmptyNeighborhoodError,
    EquivariantLinear,
    cross_attention_ray_to_point,
    cross_attention_ray_to_ray_regular,
    gated_nonlinearity,
    self_attention_along_ray,
    signed_bumps,
)

__all__ = [
    "PipelineConfig",
    "PipelineWeights",
    "SdfBlockWeights",
    "RenderResult",
    "init_random",
    "sdf_forward",
    "render_ray",
    "render_view",
    "volumetric_composite",
    "fit_radial_profiles_ls",
    "ProfileFit",
    "prefilter_intra_view",
    "common_center",
    "write_weights",
    "read_weights",
]


@dataclass(frozen=True)
class PipelineConfig:
    """Shapes and supports shared by both pipelines."""

    channels: int = 3
    heads: int = 1
    blocks: int = 3
    n_radial: int = 8
    d0_point: float = 0.35
    d0_ray: float = 0.25
    n_anchors: int = 32
    t_min: float = 0.9
    t_max: float = 2.7
    intra_view_prefilter: bool = False

    def point_types(self):
        return (FieldType.point(0), FieldType.point(1))

    def regular_types(self):
        return tuple(
            FieldType.regular(w, self.n_anchors, self.t_min, self.t_max)
            for w in (0, 1)
        )

    def anchor_depths(self) -> np.ndarray:
        """Camera-relative anchor depths: uniform with one interval of the
        window left after the last anchor, matching the discrete Fourier
        grid of the regular types."""
        return np.linspace(self.t_min, self.t_max, self.n_anchors, endpoint=False)


@dataclass
class SdfBlockWeights:
    """One refinement block: channel mixer, gate, and attention query map."""

    lin: EquivariantLinear
    gate_a: np.ndarray
    gate_b: np.ndarray
    w_q: EquivariantLinear


@dataclass
class PipelineWeights:
    """Every trainable coefficient of both pipelines, plus the seed of record.

    Construction validates that each (type_in, type_out, role) the forward
    passes reference exists in the corresponding bank.
    """

    config: PipelineConfig
    seed: int
    sdf_bank: KernelBank
    sdf_blocks: tuple
    sdf_readout_w: np.ndarray
    sdf_readout_b: float
    render_bank: KernelBank
    render_w_q: EquivariantLinear
    self_c_k: RadialProfile
    self_c_v: RadialProfile
    self_c_q: complex
    density_w: np.ndarray
    density_b: float
    prefilter: Optional[RayToRayKernel] = None

    def __post_init__(self):
        self.sdf_blocks = tuple(self.sdf_blocks)
        scalar = FieldType.scalar()
        for t in self.config.point_types():
            for role in ("conv", "key", "value"):
                self.sdf_bank.profile_for(scalar, t, role)
        for t in self.config.regular_types():
            for role in ("conv", "key", "value"):
                self.render_bank.profile_for(scalar, t, role)
        if self.config.intra_view_prefilter and self.prefilter is None:
            raise ValueError("config enables the intra-view prefilter but no kernel is set")

    def sdf_spec(self) -> AttentionHeadSpec:
        types = self.config.point_types()
        return AttentionHeadSpec(types, types, self.config.channels, self.config.heads)

    def render_spec(self) -> AttentionHeadSpec:
        types = self.config.regular_types()
        return AttentionHeadSpec(types, types, self.config.channels, self.config.heads)


def init_random(config: PipelineConfig = PipelineConfig(), seed: int = 0) -> PipelineWeights:
    """Draw every coefficient uniform on [-0.5, 0.5] from one seeded stream."""
    rng = np.random.default_rng(seed)
    C = config.channels
    scalar = FieldType.scalar()

    sdf_entries = []
    for role in ("conv", "key", "value"):
        for t in config.point_types():
            profile = RadialProfile.bumps(
                config.d0_point,
                value_dim=t.rep_dim,
                n_radial=config.n_radial,
                rng=rng,
                complex_coeffs=False,  # point irreps are real in this basis
            )
            sdf_entries.append(KernelEntry(scalar, t, profile, role))
    sdf_bank = KernelBank(tuple(sdf_entries), KernelSupport(config.d0_point))

    def unit_matrix():
        return rng.uniform(-0.5, 0.5, size=(C, C))

    blocks = []
    p0, p1 = config.point_types()
    for _ in range(config.blocks):
        lin = EquivariantLinear({p0: unit_matrix(), p1: unit_matrix()})
        gate_a = rng.uniform(-0.5, 0.5, size=C)
        gate_b = rng.uniform(-0.5, 0.5, size=C)
        w_q = EquivariantLinear({p0: unit_matrix(), p1: unit_matrix()})
        blocks.append(SdfBlockWeights(lin, gate_a, gate_b, w_q))

    # degree-0 values, degree-1 norms, and the pairwise degree-1 dots
    inv_dim = 2 * C + C * (C - 1) // 2
    sdf_readout_w = rng.uniform(-0.5, 0.5, size=inv_dim)
    sdf_readout_b = float(rng.uniform(-0.5, 0.5))

    render_entries = []
    for role in ("conv", "key", "value"):
        for t in config.regular_types():
            profile = RadialProfile.bumps(
                config.d0_ray, value_dim=1, n_radial=config.n_radial, rng=rng
            )
            render_entries.append(KernelEntry(scalar, t, profile, role))
    render_bank = KernelBank(tuple(render_entries), KernelSupport(config.d0_ray))

    def cmatrix():
        return rng.uniform(-0.5, 0.5, size=(C, C)) + 1j * rng.uniform(-0.5, 0.5, size=(C, C))

    render_w_q = EquivariantLinear({0: cmatrix(), 1: cmatrix()})

    span = config.t_max - config.t_min
    self_c_k = signed_bumps(span, rng=rng)
    self_c_v = signed_bumps(span, rng=rng)
    self_c_q = complex(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5))

    density_w = rng.uniform(-0.5, 0.5, size=3 * C)
    density_b = float(rng.uniform(-0.5, 0.5))

    prefilter = None
    if config.intra_view_prefilter:
        prefilter = RayToRayKernel(
            scalar,
            scalar,
            RadialProfile.bumps(
                config.d0_ray, beta0=np.pi, n_radial=config.n_radial, rng=rng
            ),
        )

    return PipelineWeights(
        config,
        int(seed),
        sdf_bank,
        tuple(blocks),
        sdf_readout_w,
        sdf_readout_b,
        render_bank,
        render_w_q,
        self_c_k,
        self_c_v,
        self_c_q,
        density_w,
        density_b,
        prefilter,
    )


# ---------------------------------------------------------------------------
# signed-distance pipeline


def _invariants_from_point_features(f0: Feature, f1: Feature) -> np.ndarray:
    """SO(3) invariants: degree-0 values, degree-1 norms, pairwise dots."""
    scalars = f0.values[:, 0].real
    vecs = f1.values.real
    norms = np.linalg.norm(vecs, axis=1)
    dots = np.array(
        [vecs[i] @ vecs[j] for i in range(len(vecs)) for j in range(i + 1, len(vecs))]
    )
    return np.concatenate([scalars, norms, dots])


def sdf_forward(v: SampledRayField, w: PipelineWeights, points) -> np.ndarray:
    """Signed-distance estimates at the query points.

    Per point: ray->point convolution (degrees 0 and 1), then refinement
    blocks of {channel mix, gated nonlinearity, cross attention over nearby
    rays}, then an affine map of the rotation invariants.

    Raises
    ------
    EmptyNeighborhoodError
        If a query point has no ray within the kernel support.
    """
    field = _maybe_prefilter(v, w)
    points = np.atleast_2d(np.asarray(points, dtype=float))
    spec = w.sdf_spec()
    out = np.empty(len(points))
    D, M = field.rays[:, :3], field.rays[:, 3:]
    for i, p in enumerate(points):
        off = np.linalg.norm(M - np.cross(p, D), axis=1)
        if not (off <= w.config.d0_point).any():
            raise EmptyNeighborhoodError(
                f"no ray within {w.config.d0_point} of point {p.tolist()}"
            )
        f0 = conv_ray_to_point(field, w.sdf_bank, p, 0)
        f1 = conv_ray_to_point(field, w.sdf_bank, p, 1)
        for block in w.sdf_blocks:
            mixed = block.lin.apply_bundle([f0, f1])
            gated = [gated_nonlinearity(f, block.gate_a, block.gate_b) for f in mixed]
            att = cross_attention_ray_to_point(
                field, w.sdf_bank, spec, p, gated, w_q=block.w_q
            )
            f0 = Feature(f0.ftype, gated[0].values + att.features[0].values)
            f1 = Feature(f1.ftype, gated[1].values + att.features[1].values)
        inv = _invariants_from_point_features(f0, f1)
        out[i] = float(inv @ w.sdf_readout_w + w.sdf_readout_b)
    return out


# ---------------------------------------------------------------------------
# rendering pipeline


def volumetric_composite(colors, densities, params, t_far) -> np.ndarray:
    """Front-to-back compositing of anchor colors with their densities.

    ``C = sum_i T_i (1 - exp(-sigma_i delta_i)) c_i`` with transmittance
    ``T_i = exp(-sum_{j<i} sigma_j delta_j)``; the last interval runs from
    the final anchor to ``t_far``.
    """
    colors = np.atleast_2d(np.asarray(colors, dtype=float))
    densities = np.asarray(densities, dtype=float).ravel()
    params = np.asarray(params, dtype=float).ravel()
    if len(params) != len(densities) or len(params) != len(colors):
        raise ValueError("colors, densities, and params must share one length")
    if len(params) > 1 and not np.all(np.diff(params) > 0.0):
        raise ValueError("anchor parameters must be strictly increasing")
    if not t_far > params[-1]:
        raise ValueError("t_far must lie beyond the last anchor")
    if densities.min(initial=0.0) < 0.0:
        raise ValueError("densities must be nonnegative")
    deltas = np.append(np.diff(params), t_far - params[-1])
    optical = densities * deltas
    transmit = np.exp(-(np.cumsum(optical) - optical))
    alpha = -np.expm1(-optical)
    return (transmit * alpha) @ colors


@dataclass(frozen=True)
class RenderResult:
    """Composited color plus the per-anchor quantities that produced it.

    ``empty`` flags a target ray with no contributing source ray; its color
    is the background.
    """

    rgb: np.ndarray
    empty: bool
    colors: np.ndarray
    densities: np.ndarray
    samples: AnchoredSamples


def _softplus(x):
    return np.logaddexp(0.0, x)


def _anchor_invariants(a: AnchoredSamples) -> np.ndarray:
    """Per-anchor invariants: re/im of the type-0 channels, norms of the rest."""
    omega = np.asarray(a.omega1)
    triv = omega == 0
    return np.concatenate(
        [a.values[:, triv].real, a.values[:, triv].imag, np.abs(a.values[:, ~triv])],
        axis=1,
    )


def render_ray(v: SampledRayField, w: PipelineWeights, target: Ray, anchors) -> RenderResult:
    """Render one target ray from the sampled light field.

    Depth-resolved features arrive by regular-output convolution, are
    refined by cross attention (which also regresses per-anchor color from
    the contributors' radiance) and along-ray self attention; densities are
    a softplus of per-anchor invariants; the color is the volumetric
    composite over the anchors.
    """
    field = _maybe_prefilter(v, w)
    anchors = np.atleast_2d(np.asarray(anchors, dtype=float))
    if len(anchors) < 2:
        raise ValueError("rendering needs at least two anchors")
    reg0, reg1 = w.config.regular_types()
    a0 = conv_ray_to_ray_regular(field, w.render_bank, target, reg0, anchors)
    a1 = conv_ray_to_ray_regular(field, w.render_bank, target, reg1, anchors)
    C = w.config.channels
    prior = AnchoredSamples(
        a0.ray,
        a0.anchors,
        np.hstack([a0.values, a1.values]),
        (0,) * C + (1,) * C,
    )
    att = cross_attention_ray_to_ray_regular(
        field,
        w.render_bank,
        w.render_spec(),
        target,
        prior,
        w_q=w.render_w_q,
        aux=field.values.real,
    )
    refined = self_attention_along_ray(att.samples, w.self_c_k, w.self_c_v, w.self_c_q)
    samples = refined.samples
    densities = _softplus(_anchor_invariants(samples) @ w.density_w + w.density_b)
    colors = att.aux
    params = samples.params
    t_far = 2.0 * params[-1] - params[-2]
    empty = len(att.indices) == 0
    rgb = volumetric_composite(colors, densities, params, t_far)
    return RenderResult(rgb, empty, colors, densities, samples)


def render_view(
    v: SampledRayField, w: PipelineWeights, camera, workers: int = 1
):
    """Render a full camera view; returns the image and the empty-ray mask.

    Pixels are independent; ``workers`` > 1 renders them on a thread pool.
    """
    depths = w.config.anchor_depths()
    directions = camera.pixel_directions()
    center = camera.center

    def one(d):
        ray = Ray(d, np.cross(center, d))
        anchors = center[None, :] + depths[:, None] * d[None, :]
        res = render_ray(v, w, ray, anchors)
        return res.rgb, res.empty

    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, directions))
    else:
        results = [one(d) for d in directions]
    image = np.array([r[0] for r in results]).reshape(camera.height, camera.width, 3)
    empty = np.array([r[1] for r in results]).reshape(camera.height, camera.width)
    return image, empty


# ---------------------------------------------------------------------------
# intra-view prefilter (optional first stage)


def common_center(rays: np.ndarray) -> np.ndarray:
    """Point minimizing the summed squared distance to the given rays."""
    D, M = rays[:, :3], rays[:, 3:]
    feet = np.cross(D, M)
    P = np.eye(3)[None, :, :] - D[:, :, None] * D[:, None, :]
    A = P.sum(axis=0)
    b = np.einsum("nij,nj->i", P, feet)
    try:
        return np.linalg.solve(A, b)
    except np.linalg.LinAlgError:
        raise ValueError("rays do not determine a center (all parallel)") from None


def prefilter_intra_view(field: SampledRayField, kernel: RayToRayKernel) -> SampledRayField:
    """Replace each ray's value by a spherical convolution over its own view."""
    if field.views is None:
        raise ValueError("the intra-view prefilter needs per-view ray indices")
    values = np.empty_like(field.values)
    for view in np.unique(field.views):
        idx = np.nonzero(field.views == view)[0]
        sub = field.restrict_to_view(int(view))
        center = common_center(sub.rays)
        for row, i in enumerate(idx):
            out = spherical_conv_intra_view(sub, center, kernel, sub.rays[row, :3])
            values[i] = out.values[:, 0]
    return replace(field, values=values)


def _maybe_prefilter(v: SampledRayField, w: PipelineWeights) -> SampledRayField:
    if not w.config.intra_view_prefilter:
        return v
    return prefilter_intra_view(v, w.prefilter)


# ---------------------------------------------------------------------------
# least-squares profile fit


@dataclass(frozen=True)
class ProfileFit:
    """Solution of the linear profile fit: recovered profile, coefficients
    (value_dim, n_radial), fit residual norm, and the solver's rank report."""

    profile: RadialProfile
    coeffs: np.ndarray
    residual: float
    rank: int
    rank_deficient: bool


def fit_radial_profiles_ls(
    v: SampledRayField,
    targets,
    l_out: int = 0,
    d0: float = 0.35,
    n_radial: int = 8,
) -> ProfileFit:
    """Fit a ray->point kernel profile to target values by least squares.

    The convolution output is linear in the profile coefficients, so targets
    ``(point, value)`` — ``value`` of shape (channels, 2l+1), reals accepted
    for degree 0 — give a linear system solved in the least-squares sense;
    a rank-deficient system returns the minimum-norm solution, flagged.
    """
    dim = 2 * l_out + 1
    C = v.channels
    template = RadialProfile.bumps(
        d0, value_dim=dim, n_radial=n_radial, coeffs=np.zeros((dim, n_radial))
    )
    n_coeff = dim * n_radial
    pairs = [(np.asarray(p, dtype=float), np.asarray(y, dtype=float)) for p, y in targets]
    if len(pairs) * C * dim < n_coeff:
        raise ValueError(
            f"{len(pairs)} targets under-determine {n_coeff} coefficients"
        )
    D, M = v.rays[:, :3], v.rays[:, 3:]
    A = np.zeros((len(pairs) * C * dim, n_coeff))
    y = np.zeros(len(pairs) * C * dim)
    unit_profiles = [
        replace(template, coeffs=e.reshape(dim, n_radial)) for e in np.eye(n_coeff)
    ]
    for r, (p, val) in enumerate(pairs):
        y[r * C * dim : (r + 1) * C * dim] = val.reshape(C, dim).ravel()
        Mp = M - np.cross(p, D)
        keep = np.linalg.norm(Mp, axis=1) <= d0
        if not keep.any():
            continue
        f = v.values[keep].real
        for j, unit in enumerate(unit_profiles):
            k = _ray_to_point_values(l_out, D[keep], Mp[keep], unit).real
            A[r * C * dim : (r + 1) * C * dim, j] = np.einsum(
                "nd,nc->cd", k, f
            ).ravel()
    coeffs, _, rank, _ = np.linalg.lstsq(A, y, rcond=None)
    residual = float(np.linalg.norm(A @ coeffs - y))
    profile = replace(template, coeffs=coeffs.reshape(dim, n_radial))
    return ProfileFit(profile, coeffs.reshape(dim, n_radial), residual, int(rank), rank < n_coeff)


# ---------------------------------------------------------------------------
# weights (de)serialization


def _linear_to_dict(lin: EquivariantLinear) -> list:
    out = []
    for key, W in lin.weights.items():
        W = np.asarray(W, dtype=complex)
        rec = {"w_re": W.real.tolist(), "w_im": W.imag.tolist()}
        if isinstance(key, FieldType):
            rec["type"] = _type_to_dict(key)
        else:
            rec["omega1"] = int(key)
        out.append(rec)
    return out


def _linear_from_dict(records, where: str) -> EquivariantLinear:
    weights = {}
    for i, rec in enumerate(records):
        try:
            W = np.asarray(rec["w_re"]) + 1j * np.asarray(rec["w_im"])
            key = _type_from_dict(rec["type"]) if "type" in rec else int(rec["omega1"])
        except KeyError as exc:
            raise BankFormatError(f"{where}[{i}]: missing key {exc.args[0]!r}") from None
        weights[key] = W
    return EquivariantLinear(weights)


def write_weights(w: PipelineWeights, path) -> None:
    """Write every coefficient, the config echo, and the seed of record."""
    doc = {
        "seed": w.seed,
        "config": asdict(w.config),
        "sdf_bank": bank_to_dict(w.sdf_bank),
        "sdf_blocks": [
            {
                "lin": _linear_to_dict(b.lin),
                "gate_a": np.asarray(b.gate_a).tolist(),
                "gate_b": np.asarray(b.gate_b).tolist(),
                "w_q": _linear_to_dict(b.w_q),
            }
            for b in w.sdf_blocks
        ],
        "sdf_readout": {"w": w.sdf_readout_w.tolist(), "b": w.sdf_readout_b},
        "render_bank": bank_to_dict(w.render_bank),
        "render_w_q": _linear_to_dict(w.render_w_q),
        "self_attention": {
            "c_k": profile_to_dict(w.self_c_k),
            "c_v": profile_to_dict(w.self_c_v),
            "c_q_re": w.self_c_q.real,
            "c_q_im": w.self_c_q.imag,
        },
        "density": {"w": w.density_w.tolist(), "b": w.density_b},
    }
    if w.prefilter is not None:
        doc["prefilter"] = profile_to_dict(w.prefilter.profile)
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)


def read_weights(path) -> PipelineWeights:
    with open(path) as fh:
        doc = json.load(fh)

    def need(key):
        if key not in doc:
            raise BankFormatError(f"weights file: missing key {key!r}")
        return doc[key]

    config = PipelineConfig(**need("config"))
    blocks = []
    for i, rec in enumerate(need("sdf_blocks")):
        where = f"sdf_blocks[{i}]"
        blocks.append(
            SdfBlockWeights(
                _linear_from_dict(rec["lin"], where + ".lin"),
                np.asarray(rec["gate_a"], dtype=float),
                np.asarray(rec["gate_b"], dtype=float),
                _linear_from_dict(rec["w_q"], where + ".w_q"),
            )
        )
    sa = need("self_attention")
    prefilter = None
    if "prefilter" in doc:
        scalar = FieldType.scalar()
        prefilter = RayToRayKernel(scalar, scalar, profile_from_dict(doc["prefilter"]))
    return PipelineWeights(
        config,
        int(need("seed")),
        bank_from_dict(need("sdf_bank")),
        tuple(blocks),
        np.asarray(need("sdf_readout")["w"], dtype=float),
        float(need("sdf_readout")["b"]),
        bank_from_dict(need("render_bank")),
        _linear_from_dict(need("render_w_q"), "render_w_q"),
        profile_from_dict(sa["c_k"], "self_attention.c_k"),
        profile_from_dict(sa["c_v"], "self_attention.c_v"),
        complex(sa["c_q_re"], sa["c_q_im"]),
        np.asarray(need("density")["w"], dtype=float),
        float(need("density")["b"]),
        prefilter,
    )
