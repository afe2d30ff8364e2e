"""Randomized audit suites: each one makes an equivariance or consistency
claim executable over seeded draws and reports the residual distribution.

Every suite function takes a seed and a trial count and returns
``(residuals, extras)``; :func:`run_suite` wraps one in an
:class:`AuditReport` with the pass/fail verdict at the suite's tolerance.
All randomness descends from one splittable seed sequence, so trials are
reproducible and order-independent.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .ray_geometry import ORIGIN_RAY, Ray, RigidMotion, apply_motion, point_at, ray_through
from .group_theory import (
    StabilizerElement,
    compose,
    random_motion,
    random_rotation,
    section_ray,
    sphere_twist_angle,
    twist_ray,
)
from .representations import (
    AnchoredSamples,
    Feature,
    FieldType,
    act_on_anchored_samples,
    act_on_ray_field,
    frequency_grid,
    irrep_so2r,
    irrep_to_samples,
    samples_to_irrep,
    transport_point_feature,
)
from .kernels import (
    Kappa1Kernel,
    Kappa2IrrepKernel,
    Kappa2RegularKernel,
    KernelBank,
    KernelEntry,
    KernelSupport,
    RadialProfile,
    RayToPointKernel,
    RayToRayKernel,
    constraint_residuals,
)
from .conv import (
    SampledRayField,
    conv_ray_to_point,
    conv_ray_to_ray,
    conv_ray_to_ray_regular,
    spherical_conv_intra_view,
)
from .attention import (
    AttentionHeadSpec,
    EquivariantLinear,
    cross_attention_ray_to_point,
    cross_attention_ray_to_ray_regular,
    self_attention_along_ray,
    signed_bumps,
)
from .lightfield import (
    Camera,
    look_at_rotation,
    make_camera_rig,
    random_scene,
    sample_scene,
    transform_camera,
)
from .pipelines import (
    PipelineConfig,
    fit_radial_profiles_ls,
    init_random,
    render_view,
    sdf_forward,
)

__all__ = [
    "AuditReport",
    "FIELD_SUITES",
    "SUITES",
    "available_suites",
    "run_suite",
    "make_default_sample",
]

_TINY = 1e-12


@dataclass(frozen=True)
class AuditReport:
    """Outcome of one audit suite; ``passed`` iff max residual is within
    tolerance."""

    suite: str
    trials: int
    seed: int
    tolerance: float
    max_residual: float
    mean_residual: float
    passed: bool
    wall_ms: float

    def to_dict(self) -> dict:
        return {
            "suite": self.suite,
            "trials": self.trials,
            "seed": self.seed,
            "tolerance": self.tolerance,
            "max_residual": self.max_residual,
            "mean_residual": self.mean_residual,
            "pass": self.passed,
            "wall_ms": self.wall_ms,
        }

    def summary(self) -> str:
        word = "pass" if self.passed else "FAIL"
        return (
            f"[{word}] {self.suite}: max {self.max_residual:.3e} "
            f"mean {self.mean_residual:.3e} (tol {self.tolerance:.0e}, "
            f"{self.trials} trials, seed {self.seed}, {self.wall_ms:.0f} ms)"
        )


def _split(seed: int, n: int):
    """One setup generator plus ``n`` independent per-trial generators."""
    seqs = np.random.SeedSequence(seed).spawn(n + 1)
    return np.random.default_rng(seqs[0]), [np.random.default_rng(s) for s in seqs[1:]]


def _wrap_angle(a: np.ndarray) -> np.ndarray:
    return np.abs(np.angle(np.exp(1j * a)))


def _random_ray(rng, box: float = 1.0) -> Ray:
    d = rng.normal(size=3)
    d /= np.linalg.norm(d)
    return ray_through(rng.uniform(-box, box, size=3), d)


def _random_field(
    rng, n_rays: int, ftype: FieldType, channels: int = 2, box: float = 1.0, real: bool = False
) -> SampledRayField:
    rays = np.stack([_random_ray(rng, box).as_array() for _ in range(n_rays)])
    values = rng.uniform(-1.0, 1.0, size=(n_rays, channels)).astype(complex)
    if not real:
        values = values + 1j * rng.uniform(-1.0, 1.0, size=(n_rays, channels))
    return SampledRayField(rays, values, ftype)


def make_default_sample(seed: int = 7, res: int = 16, half: float = 1.0, fov: float = 0.9):
    """The default synthetic capture: eight-camera rig around a seeded scene."""
    scene = random_scene(seed)
    cams = make_camera_rig(half, fov, res, res)
    return sample_scene(scene, cams), cams, scene


def _rel(err: np.ndarray, scale: float) -> np.ndarray:
    return np.abs(np.asarray(err)).ravel() / max(scale, _TINY)


# ---------------------------------------------------------------------------
# suites


def suite_kernels(seed: int, trials: int):
    """Covariance constraint of every kernel family on random (h, x) pairs."""
    setup, _ = _split(seed, 0)
    kernels = [
        Kappa1Kernel(1, 2, RadialProfile.bumps(1.2, np.pi, rng=setup)),
        Kappa2IrrepKernel(0.8, -1.4, RadialProfile.bumps(1.2, rng=setup)),
        Kappa2RegularKernel(0.6, RadialProfile.bumps(1.2, rng=setup)),
        RayToPointKernel(0, RadialProfile.bumps(1.0, rng=setup, complex_coeffs=False)),
        RayToPointKernel(
            1, RadialProfile.bumps(1.0, value_dim=3, rng=setup, complex_coeffs=False)
        ),
        RayToRayKernel(
            FieldType.ray(1, 0.5),
            FieldType.ray(-1, -0.7),
            RadialProfile.bumps(1.2, np.pi, rng=setup),
        ),
    ]
    residuals = [
        constraint_residuals(k, trials, seed=seed + 17 * i) for i, k in enumerate(kernels)
    ]
    return np.concatenate(residuals), {"kernels": len(kernels)}


def suite_group(seed: int, trials: int):
    """Action associativity, both cocycle identities, section projection,
    and stabilizer closure."""
    _, rngs = _split(seed, trials)
    res = []
    for rng in rngs:
        g1 = random_motion(rng)
        g2 = random_motion(rng)
        x = _random_ray(rng)

        lhs = apply_motion(g1, apply_motion(g2, x)).as_array()
        rhs = apply_motion(compose(g1, g2), x).as_array()
        res.append(np.abs(lhs - rhs).max())

        h12 = twist_ray(compose(g1, g2), x)
        hh = twist_ray(g1, apply_motion(g2, x)).compose(twist_ray(g2, x))
        res.append(_wrap_angle(np.array([h12.gamma - hh.gamma]))[0])
        res.append(abs(h12.tau - hh.tau))

        d = x.d
        gs = sphere_twist_angle(g1.R @ g2.R, d)
        gg = sphere_twist_angle(g1.R, g2.R @ d) + sphere_twist_angle(g2.R, d)
        res.append(_wrap_angle(np.array([gs - gg]))[0])

        back = apply_motion(section_ray(x), ORIGIN_RAY).as_array()
        res.append(np.abs(back - x.as_array()).max())

        h1 = StabilizerElement(rng.uniform(0, 2 * np.pi), rng.normal())
        h2 = StabilizerElement(rng.uniform(0, 2 * np.pi), rng.normal())
        moved = apply_motion(h1.compose(h2).as_motion(), ORIGIN_RAY).as_array()
        res.append(np.abs(moved - ORIGIN_RAY.as_array()).max())
        inv = h1.compose(h1.inverse())
        res.append(_wrap_angle(np.array([inv.gamma]))[0] + abs(inv.tau))
    return np.asarray(res), {}


def suite_conv_r2r(seed: int, trials: int, field: SampledRayField | None = None):
    """Commuting diagram of the ray-to-ray convolution under random motions."""
    setup, rngs = _split(seed, trials)
    if field is None:
        field = _random_field(setup, 512, FieldType.ray(1, 0.8))
    type_outs = (FieldType.ray(2, -0.5), FieldType.ray(0, 1.3))
    entries = [
        KernelEntry(field.ftype, t, RadialProfile.bumps(0.7, np.pi, rng=setup))
        for t in type_outs
    ]
    bank = KernelBank(tuple(entries), KernelSupport(0.7))
    res = []
    for rng in rngs:
        g = random_motion(rng, t_scale=0.5)
        query = _random_ray(rng, box=0.5)
        moved = act_on_ray_field(g, field)
        gq = apply_motion(g, query)
        h = twist_ray(g, query)
        for t in type_outs:
            base = conv_ray_to_ray(field, bank, query, t)
            lhs = conv_ray_to_ray(moved, bank, gq, t)
            rhs = irrep_so2r(t, h) * base.values
            res.extend(_rel(lhs.values - rhs, np.abs(base.values).max()))
    return np.asarray(res), {}


def suite_conv_r2p(seed: int, trials: int, field: SampledRayField | None = None):
    """Commuting diagram of the ray-to-point convolution under random motions."""
    setup, rngs = _split(seed, trials)
    if field is None:
        field = _random_field(setup, 512, FieldType.scalar(), channels=3, real=True)
    entries = [
        KernelEntry(
            FieldType.scalar(),
            FieldType.point(l),
            RadialProfile.bumps(0.7, value_dim=2 * l + 1, rng=setup, complex_coeffs=False),
        )
        for l in (0, 1)
    ]
    bank = KernelBank(tuple(entries), KernelSupport(0.7))
    res = []
    for rng in rngs:
        g = random_motion(rng, t_scale=0.5)
        p = rng.uniform(-0.5, 0.5, size=3)
        moved = act_on_ray_field(g, field)
        gp = g.R @ p + g.t
        for l in (0, 1):
            base = conv_ray_to_point(field, bank, p, l)
            lhs = conv_ray_to_point(moved, bank, gp, l)
            rhs = transport_point_feature(g, base)
            res.extend(_rel(lhs.values - rhs.values, np.abs(base.values).max()))
    return np.asarray(res), {}


def _attention_setup(seed: int, field: SampledRayField | None = None):
    """Shared fixtures of the two attention suites: a radiance-like field,
    banks, specs, and query data for all three operations."""
    setup, _ = _split(seed, 0)
    if field is None:
        field, _, _ = make_default_sample(seed=seed, res=8)

    point_types = (FieldType.point(0), FieldType.point(1))
    sdf_entries = [
        KernelEntry(
            FieldType.scalar(),
            t,
            RadialProfile.bumps(0.35, value_dim=t.rep_dim, rng=setup, complex_coeffs=False),
            role=role,
        )
        for role in ("conv", "key", "value")
        for t in point_types
    ]
    point_bank = KernelBank(tuple(sdf_entries), KernelSupport(0.35))
    point_spec = AttentionHeadSpec(point_types, point_types, 3, heads=3)
    w_q_point = EquivariantLinear(
        {t: setup.uniform(-0.5, 0.5, size=(3, 3)) for t in point_types}
    )

    n_anchors = 16
    reg_types = tuple(FieldType.regular(w, n_anchors, 0.9, 2.7) for w in (0, 1))
    reg_entries = [
        KernelEntry(FieldType.scalar(), t, RadialProfile.bumps(0.25, rng=setup), role=role)
        for role in ("conv", "key", "value")
        for t in reg_types
    ]
    reg_bank = KernelBank(tuple(reg_entries), KernelSupport(0.25))
    reg_spec = AttentionHeadSpec(reg_types, reg_types, 3, heads=3)
    w_q_reg = EquivariantLinear(
        {
            w: setup.uniform(-0.5, 0.5, size=(3, 3))
            + 1j * setup.uniform(-0.5, 0.5, size=(3, 3))
            for w in (0, 1)
        }
    )

    span = 1.8
    c_k = signed_bumps(span, rng=setup)
    c_v = signed_bumps(span, rng=setup)
    c_q = complex(setup.uniform(-0.5, 0.5), setup.uniform(-0.5, 0.5))
    return {
        "field": field,
        "point_bank": point_bank,
        "point_spec": point_spec,
        "w_q_point": w_q_point,
        "reg_types": reg_types,
        "reg_bank": reg_bank,
        "reg_spec": reg_spec,
        "w_q_reg": w_q_reg,
        "self": (c_k, c_v, c_q),
        "n_anchors": n_anchors,
    }


def _attention_trial(fx: dict, rng) -> tuple:
    """One random motion through all three attention ops; returns
    (weight residuals, output residuals)."""
    field = fx["field"]
    g = random_motion(rng, t_scale=0.4)
    moved = act_on_ray_field(g, field)
    w_res, o_res = [], []

    # point-site cross attention
    p = rng.uniform(-0.4, 0.4, size=3)
    gp = g.R @ p + g.t
    f0 = conv_ray_to_point(field, fx["point_bank"], p, 0)
    f1 = conv_ray_to_point(field, fx["point_bank"], p, 1)
    base = cross_attention_ray_to_point(
        field, fx["point_bank"], fx["point_spec"], p, [f0, f1], w_q=fx["w_q_point"]
    )
    movedq = [transport_point_feature(g, f0), transport_point_feature(g, f1)]
    res = cross_attention_ray_to_point(
        moved, fx["point_bank"], fx["point_spec"], gp, movedq, w_q=fx["w_q_point"]
    )
    w_res.extend(np.abs(res.weights - base.weights).ravel())
    scale = max(np.abs(f.values).max() for f in base.features)
    for b, r in zip(base.features, res.features):
        o_res.extend(_rel(r.values - transport_point_feature(g, b).values, scale))

    # regular cross attention along a ray through the object
    origin = rng.uniform(-0.2, 0.2, size=3) + np.array([0.0, 0.0, -1.6])
    target_dir = np.array([0.05, -0.03, 1.0]) + rng.uniform(-0.1, 0.1, size=3)
    target = ray_through(origin, target_dir / np.linalg.norm(target_dir))
    depths = 0.9 + 1.8 * np.arange(fx["n_anchors"]) / fx["n_anchors"]
    anchors = origin[None, :] + depths[:, None] * (target.d)[None, :]
    reg0, reg1 = fx["reg_types"]
    a0 = conv_ray_to_ray_regular(field, fx["reg_bank"], target, reg0, anchors)
    a1 = conv_ray_to_ray_regular(field, fx["reg_bank"], target, reg1, anchors)
    prior = AnchoredSamples(
        a0.ray, a0.anchors, np.hstack([a0.values, a1.values]), (0,) * 3 + (1,) * 3
    )
    base_r = cross_attention_ray_to_ray_regular(
        field, fx["reg_bank"], fx["reg_spec"], target, prior, w_q=fx["w_q_reg"]
    )
    gtarget = apply_motion(g, target)
    gprior = act_on_anchored_samples(g, prior)
    res_r = cross_attention_ray_to_ray_regular(
        moved, fx["reg_bank"], fx["reg_spec"], gtarget, gprior, w_q=fx["w_q_reg"]
    )
    w_res.extend(np.abs(res_r.weights - base_r.weights).ravel())
    expect = act_on_anchored_samples(g, base_r.samples)
    scale = max(np.abs(base_r.samples.values).max(), _TINY)
    o_res.extend(_rel(res_r.samples.values - expect.values, scale))

    # self attention along the ray
    c_k, c_v, c_q = fx["self"]
    vals = rng.uniform(-1, 1, size=(fx["n_anchors"], 4)) + 1j * rng.uniform(
        -1, 1, size=(fx["n_anchors"], 4)
    )
    a = AnchoredSamples(target, anchors, vals, (0, 1, 1, 2))
    base_s = self_attention_along_ray(a, c_k, c_v, c_q)
    res_s = self_attention_along_ray(act_on_anchored_samples(g, a), c_k, c_v, c_q)
    w_res.extend(np.abs(res_s.weights - base_s.weights).ravel())
    expect_s = act_on_anchored_samples(g, base_s.samples)
    o_res.extend(
        _rel(res_s.samples.values - expect_s.values, np.abs(base_s.samples.values).max())
    )
    return w_res, o_res


def suite_attention_weights(seed: int, trials: int, field: SampledRayField | None = None):
    """Attention weights are invariant under motions of the whole scene."""
    fx = _attention_setup(seed, field)
    _, rngs = _split(seed, trials)
    res = []
    for rng in rngs:
        w_res, _ = _attention_trial(fx, rng)
        res.extend(w_res)
    return np.asarray(res), {}


def suite_attention_equivariance(seed: int, trials: int, field: SampledRayField | None = None):
    """Attention outputs transport like their types under motions."""
    fx = _attention_setup(seed, field)
    _, rngs = _split(seed, trials)
    res = []
    for rng in rngs:
        _, o_res = _attention_trial(fx, rng)
        res.extend(o_res)
    return np.asarray(res), {}


def suite_spherical(seed: int, trials: int):
    """Intra-view convolution agrees with its spherical-convolution form."""
    _, rngs = _split(seed, trials)
    res = []
    for rng in rngs:
        center = rng.normal(size=3)
        center *= 1.5 / np.linalg.norm(center)
        dirs = rng.normal(size=(64, 3))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        rays = np.hstack([dirs, np.cross(np.broadcast_to(center, dirs.shape), dirs)])
        values = rng.uniform(-1, 1, size=(64, 2)) + 1j * rng.uniform(-1, 1, size=(64, 2))
        w_in = int(rng.integers(0, 3))
        w_out = int(rng.integers(0, 3))
        ftype = FieldType.ray(w_in, 0.0)
        field = SampledRayField(rays, values, ftype)
        kernel = RayToRayKernel(
            ftype, FieldType.ray(w_out, 0.0), RadialProfile.bumps(2.5, np.pi, rng=rng)
        )
        beta0 = float(rng.uniform(1.0, np.pi))
        bank = KernelBank(
            (KernelEntry(ftype, kernel.type_out, kernel.profile),),
            KernelSupport(10.0, beta0),
        )
        qdir = rng.normal(size=3)
        qdir /= np.linalg.norm(qdir)
        query = ray_through(center, qdir)
        via_conv = conv_ray_to_ray(field, bank, query, kernel.type_out)
        via_sphere = spherical_conv_intra_view(field, center, kernel, qdir, beta0)
        res.extend(
            _rel(
                via_sphere.values - via_conv.values,
                max(np.abs(via_conv.values).max(), _TINY),
            )
        )
    return np.asarray(res), {}


def suite_fourier(seed: int, trials: int):
    """Regular-output convolution is the sampled form of the omega2 irreps:
    its DFT matches per-frequency irrep convolutions on exact-crossing data."""
    _, rngs = _split(seed, trials)
    n_anchors, per_anchor = 12, 3
    res = []
    for rng in rngs:
        query = _random_ray(rng, box=0.5)
        t0 = rng.uniform(-1.0, 0.0)
        dt = rng.uniform(0.2, 0.5)
        params = t0 + dt * np.arange(n_anchors)
        anchors = np.stack([point_at(query, t) for t in params])
        rays, values = [], []
        for t in params:
            p = point_at(query, t)
            for _ in range(per_anchor):
                d = rng.normal(size=3)
                d /= np.linalg.norm(d)
                while abs(d @ query.d) > 0.9:
                    d = rng.normal(size=3)
                    d /= np.linalg.norm(d)
                rays.append(ray_through(p, d).as_array())
                values.append(rng.uniform(-1, 1, size=2) + 1j * rng.uniform(-1, 1, size=2))
        field = SampledRayField(np.stack(rays), np.asarray(values), FieldType.scalar())
        w1 = int(rng.integers(0, 2))
        reg = FieldType.regular(w1, n_anchors, params[0], params[0] + n_anchors * dt)
        freqs = frequency_grid(n_anchors, reg.t_min, reg.t_max)
        profile = RadialProfile.bumps(3.0, rng=rng)
        entries = [KernelEntry(FieldType.scalar(), reg, profile)] + [
            KernelEntry(FieldType.scalar(), FieldType.ray(w1, w), profile) for w in freqs
        ]
        bank = KernelBank(tuple(entries), KernelSupport(3.0))
        sampled = conv_ray_to_ray_regular(field, bank, query, reg, anchors)
        coeffs = samples_to_irrep(sampled, freqs)
        scale = max(np.abs(sampled.values).max(), _TINY)
        for k, w in enumerate(freqs):
            direct = conv_ray_to_ray(field, bank, query, FieldType.ray(w1, w))
            via_dft = n_anchors * coeffs[k].values
            res.extend(_rel(direct.values - via_dft, scale))
    return np.asarray(res), {}


def suite_fourier_roundtrip(seed: int, trials: int):
    """irrep -> samples -> irrep (and back) is exact on matched grids."""
    _, rngs = _split(seed, trials)
    res = []
    for rng in rngs:
        n = int(rng.integers(4, 25))
        t0 = rng.uniform(-2.0, 2.0)
        dt = rng.uniform(0.1, 0.7)
        ray = _random_ray(rng)
        params = t0 + dt * np.arange(n)
        anchors = np.stack([point_at(ray, t) for t in params])
        freqs = frequency_grid(n, params[0], params[0] + n * dt)
        w1 = int(rng.integers(-2, 3))
        c = rng.uniform(-1, 1, size=(n, 2)) + 1j * rng.uniform(-1, 1, size=(n, 2))
        coeffs = [Feature(FieldType.ray(w1, w), c[k][:, None]) for k, w in enumerate(freqs)]
        samples = irrep_to_samples(coeffs, ray, anchors)
        back = samples_to_irrep(samples, freqs)
        for f_in, f_out in zip(coeffs, back):
            res.extend(_rel(f_out.values - f_in.values, np.abs(c).max()))
        vals = rng.uniform(-1, 1, size=(n, 2)) + 1j * rng.uniform(-1, 1, size=(n, 2))
        a = AnchoredSamples(ray, anchors, vals, (w1, w1))
        again = irrep_to_samples(samples_to_irrep(a, freqs), ray, anchors)
        res.extend(_rel(again.values - a.values, np.abs(vals).max()))
    return np.asarray(res), {}


def suite_render_pixvar(
    seed: int,
    trials: int,
    workers: int = 1,
    res: int = 16,
    field: SampledRayField | None = None,
):
    """Per-pixel variance of a rendered view across random global rotations
    of the whole frame (cameras and sample transported, content fixed)."""
    _, rngs = _split(seed, trials)
    if field is None:
        field, _, _ = make_default_sample(seed=seed, res=res)
    weights = init_random(PipelineConfig(), seed=seed)
    center = np.array([0.35, -1.45, 0.6])
    target = Camera(center, look_at_rotation(center, np.zeros(3)), 0.8, res, res)
    images = []
    for rng in rngs:
        g = RigidMotion(random_rotation(rng), np.zeros(3))
        image, _ = render_view(
            act_on_ray_field(g, field), weights, transform_camera(g, target), workers
        )
        images.append(image)
    variance = np.var(np.stack(images), axis=0)
    return variance.ravel(), {"rotations": len(images), "resolution": res}


def suite_sdf(
    seed: int, trials: int, n_points: int = 100, field: SampledRayField | None = None
):
    """The signed-distance head commutes with motions of the whole scene."""
    setup, rngs = _split(seed, trials)
    if field is None:
        field, _, _ = make_default_sample(seed=seed)
    weights = init_random(PipelineConfig(), seed=seed)
    points = setup.uniform(-0.45, 0.45, size=(n_points, 3))
    base = sdf_forward(field, weights, points)
    scale = max(np.abs(base).max(), _TINY)
    res = []
    for rng in rngs:
        g = random_motion(rng, t_scale=0.5)
        vals = sdf_forward(act_on_ray_field(g, field), weights, points @ g.R.T + g.t)
        res.extend(np.abs(vals - base) / scale)
    return np.asarray(res), {"n_points": n_points}


def suite_fit(seed: int, trials: int, field: SampledRayField | None = None):
    """Generate-and-recover for the least-squares profile fit, plus a strict
    win over the constant-mean predictor on held-out points.

    Residuals are the held-out prediction errors and the training residual;
    a failing baseline comparison contributes an infinite residual.
    """
    setup, _ = _split(seed, 0)
    if field is None:
        field, _, _ = make_default_sample(seed=seed, res=8)
    d0, n_radial = 0.35, 8
    truth = RadialProfile.bumps(d0, rng=setup, complex_coeffs=False)
    bank = KernelBank(
        (KernelEntry(FieldType.scalar(), FieldType.point(0), truth),),
        KernelSupport(d0),
    )

    def targets_at(points):
        return [
            (p, conv_ray_to_point(field, bank, p, 0).values.real.ravel())
            for p in points
        ]

    n_train = max(trials, 3 * n_radial)
    train_pts = setup.uniform(-0.4, 0.4, size=(n_train, 3))
    held_pts = setup.uniform(-0.4, 0.4, size=(max(n_train // 2, 8), 3))
    train = targets_at(train_pts)
    held = targets_at(held_pts)
    fit = fit_radial_profiles_ls(field, train, l_out=0, d0=d0, n_radial=n_radial)

    fitted_bank = KernelBank(
        (KernelEntry(FieldType.scalar(), FieldType.point(0), fit.profile),),
        KernelSupport(d0),
    )
    pred = np.array(
        [conv_ray_to_point(field, fitted_bank, p, 0).values.real.ravel() for p, _ in held]
    )
    truthv = np.array([y for _, y in held])
    scale = max(np.abs(truthv).max(), _TINY)
    res = list(np.abs(pred - truthv).ravel() / scale) + [fit.residual / scale]

    fit_rmse = float(np.sqrt(np.mean((pred - truthv) ** 2)))
    const = np.mean([y for _, y in train], axis=0)
    base_rmse = float(np.sqrt(np.mean((truthv - const[None, :]) ** 2)))
    if not fit_rmse < base_rmse:
        res.append(np.inf)
    return np.asarray(res), {
        "fit_rmse": fit_rmse,
        "baseline_rmse": base_rmse,
        "rank": int(fit.rank),
        "rank_deficient": bool(fit.rank_deficient),
    }


#: suites that audit a sampled ray field and so accept one from a file
FIELD_SUITES = frozenset(
    {
        "conv-r2r",
        "conv-r2p",
        "attention-weights",
        "attention-equivariance",
        "render-pixvar",
        "sdf-pipeline",
        "fit",
    }
)

#: name -> (function, default trials, tolerance)
SUITES = {
    "kernels": (suite_kernels, 10000, 1e-10),
    "group": (suite_group, 1000, 1e-10),
    "conv-r2r": (suite_conv_r2r, 100, 1e-8),
    "conv-r2p": (suite_conv_r2p, 100, 1e-8),
    "attention-weights": (suite_attention_weights, 100, 1e-10),
    "attention-equivariance": (suite_attention_equivariance, 100, 1e-7),
    "spherical": (suite_spherical, 20, 1e-10),
    "fourier": (suite_fourier, 50, 1e-8),
    "fourier-roundtrip": (suite_fourier_roundtrip, 50, 1e-10),
    "render-pixvar": (suite_render_pixvar, 6, 1e-5),
    "sdf-pipeline": (suite_sdf, 50, 1e-6),
    "fit": (suite_fit, 60, 1e-8),
}


def available_suites() -> list:
    return sorted(SUITES)


def run_suite(
    name: str,
    seed: int = 0,
    trials: int | None = None,
    tolerance: float | None = None,
    **kwargs,
):
    """Run one named suite; returns ``(report, residuals, extras)``."""
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {available_suites()}")
    fn, default_trials, default_tol = SUITES[name]
    trials = default_trials if trials is None else int(trials)
    tolerance = default_tol if tolerance is None else float(tolerance)
    t0 = time.perf_counter()
    residuals, extras = fn(seed, trials, **kwargs)
    wall_ms = (time.perf_counter() - t0) * 1000.0
    residuals = np.asarray(residuals, dtype=float)
    max_r = float(residuals.max()) if residuals.size else 0.0
    mean_r = float(residuals.mean()) if residuals.size else 0.0
    report = AuditReport(
        suite=name,
        trials=trials,
        seed=seed,
        tolerance=tolerance,
        max_residual=max_r,
        mean_residual=mean_r,
        passed=bool(max_r <= tolerance),
        wall_ms=wall_ms,
    )
    return report, residuals, extras
