import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rayfield import (
    AnchoredSamples,
    AttentionHeadSpec,
    EmptyNeighborhoodError,
    EquivariantLinear,
    Feature,
    FieldType,
    KernelBank,
    KernelEntry,
    KernelSupport,
    RadialProfile,
    SampledRayField,
    SchurError,
    act_on_anchored_samples,
    act_on_ray_field,
    apply_motion,
    cross_attention_ray_to_point,
    cross_attention_ray_to_ray_regular,
    gated_nonlinearity,
    point_at,
    self_attention_along_ray,
    signed_bumps,
    transport_point_feature,
)
from rayfield.attention import build_key_value
from conftest import make_motion, make_ray


def scalar_field(rng, n=96, channels=2):
    rays = np.stack([make_ray(rng).as_array() for _ in range(n)])
    values = rng.normal(size=(n, channels)).astype(complex)
    return SampledRayField(rays, values, FieldType.scalar())


def point_attention_bank(rng, d0=0.6):
    types = (FieldType.point(0), FieldType.point(1))
    entries = tuple(
        KernelEntry(
            FieldType.scalar(),
            t,
            RadialProfile.bumps(d0, value_dim=t.rep_dim, rng=rng, complex_coeffs=False),
            role=role,
        )
        for role in ("key", "value")
        for t in types
    )
    return types, KernelBank(entries, KernelSupport(d0, np.pi))


def test_head_spec_validation():
    with pytest.raises(ValueError):
        AttentionHeadSpec((FieldType.point(0),), (FieldType.point(0),), channels=3, heads=2)
    spec = AttentionHeadSpec(
        (FieldType.point(0), FieldType.point(1)), (FieldType.point(0),), channels=4, heads=2
    )
    assert spec.resolved_temperature() == pytest.approx(np.sqrt((1 + 3) * 4 / 2))
    fixed = AttentionHeadSpec((FieldType.point(0),), (FieldType.point(0),), 2, temperature=0.5)
    assert fixed.resolved_temperature() == 0.5


def test_equivariant_linear_schur_restriction(rng):
    t0, t1 = FieldType.ray(0, 0.0), FieldType.ray(1, 0.0)
    with pytest.raises(SchurError):
        EquivariantLinear.for_pair(t0, t1, np.eye(2))
    lin = EquivariantLinear.for_pair(t0, t0, 2.0 * np.eye(2))
    f = Feature(t0, rng.normal(size=(2, 1)).astype(complex))
    assert np.allclose(lin(f).values, 2.0 * f.values)
    with pytest.raises(SchurError):
        lin(Feature(t1, f.values))


def test_equivariant_linear_on_anchored_channels(rng):
    a = AnchoredSamples.along(
        make_ray(rng),
        np.linspace(0.0, 1.0, 4),
        (0, 1, 0, 1),
        values=rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)),
    )
    lin = EquivariantLinear({0: 3.0 * np.eye(2), 1: np.array([[0.0, 1.0], [1.0, 0.0]])})
    out = lin.apply_anchored(a)
    assert np.allclose(out.values[:, [0, 2]], 3.0 * a.values[:, [0, 2]])
    assert np.allclose(out.values[:, 1], a.values[:, 3])
    assert np.allclose(out.values[:, 3], a.values[:, 1])
    with pytest.raises(SchurError):
        EquivariantLinear({0: np.eye(2)}).apply_anchored(a)


def test_signed_bumps_layout():
    p = signed_bumps(1.8, n=5, rng=np.random.default_rng(4))
    assert np.allclose(p.centers, np.linspace(-1.8, 1.8, 5))
    assert p.sigma == pytest.approx(2 * 1.8 / 5)
    q = signed_bumps(1.8, n=5, rng=np.random.default_rng(4))
    assert np.array_equal(p.coeffs, q.coeffs)


def test_build_key_value_shapes(rng):
    _, bank = point_attention_bank(rng)
    y = make_ray(rng)
    keys, values = build_key_value(bank, np.zeros(3), y, np.array([1.0, 2.0]))
    assert len(keys) == 2 and len(values) == 2
    for f in keys + values:
        assert f.values.shape == (2, f.ftype.rep_dim)


def test_point_attention_weights_and_invariance(rng):
    field = scalar_field(rng)
    types, bank = point_attention_bank(rng)
    spec = AttentionHeadSpec(types, types, channels=2, heads=2)
    site = np.zeros(3)
    q = [Feature(t, rng.normal(size=(2, t.rep_dim))) for t in types]
    res = cross_attention_ray_to_point(field, bank, spec, site, q)
    assert res.weights.shape == (2, len(res.indices))
    assert np.allclose(res.weights.sum(axis=1), 1.0)
    g = make_motion(rng)
    moved = cross_attention_ray_to_point(
        act_on_ray_field(g, field),
        bank,
        spec,
        g.R @ site + g.t,
        [transport_point_feature(g, f) for f in q],
    )
    assert np.array_equal(moved.indices, res.indices)
    assert np.abs(moved.weights - res.weights).max() < 1e-12
    for a, b in zip(moved.features, res.features):
        assert np.abs(a.values - transport_point_feature(g, b).values).max() < 1e-9


def test_point_attention_errors(rng):
    field = scalar_field(rng)
    types, bank = point_attention_bank(rng, d0=1e-9)
    spec = AttentionHeadSpec(types, types, channels=2)
    q = [Feature(t, np.zeros((2, t.rep_dim))) for t in types]
    with pytest.raises(EmptyNeighborhoodError) as err:
        cross_attention_ray_to_point(field, bank, spec, np.array([90.0, 0.0, 0.0]), q)
    assert err.value.code == "empty-neighborhood"
    types2, bank2 = point_attention_bank(rng)
    with pytest.raises(ValueError, match="channel"):
        cross_attention_ray_to_point(
            field, bank2, AttentionHeadSpec(types2, types2, channels=3), np.zeros(3), q
        )
    with pytest.raises(ValueError, match="missing key type"):
        cross_attention_ray_to_point(field, bank2, spec, np.zeros(3), q[:1])


def regular_attention_setup(rng):
    field = scalar_field(rng, n=160, channels=2)
    t_reg = FieldType.regular(0, 10, 0.4, 2.4)
    t_reg1 = FieldType.regular(1, 10, 0.4, 2.4)
    profile_k = RadialProfile.bumps(0.5, beta0=np.pi, rng=rng)
    profile_v = RadialProfile.bumps(0.5, beta0=np.pi, rng=rng)
    entries = tuple(
        KernelEntry(FieldType.scalar(), t, p, role=role)
        for t, in ((t_reg,), (t_reg1,))
        for role, p in (("key", profile_k), ("value", profile_v))
    )
    bank = KernelBank(entries, KernelSupport(0.5, np.pi))
    spec = AttentionHeadSpec((t_reg, t_reg1), (t_reg, t_reg1), channels=2)
    query = make_ray(rng, box=0.2)
    params = 0.4 + 2.0 * np.arange(10) / 10
    prior = AnchoredSamples.along(
        query,
        params,
        (0, 0, 1, 1),
        values=rng.normal(size=(10, 4)) + 1j * rng.normal(size=(10, 4)),
    )
    return field, bank, spec, query, prior


def test_regular_attention_prior_and_bins(rng):
    field, bank, spec, query, prior = regular_attention_setup(rng)
    res = cross_attention_ray_to_ray_regular(field, bank, spec, query, prior)
    assert res.weights.shape == (len(res.indices), spec.heads)
    assert res.bins.shape == (len(res.indices),)
    touched = np.zeros(prior.n_anchors, dtype=bool)
    touched[res.bins] = True
    # untouched anchors carry the prior through unchanged
    assert np.array_equal(res.samples.values[~touched], prior.values[~touched])
    if touched.any():
        assert not np.allclose(res.samples.values[touched], prior.values[touched])
    # contributors to one anchor share a softmax: weights sum to one per bin
    for j in np.unique(res.bins):
        assert np.allclose(res.weights[res.bins == j].sum(axis=0), 1.0)


def test_regular_attention_aux_rows(rng):
    field, bank, spec, query, prior = regular_attention_setup(rng)
    aux = rng.normal(size=(field.n_rays, 3))
    res = cross_attention_ray_to_ray_regular(field, bank, spec, query, prior, aux=aux)
    assert res.aux.shape == (prior.n_anchors, 3)
    # each touched anchor's aux row is the weight-averaged contributor aux
    for j in np.unique(res.bins):
        rows = res.bins == j
        expect = (res.weights[rows].mean(axis=1)[:, None] * aux[res.indices[rows]]).sum(axis=0)
        assert np.allclose(res.aux[j], expect)
    untouched = np.setdiff1d(np.arange(prior.n_anchors), res.bins)
    assert np.allclose(res.aux[untouched], 0.0)


def test_regular_attention_prior_layout_is_checked(rng):
    field, bank, spec, query, prior = regular_attention_setup(rng)
    bad = AnchoredSamples(prior.ray, prior.anchors, prior.values, (0, 1, 0, 1))
    with pytest.raises(ValueError, match="layout"):
        cross_attention_ray_to_ray_regular(field, bank, spec, query, bad)


def test_self_attention_rows_and_equivariance(rng):
    a = AnchoredSamples.along(
        make_ray(rng),
        np.linspace(0.2, 2.2, 9),
        (0, 1, 1, 2),
        values=rng.normal(size=(9, 4)) + 1j * rng.normal(size=(9, 4)),
    )
    c_k = signed_bumps(1.5, rng=rng)
    c_v = signed_bumps(1.5, rng=rng)
    c_q = 0.7 - 0.2j
    res = self_attention_along_ray(a, c_k, c_v, c_q)
    assert res.weights.shape == (9, 9)
    assert np.allclose(res.weights.sum(axis=1), 1.0)
    g = make_motion(rng)
    moved = self_attention_along_ray(act_on_anchored_samples(g, a), c_k, c_v, c_q)
    assert np.abs(moved.weights - res.weights).max() < 1e-12
    expect = act_on_anchored_samples(g, res.samples)
    assert np.abs(moved.samples.values - expect.values).max() < 1e-12


def test_gated_nonlinearity_trivial_is_tanh(rng):
    f = Feature(FieldType.scalar(), rng.normal(size=(3, 1)).astype(complex))
    out = gated_nonlinearity(f, 1.0, 0.0)
    assert np.allclose(out.values, np.tanh(f.values))


@given(theta=st.floats(-np.pi, np.pi), seed=st.integers(0, 2**31 - 1))
@settings(max_examples=50, deadline=None)
def test_gated_nonlinearity_commutes_with_phases(theta, seed):
    rng = np.random.default_rng(seed)
    f = Feature(
        FieldType.ray(1, 0.5), rng.normal(size=(3, 1)) + 1j * rng.normal(size=(3, 1))
    )
    a, b = rng.normal(size=3), rng.normal(size=3)
    phase = np.exp(1j * theta)
    lhs = gated_nonlinearity(Feature(f.ftype, phase * f.values), a, b).values
    rhs = phase * gated_nonlinearity(f, a, b).values
    assert np.abs(lhs - rhs).max() < 1e-12


def test_gated_nonlinearity_scalar_broadcast_and_anchored(rng):
    a = AnchoredSamples.along(
        make_ray(rng),
        np.linspace(0.0, 1.0, 3),
        (0, 1),
        values=rng.normal(size=(3, 2)) + 1j * rng.normal(size=(3, 2)),
    )
    out = gated_nonlinearity(a, 1.0, 0.0)
    assert np.allclose(out.values[:, 0], np.tanh(a.values[:, 0]))
    mag = np.abs(a.values[:, 1])
    gate = 1.0 / (1.0 + np.exp(-mag))
    assert np.allclose(out.values[:, 1], gate * a.values[:, 1])
