import json

import numpy as np
import pytest

from rayfield import (
    ORIGIN_RAY,
    BankFormatError,
    FieldType,
    Kappa1Kernel,
    Kappa2IrrepKernel,
    Kappa2RegularKernel,
    KernelBank,
    KernelEntry,
    KernelSupport,
    MissingKernelError,
    RadialProfile,
    Ray,
    RayToPointKernel,
    RayToRayKernel,
    StabilizerElement,
    apply_motion,
    constraint_residuals,
    height_g,
    kappa1,
    kappa2_irrep,
    kappa2_regular,
    kappa_ray_to_point,
    ray_through,
    read_kernel_bank,
    verify_kernel_constraint,
    write_kernel_bank,
)
from rayfield.kernels import bank_from_dict, bank_to_dict
from conftest import make_ray

E_X = np.array([1.0, 0.0, 0.0])
E_Z = np.array([0.0, 0.0, 1.0])


@pytest.fixture
def profile(rng):
    return RadialProfile.bumps(2.0, rng=rng)


def test_height_worked_examples():
    assert height_g(ray_through(np.array([1.0, 0.0, 3.0]), E_X)) == pytest.approx(3.0)
    assert height_g(ray_through(np.array([1.0, 1.0, 2.0]), E_X)) == pytest.approx(2.0)


def test_height_shifts_under_the_stabilizer(rng):
    for _ in range(50):
        x = make_ray(rng)
        if abs(x.d[2]) > 0.95:
            continue
        h = StabilizerElement(rng.uniform(0, 2 * np.pi), rng.normal())
        moved = apply_motion(h.as_motion(), x)
        assert height_g(moved) == pytest.approx(h.tau + height_g(x), abs=1e-9)


def test_height_undefined_parallel_to_axis():
    with pytest.raises(ValueError):
        height_g(ray_through(np.array([1.0, 0.0, 0.0]), E_Z))


def test_kappa1_pole_branches(profile):
    at_zero = profile.scalar(0.0)
    # matching types degenerate to a constant on the base ray itself
    assert kappa1(1, 1, ORIGIN_RAY, profile) == pytest.approx(at_zero)
    assert kappa1(1, -1, ORIGIN_RAY.reversed(), profile) == pytest.approx(at_zero)
    # mismatched types vanish there
    assert kappa1(1, 2, ORIGIN_RAY, profile) == 0.0
    assert kappa1(1, 1, ORIGIN_RAY.reversed(), profile) == 0.0
    # off the axis but still parallel: a pure moment-azimuth phase
    x = Ray(E_Z, np.array([1.0, 0.5, 0.0]))
    v = kappa1(1, 2, x, profile)
    assert abs(v) == pytest.approx(abs(profile.scalar(np.linalg.norm(x.m))))


def test_kappa2_pole_branches(profile):
    assert kappa2_irrep(0.8, 0.8, ORIGIN_RAY, profile) == pytest.approx(
        profile.scalar(0.0)
    )
    assert kappa2_irrep(0.8, 0.5, ORIGIN_RAY, profile) == 0.0
    assert kappa2_irrep(0.8, -0.8, ORIGIN_RAY.reversed(), profile) == pytest.approx(
        profile.scalar(0.0)
    )
    w, t = kappa2_regular(0.7, Ray(E_Z, np.array([1.0, 0.5, 0.0])), profile)
    assert w == 0.0 and t == 0.0


def test_kappa2_regular_mass_sits_at_the_height(rng, profile):
    for _ in range(20):
        x = make_ray(rng)
        if abs(x.d[2]) > 0.95:
            continue
        w, t = kappa2_regular(0.7, x, profile)
        assert t == pytest.approx(height_g(x), abs=1e-12)
        expect = profile.scalar(
            abs(x.m[2]) / np.sqrt(1.0 - x.d[2] ** 2)
        ) * np.exp(1j * 0.7 * x.d[2] * t)
        assert w == pytest.approx(expect, abs=1e-12)


def test_ray_to_point_degrees_and_support(rng):
    prof1 = RadialProfile.bumps(1.0, value_dim=3, rng=rng, complex_coeffs=False)
    with pytest.raises(ValueError):
        kappa_ray_to_point(2, ORIGIN_RAY, prof1)
    # through the reference point the degree-1 value aligns with the direction
    d = rng.normal(size=3)
    d /= np.linalg.norm(d)
    v = kappa_ray_to_point(1, Ray(d, np.zeros(3)), prof1)
    assert v.shape == (3,)
    assert np.linalg.norm(np.cross(v, d)) < 1e-12
    # zero outside the declared support radius
    far = ray_through(np.array([5.0, 0.0, 0.0]), E_Z)
    assert np.array_equal(kappa_ray_to_point(1, far, prof1, d0=1.0), np.zeros(3))
    prof0 = RadialProfile.bumps(1.0, rng=rng, complex_coeffs=False)
    assert kappa_ray_to_point(0, far, prof0, d0=1.0).shape == (1,)


@pytest.mark.parametrize(
    "family",
    [
        lambda p: Kappa1Kernel(1, 2, p),
        lambda p: Kappa1Kernel(0, -1, p),
        lambda p: Kappa2IrrepKernel(0.8, -1.4, p),
        lambda p: Kappa2RegularKernel(0.6, p),
    ],
)
def test_constraint_holds_per_family(family, rng):
    prof = RadialProfile.bumps(1.2, beta0=np.pi, rng=rng)
    assert verify_kernel_constraint(family(prof), 500, seed=5) < 1e-10


def test_constraint_holds_ray_to_point(rng):
    for l in (0, 1):
        prof = RadialProfile.bumps(
            1.0, value_dim=2 * l + 1, rng=rng, complex_coeffs=False
        )
        assert verify_kernel_constraint(RayToPointKernel(l, prof), 500, seed=5) < 1e-10


def test_constraint_holds_ray_to_ray(rng):
    prof = RadialProfile.bumps(1.2, beta0=np.pi, rng=rng)
    k = RayToRayKernel(FieldType.ray(1, 0.5), FieldType.ray(-1, -0.7), prof)
    assert verify_kernel_constraint(k, 500, seed=5) < 1e-10


def test_constraint_residuals_are_deterministic(rng):
    k = Kappa1Kernel(1, 2, RadialProfile.bumps(1.2, rng=rng))
    a = constraint_residuals(k, 200, seed=11)
    b = constraint_residuals(k, 200, seed=11)
    assert np.array_equal(a, b)
    assert a.shape == (200,)


def test_scalar_and_batch_evaluations_agree(rng, profile):
    rays = [make_ray(rng) for _ in range(10)]
    D = np.stack([x.d for x in rays])
    M = np.stack([x.m for x in rays])
    k1 = Kappa1Kernel(1, 2, profile)
    k2 = Kappa2IrrepKernel(0.8, -1.4, profile)
    assert np.allclose([k1(x) for x in rays], k1.batch(D, M))
    assert np.allclose([k2(x) for x in rays], k2.batch(D, M))


def test_radial_profile_validation():
    with pytest.raises(ValueError):
        RadialProfile(np.linspace(0, 1, 4), 0.25, np.ones(3))
    with pytest.raises(ValueError):
        RadialProfile(np.linspace(0, 1, 4), 0.25, np.ones((1, 4, 2)), np.array([0.0, 1.0]))
    angular = RadialProfile.bumps(1.0, beta0=np.pi)
    with pytest.raises(ValueError):
        angular(0.5)
    vec = RadialProfile.bumps(1.0, value_dim=3)
    with pytest.raises(ValueError):
        vec.scalar(0.5)
    assert vec.vector(0.5).shape == (3,)
    assert RadialProfile.bumps(1.0).basis(np.linspace(0, 1, 5)).shape == (5, 8)


def test_bumps_layout_and_determinism():
    a = RadialProfile.bumps(2.0, rng=np.random.default_rng(9))
    b = RadialProfile.bumps(2.0, rng=np.random.default_rng(9))
    assert np.array_equal(a.coeffs, b.coeffs)
    assert np.allclose(a.centers, np.linspace(0.0, 2.0, 8))
    assert a.sigma == pytest.approx(2.0 / 8)
    ang = RadialProfile.bumps(2.0, beta0=np.pi, n_angular=4)
    assert ang.coeffs.shape == (1, 8, 4)
    assert np.allclose(ang.ang_centers, np.linspace(0.0, np.pi, 4))


def make_bank(rng):
    entries = (
        KernelEntry(
            FieldType.scalar(),
            FieldType.ray(1, 0.5),
            RadialProfile.bumps(0.4, beta0=np.pi, rng=rng),
        ),
        KernelEntry(
            FieldType.scalar(),
            FieldType.point(1),
            RadialProfile.bumps(0.4, value_dim=3, rng=rng, complex_coeffs=False),
            role="key",
        ),
    )
    return KernelBank(entries, KernelSupport(0.4, np.pi))


def test_bank_lookup_by_type_and_role(rng):
    bank = make_bank(rng)
    assert bank.profile_for(FieldType.scalar(), FieldType.ray(1, 0.5)) is bank.entries[0].profile
    with pytest.raises(MissingKernelError):
        bank.profile_for(FieldType.scalar(), FieldType.ray(9, 0.0))
    with pytest.raises(MissingKernelError):
        bank.profile_for(FieldType.scalar(), FieldType.point(1))  # wrong role
    assert bank.profile_for(FieldType.scalar(), FieldType.point(1), role="key")
    doubled = KernelBank(bank.entries + (bank.entries[0],), bank.support)
    with pytest.raises(MissingKernelError):
        doubled.profile_for(FieldType.scalar(), FieldType.ray(1, 0.5))


def test_bank_round_trips_through_json(rng, tmp_path):
    bank = make_bank(rng)
    doc = bank_to_dict(bank)
    back = bank_from_dict(json.loads(json.dumps(doc)))
    assert back.support == bank.support
    assert len(back.entries) == len(bank.entries)
    for e0, e1 in zip(bank.entries, back.entries):
        assert e0.type_in == e1.type_in and e0.type_out == e1.type_out
        assert e0.role == e1.role
        assert np.array_equal(e0.profile.coeffs, e1.profile.coeffs)
        assert np.array_equal(e0.profile.centers, e1.profile.centers)
    path = tmp_path / "bank.json"
    write_kernel_bank(bank, path)
    again = read_kernel_bank(path)
    assert bank_to_dict(again) == doc


def test_bank_format_errors_name_the_missing_key(rng):
    doc = bank_to_dict(make_bank(rng))
    del doc["entries"][0]["sigma"]
    with pytest.raises(BankFormatError, match="entry 0.*sigma"):
        bank_from_dict(doc)
    doc = bank_to_dict(make_bank(rng))
    del doc["support"]["d0"]
    with pytest.raises(BankFormatError, match="support.*d0"):
        bank_from_dict(doc)
    doc = bank_to_dict(make_bank(rng))
    doc["entries"][1]["type_in"]["kind"] = "mystery"
    with pytest.raises(BankFormatError, match="mystery"):
        bank_from_dict(doc)
