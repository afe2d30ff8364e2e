"""Acceptance gate: every headline guarantee of the package, at full scale.

Each test runs one property at its published trial count and tolerance and
prints a single PASS/FAIL line (visible with ``pytest -s`` and in failure
output).  Bounds on wall time are asserted where the guarantee carries one.
"""

import numpy as np

from rayfield import run_suite


def emit(name: str, ok: bool, detail: str) -> None:
    print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")


def one(suite: str, trials: int, **kwargs):
    report, residuals, extras = run_suite(suite, seed=0, trials=trials, **kwargs)
    return report, extras


def test_kernel_constraints_hold_at_scale():
    # every kernel family, 10^4 random (h, x) each, max residual <= 1e-10,
    # inside 10 s
    report, _ = one("kernels", 10_000)
    ok = report.passed and report.wall_ms < 10_000
    emit(
        "kernel constraints",
        ok,
        f"max={report.max_residual:.3e} tol={report.tolerance:.0e} "
        f"wall={report.wall_ms / 1000:.2f}s",
    )
    assert report.passed
    assert report.wall_ms < 10_000


def test_convolution_equivariance_100_motions():
    # both convolution ops, 100 random rigid motions on 512-ray fields,
    # relative residual <= 1e-8, inside 60 s combined
    r2r, _ = one("conv-r2r", 100)
    r2p, _ = one("conv-r2p", 100)
    wall = (r2r.wall_ms + r2p.wall_ms) / 1000
    ok = r2r.passed and r2p.passed and wall < 60
    emit(
        "convolution equivariance",
        ok,
        f"ray->ray max={r2r.max_residual:.3e} ray->point max={r2p.max_residual:.3e} "
        f"tol={r2r.tolerance:.0e} wall={wall:.2f}s",
    )
    assert r2r.passed and r2p.passed
    assert wall < 60


def test_attention_weight_invariance_and_output_equivariance():
    # all three attention ops, 100 random motions: weights invariant to
    # 1e-10, outputs equivariant to 1e-7
    w, _ = one("attention-weights", 100)
    o, _ = one("attention-equivariance", 100)
    ok = w.passed and o.passed
    emit(
        "attention equivariance",
        ok,
        f"weights max={w.max_residual:.3e} (tol {w.tolerance:.0e}) "
        f"outputs max={o.max_residual:.3e} (tol {o.tolerance:.0e})",
    )
    assert w.passed
    assert o.passed


def test_intra_view_convolution_is_spherical():
    # 20 random kernels and single-view fields; the two forms agree to 1e-10
    report, _ = one("spherical", 20)
    emit(
        "spherical equivalence",
        report.passed,
        f"max={report.max_residual:.3e} tol={report.tolerance:.0e}",
    )
    assert report.passed


def test_regular_conv_matches_irrep_conv_in_fourier():
    # DFT of the depth-binned convolution equals the per-frequency irrep
    # convolutions to 1e-8; the sample<->coefficient round trip holds to 1e-10
    dft, _ = one("fourier", 50)
    rt, _ = one("fourier-roundtrip", 50)
    ok = dft.passed and rt.passed
    emit(
        "Fourier consistency",
        ok,
        f"conv max={dft.max_residual:.3e} (tol {dft.tolerance:.0e}) "
        f"roundtrip max={rt.max_residual:.3e} (tol {rt.tolerance:.0e})",
    )
    assert dft.passed
    assert rt.passed


def test_rendered_pixels_do_not_move_with_the_frame():
    # a 16x16 view rendered under 6 global rotations of cameras + field:
    # per-pixel variance <= 1e-5, inside 5 min
    report, _ = one("render-pixvar", 6)
    ok = report.passed and report.wall_ms < 300_000
    emit(
        "pixel variance under rotations",
        ok,
        f"max={report.max_residual:.3e} tol={report.tolerance:.0e} "
        f"wall={report.wall_ms / 1000:.2f}s",
    )
    assert report.passed
    assert report.wall_ms < 300_000


def test_sdf_pipeline_is_invariant():
    # seeded random weights, 50 motions x 100 points:
    # Phi(g.V)(g.p) = Phi(V)(p) within 1e-6
    report, _ = one("sdf-pipeline", 50, n_points=100)
    emit(
        "sdf invariance",
        report.passed,
        f"max={report.max_residual:.3e} tol={report.tolerance:.0e}",
    )
    assert report.passed


def test_least_squares_fit_recovers_and_beats_baseline():
    # generate-and-recover residual <= 1e-8 and a strict RMSE win over the
    # constant-mean baseline on held-out points
    report, extras = one("fit", 60)
    strict = extras["fit_rmse"] < extras["baseline_rmse"]
    ok = report.passed and strict and not extras["rank_deficient"]
    emit(
        "least-squares expressiveness",
        ok,
        f"recover max={report.max_residual:.3e} (tol {report.tolerance:.0e}) "
        f"fit_rmse={extras['fit_rmse']:.3e} < baseline={extras['baseline_rmse']:.3e}",
    )
    assert report.passed
    assert strict
    assert not extras["rank_deficient"]


def test_group_and_bundle_identities():
    # associativity, both cocycle identities, p o s = id, stabilizer
    # closure: each <= 1e-10 over 10^3 draws
    report, _ = one("group", 1_000)
    emit(
        "group identities",
        report.passed,
        f"max={report.max_residual:.3e} tol={report.tolerance:.0e}",
    )
    assert report.passed
