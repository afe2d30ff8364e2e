import numpy as np
import pytest

from rayfield import (
    AuditReport,
    SUITES,
    available_suites,
    make_default_sample,
    run_suite,
)


def test_suite_registry_is_complete():
    names = available_suites()
    assert names == sorted(names)
    assert set(names) == {
        "kernels",
        "group",
        "conv-r2r",
        "conv-r2p",
        "attention-weights",
        "attention-equivariance",
        "spherical",
        "fourier",
        "fourier-roundtrip",
        "render-pixvar",
        "sdf-pipeline",
        "fit",
    }
    for name, (fn, trials, tol) in SUITES.items():
        assert trials > 0 and tol > 0


def test_unknown_suite_raises_key_error():
    with pytest.raises(KeyError, match="unknown suite"):
        run_suite("no-such-suite")


def test_report_pass_tracks_tolerance():
    report, residuals, extras = run_suite("group", seed=3, trials=25)
    assert report.passed == (report.max_residual <= report.tolerance)
    assert report.mean_residual <= report.max_residual
    assert report.trials == 25
    doc = report.to_dict()
    assert doc["pass"] is report.passed
    assert set(doc) == {
        "suite", "trials", "seed", "tolerance", "max_residual",
        "mean_residual", "pass", "wall_ms",
    }
    assert "\n" not in report.summary()
    assert "group" in report.summary()


def test_forced_failure_with_zero_tolerance():
    report, _, _ = run_suite("group", seed=3, trials=10, tolerance=0.0)
    assert not report.passed


def test_residuals_are_seed_deterministic():
    _, r1, _ = run_suite("conv-r2r", seed=9, trials=4)
    _, r2, _ = run_suite("conv-r2r", seed=9, trials=4)
    _, r3, _ = run_suite("conv-r2r", seed=10, trials=4)
    assert np.array_equal(r1, r2)
    assert not np.array_equal(r1, r3)


def test_default_sample_shape():
    field, cams, scene = make_default_sample(seed=7, res=4)
    assert field.n_rays == 8 * 16
    assert len(cams) == 8
    assert field.channels == 3
    assert len(scene.spheres) == 3
