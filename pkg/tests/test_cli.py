import json

import numpy as np
import pytest

from rayfield.cli import main, write_ppm


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


@pytest.fixture(scope="module")
def capture(tmp_path_factory):
    path = tmp_path_factory.mktemp("capture") / "sample.json"
    code = main(["gen", "--cams", "4", "--res", "8", "--seed", "7", "--out", str(path)])
    assert code == 0
    return path


def test_gen_reports_counts(tmp_path, capsys):
    out = tmp_path / "s.json"
    code, stdout, _ = run(
        capsys, "gen", "--cams", "2", "--res", "4", "--seed", "3", "--out", str(out)
    )
    assert code == 0
    doc = json.loads(stdout)
    assert doc["cameras"] == 2 and doc["rays"] == 2 * 16
    assert out.exists()


def test_gen_rejects_bad_camera_count(tmp_path, capsys):
    code, _, err = run(
        capsys, "gen", "--cams", "9", "--res", "4", "--out", str(tmp_path / "s.json")
    )
    assert code == 2
    assert "error:" in err and "1..8" in err


def test_audit_group_suite_passes(capsys):
    code, stdout, _ = run(capsys, "audit", "--suite", "group", "--trials", "50")
    assert code == 0
    doc = json.loads(stdout)
    assert doc["suite"] == "group" and doc["pass"] is True
    assert doc["trials"] == 50
    assert doc["max_residual"] <= doc["tolerance"]


def test_audit_with_capture_and_artifacts(capture, tmp_path, capsys):
    out = tmp_path / "report.json"
    code, stdout, _ = run(
        capsys,
        "audit", "--suite", "conv-r2p", "--input", str(capture),
        "--trials", "5", "--seed", "7", "--out", str(out),
    )
    assert code == 0
    doc = json.loads(stdout)
    assert doc["pass"] is True
    assert json.loads(out.read_text()) == doc
    csv = out.with_suffix(".csv").read_text().splitlines()
    assert csv[0] == "index,residual"
    # one row per residual; each trial contributes at least one
    assert len(csv) - 1 >= doc["trials"]
    for line in csv[1:]:
        i, r = line.split(",")
        float(r)  # plain parseable floats, no array reprs
    assert out.with_suffix(".png").stat().st_size > 0


def test_audit_reports_are_stable_apart_from_timing(capsys):
    code1, out1, _ = run(capsys, "audit", "--suite", "group", "--trials", "40")
    code2, out2, _ = run(capsys, "audit", "--suite", "group", "--trials", "40")
    assert code1 == code2 == 0
    d1, d2 = json.loads(out1), json.loads(out2)
    d1.pop("wall_ms"), d2.pop("wall_ms")
    assert d1 == d2


def test_audit_input_only_for_field_suites(capture, capsys):
    code, _, err = run(
        capsys, "audit", "--suite", "group", "--input", str(capture)
    )
    assert code == 2
    assert "no --input" in err


def test_audit_rotations_only_for_pixvar(capsys):
    code, _, err = run(capsys, "audit", "--suite", "group", "--rotations", "3")
    assert code == 2
    assert "render-pixvar" in err


def test_audit_unknown_suite_is_an_argparse_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["audit", "--suite", "no-such-suite"])
    assert exc.value.code == 2


def test_audit_missing_input_file(capsys):
    code, _, err = run(
        capsys, "audit", "--suite", "conv-r2p", "--input", "/no/such/file.json"
    )
    assert code == 2 and "error:" in err


def test_kernel_check_passes(capsys):
    code, stdout, _ = run(
        capsys, "kernel-check", "--kernel", "ray2point", "--samples", "300"
    )
    assert code == 0
    doc = json.loads(stdout)
    assert doc["suite"] == "kernel-ray2point"
    assert doc["trials"] == 300
    assert doc["max_residual"] <= 1e-10


def test_kernel_check_fails_on_impossible_tolerance(capsys):
    code, stdout, _ = run(
        capsys,
        "kernel-check", "--kernel", "kappa1", "--samples", "100", "--tolerance", "0",
    )
    assert code == 1
    assert json.loads(stdout)["pass"] is False


def test_render_writes_ppm_and_figure(capture, tmp_path, capsys):
    out = tmp_path / "view.ppm"
    code, stdout, _ = run(
        capsys,
        "render", "--input", str(capture), "--camera", "1", "--out", str(out),
    )
    assert code == 0
    doc = json.loads(stdout)
    assert doc["width"] == 8 and doc["height"] == 8
    raw = out.read_bytes()
    assert raw.startswith(b"P6\n8 8\n255\n")
    assert len(raw) == len(b"P6\n8 8\n255\n") + 8 * 8 * 3
    assert out.with_suffix(".png").stat().st_size > 0


def test_render_rejects_bad_camera_index(capture, tmp_path, capsys):
    code, _, err = run(
        capsys,
        "render", "--input", str(capture), "--camera", "11",
        "--out", str(tmp_path / "v.ppm"),
    )
    assert code == 2 and "--camera" in err


def test_write_ppm_validates_shape(tmp_path):
    with pytest.raises(ValueError):
        write_ppm(tmp_path / "bad.ppm", np.zeros((4, 4)))
    write_ppm(tmp_path / "ok.ppm", np.full((2, 3, 3), 2.0))
    raw = (tmp_path / "ok.ppm").read_bytes()
    assert raw.startswith(b"P6\n3 2\n255\n")
    assert set(raw[len(b"P6\n3 2\n255\n"):]) == {255}  # clipped to white


def test_sdf_slice_csv_and_heatmap(capture, tmp_path, capsys):
    out = tmp_path / "slice.csv"
    code, stdout, _ = run(
        capsys,
        "sdf", "--input", str(capture), "--grid", "5", "--extent", "0.3",
        "--out", str(out),
    )
    assert code == 0
    doc = json.loads(stdout)
    assert doc["evaluated"] + doc["skipped"] == 25
    lines = out.read_text().splitlines()
    assert lines[0] == "x,y,z,phi"
    assert len(lines) == 26
    x, y, z, phi = lines[1].split(",")
    assert float(z) == 0.0
    assert out.with_suffix(".png").stat().st_size > 0


def test_fit_command_emits_rmse_extras(capture, tmp_path, capsys):
    out = tmp_path / "fit.json"
    code, stdout, _ = run(
        capsys,
        "fit", "--input", str(capture), "--points", "24", "--seed", "1",
        "--out", str(out),
    )
    assert code == 0
    doc = json.loads(stdout)
    assert doc["pass"] is True
    assert doc["extras"]["fit_rmse"] < doc["extras"]["baseline_rmse"]
    assert out.with_suffix(".png").stat().st_size > 0


def test_threads_cap_is_enforced(capture, tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("RAYFIELD_THREADS", "not-a-number")
    code, _, err = run(
        capsys,
        "render", "--input", str(capture), "--out", str(tmp_path / "v.ppm"),
        "--workers", "2",
    )
    assert code == 2
    assert "RAYFIELD_THREADS" in err
    monkeypatch.setenv("RAYFIELD_THREADS", "1")
    code, stdout, _ = run(
        capsys,
        "render", "--input", str(capture), "--out", str(tmp_path / "v.ppm"),
        "--workers", "4",
    )
    assert code == 0
