"""Command-line interface over the sampled-capture toolkit.

Subcommands: ``gen`` (write a synthetic capture), ``audit`` (run a named
randomized suite), ``kernel-check`` (constraint residuals of one kernel
family), ``render`` (one camera view to a PPM image), ``sdf`` (a
signed-distance slice to CSV), and ``fit`` (least-squares profile recovery).

Exit codes: 0 on success, 1 when a checked tolerance is exceeded, 2 on usage
or input-format errors.  Reports are JSON objects on stdout and are
byte-stable for fixed arguments except for the ``wall_ms`` timing field; with
``--out`` the report is also written to disk together with a delimited
residual table and a rendered figure.  The ``RAYFIELD_THREADS`` environment
variable caps worker threads.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from .representations import FieldType, GridMismatchError
from .kernels import (
    BankFormatError,
    Kappa1Kernel,
    Kappa2IrrepKernel,
    Kappa2RegularKernel,
    MissingKernelError,
    RadialProfile,
    RayToPointKernel,
    RayToRayKernel,
    constraint_residuals,
)
from .attention import EmptyNeighborhoodError
from .lightfield import (
    SampleFormatError,
    make_camera_rig,
    random_scene,
    read_cameras,
    read_sample,
    sample_scene,
    write_sample,
)
from .pipelines import PipelineConfig, init_random, read_weights, render_view, sdf_forward
from .audits import FIELD_SUITES, SUITES, AuditReport, available_suites, run_suite

__all__ = ["main", "write_ppm"]


class _UsageError(Exception):
    """Bad arguments or inputs; reported on stderr with exit code 2."""


def _threads(requested: int) -> int:
    """Worker count after the RAYFIELD_THREADS cap."""
    cap = os.environ.get("RAYFIELD_THREADS")
    if cap is not None:
        try:
            cap = int(cap)
        except ValueError:
            raise _UsageError(f"RAYFIELD_THREADS must be an integer, got {cap!r}") from None
        return max(1, min(requested, cap))
    return max(1, requested)


def write_ppm(path, image) -> None:
    """Write an RGB image in binary PPM (P6, 8-bit) format."""
    image = np.clip(np.asarray(image, dtype=float), 0.0, 1.0)
    if image.ndim != 3 or image.shape[2] != 3:
        raise ValueError("image must have shape (height, width, 3)")
    h, w, _ = image.shape
    data = (image * 255.0 + 0.5).astype(np.uint8)
    with open(path, "wb") as fh:
        fh.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
        fh.write(data.tobytes())


def _write_residual_csv(path, residuals) -> None:
    with open(path, "w") as fh:
        fh.write("index,residual\n")
        for i, r in enumerate(np.asarray(residuals, dtype=float).ravel()):
            fh.write(f"{i},{float(r)!r}\n")


def _emit_report(report: AuditReport, extras: dict, residuals, out, figure: str) -> None:
    """Print the report JSON; with ``out``, also write it, the residual
    table, and the figure for this report kind next to each other."""
    doc = report.to_dict()
    if extras:
        doc["extras"] = extras
    text = json.dumps(doc, indent=2)
    print(text)
    if out is None:
        return
    out = Path(out)
    out.write_text(text + "\n")
    _write_residual_csv(out.with_suffix(".csv"), residuals)
    from . import _plots

    if figure == "rmse" and extras:
        _plots.rmse_bars(extras["fit_rmse"], extras["baseline_rmse"], out.with_suffix(".png"))
    else:
        _plots.residual_histogram(residuals, report, out.with_suffix(".png"))


def _load_weights(args):
    if getattr(args, "weights", None):
        return read_weights(args.weights)
    return init_random(PipelineConfig(), seed=args.seed)


# ---------------------------------------------------------------------------
# subcommands


def cmd_gen(args) -> int:
    rig = make_camera_rig(args.half, args.fov, args.res, args.res)
    if not 1 <= args.cams <= len(rig):
        raise _UsageError(f"--cams must be in 1..{len(rig)} (the rig has {len(rig)} cameras)")
    cams = rig[: args.cams]
    scene = random_scene(args.seed, n_spheres=args.spheres)
    field = sample_scene(scene, cams)
    write_sample(field, args.out, cams)
    print(
        json.dumps(
            {
                "out": str(args.out),
                "cameras": len(cams),
                "rays": field.n_rays,
                "resolution": args.res,
                "seed": args.seed,
            }
        )
    )
    return 0


def cmd_audit(args) -> int:
    kwargs = {}
    if args.input is not None:
        if args.suite not in FIELD_SUITES:
            raise _UsageError(
                f"suite {args.suite!r} runs on generated data and takes no --input "
                f"(suites accepting one: {sorted(FIELD_SUITES)})"
            )
        kwargs["field"] = read_sample(args.input)
    trials = args.trials
    if args.rotations is not None:
        if args.suite != "render-pixvar":
            raise _UsageError("--rotations only applies to the render-pixvar suite")
        trials = args.rotations
    if args.suite == "render-pixvar":
        kwargs["workers"] = _threads(args.workers)
    report, residuals, extras = run_suite(
        args.suite, seed=args.seed, trials=trials, tolerance=args.tolerance, **kwargs
    )
    _emit_report(report, extras, residuals, args.out, figure="hist")
    return 0 if report.passed else 1


_KERNEL_FAMILIES = {
    "kappa1": lambda rng: Kappa1Kernel(1, 2, RadialProfile.bumps(1.0, np.pi, rng=rng)),
    "kappa2-irrep": lambda rng: Kappa2IrrepKernel(0.8, -1.4, RadialProfile.bumps(1.0, rng=rng)),
    "kappa2-regular": lambda rng: Kappa2RegularKernel(0.6, RadialProfile.bumps(1.0, rng=rng)),
    "ray2point": lambda rng: RayToPointKernel(
        1, RadialProfile.bumps(1.0, value_dim=3, rng=rng, complex_coeffs=False)
    ),
    "ray2ray": lambda rng: RayToRayKernel(
        FieldType.ray(1, 0.5),
        FieldType.ray(-1, -0.7),
        RadialProfile.bumps(1.0, np.pi, rng=rng),
    ),
}


def cmd_kernel_check(args) -> int:
    kernel = _KERNEL_FAMILIES[args.kernel](np.random.default_rng(args.seed))
    t0 = time.perf_counter()
    residuals = constraint_residuals(kernel, args.samples, seed=args.seed)
    wall_ms = (time.perf_counter() - t0) * 1000.0
    max_r = float(residuals.max()) if residuals.size else 0.0
    report = AuditReport(
        suite=f"kernel-{args.kernel}",
        trials=args.samples,
        seed=args.seed,
        tolerance=args.tolerance,
        max_residual=max_r,
        mean_residual=float(residuals.mean()) if residuals.size else 0.0,
        passed=bool(max_r <= args.tolerance),
        wall_ms=wall_ms,
    )
    _emit_report(report, {}, residuals, args.out, figure="hist")
    return 0 if report.passed else 1


def cmd_render(args) -> int:
    field = read_sample(args.input)
    cams = read_cameras(args.input)
    if not cams:
        raise _UsageError(f"{args.input}: no cameras stored in the capture")
    if not 0 <= args.camera < len(cams):
        raise _UsageError(f"--camera must be in 0..{len(cams) - 1} for this capture")
    weights = _load_weights(args)
    workers = _threads(args.workers)
    t0 = time.perf_counter()
    image, empty = render_view(field, weights, cams[args.camera], workers=workers)
    wall_ms = (time.perf_counter() - t0) * 1000.0
    write_ppm(args.out, image)
    from . import _plots

    _plots.image_figure(
        image, Path(args.out).with_suffix(".png"), title=f"camera {args.camera}"
    )
    print(
        json.dumps(
            {
                "out": str(args.out),
                "camera": args.camera,
                "width": image.shape[1],
                "height": image.shape[0],
                "empty_rays": int(np.sum(empty)),
                "seed": args.seed,
                "wall_ms": wall_ms,
            }
        )
    )
    return 0


def cmd_sdf(args) -> int:
    field = read_sample(args.input)
    weights = _load_weights(args)
    xs = np.linspace(-args.extent, args.extent, args.grid)
    ys = np.linspace(-args.extent, args.extent, args.grid)
    X, Y = np.meshgrid(xs, ys)
    pts = np.stack([X.ravel(), Y.ravel(), np.full(X.size, args.plane_z)], axis=1)

    # evaluate only where some ray falls inside the point support
    D, M = field.rays[:, :3], field.rays[:, 3:]
    dist = np.linalg.norm(
        M[None, :, :] - np.cross(pts[:, None, :], D[None, :, :]), axis=2
    )
    supported = dist.min(axis=1) <= weights.config.d0_point
    t0 = time.perf_counter()
    phi = np.full(len(pts), np.nan)
    if supported.any():
        phi[supported] = sdf_forward(field, weights, pts[supported])
    wall_ms = (time.perf_counter() - t0) * 1000.0

    with open(args.out, "w") as fh:
        fh.write("x,y,z,phi\n")
        for p, v in zip(pts, phi):
            fh.write(f"{float(p[0])!r},{float(p[1])!r},{float(p[2])!r},{float(v)!r}\n")
    from . import _plots

    _plots.sdf_heatmap(
        xs, ys, phi.reshape(args.grid, args.grid), Path(args.out).with_suffix(".png"),
        plane_z=args.plane_z,
    )
    print(
        json.dumps(
            {
                "out": str(args.out),
                "grid": args.grid,
                "evaluated": int(supported.sum()),
                "skipped": int((~supported).sum()),
                "seed": args.seed,
                "wall_ms": wall_ms,
            }
        )
    )
    return 0


def cmd_fit(args) -> int:
    field = read_sample(args.input) if args.input else None
    report, residuals, extras = run_suite(
        "fit", seed=args.seed, trials=args.points, tolerance=args.tolerance, field=field
    )
    _emit_report(report, extras, residuals, args.out, figure="rmse")
    return 0 if report.passed else 1


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rayfield",
        description="Synthetic light-field captures and equivariance audits.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="write a synthetic multi-camera capture")
    p.add_argument("--cams", type=int, default=8, help="number of rig cameras (1..8)")
    p.add_argument("--res", type=int, default=16, help="pixels per side of each view")
    p.add_argument("--seed", type=int, default=0, help="scene seed")
    p.add_argument("--half", type=float, default=1.0, help="rig half-width")
    p.add_argument("--fov", type=float, default=0.9, help="field of view in radians")
    p.add_argument("--spheres", type=int, default=3, help="spheres in the scene")
    p.add_argument("--out", required=True, help="capture file to write")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("audit", help="run one randomized audit suite")
    p.add_argument("--suite", required=True, choices=available_suites())
    p.add_argument("--input", default=None, help="capture file to audit (field suites)")
    p.add_argument("--trials", type=int, default=None, help="override the suite default")
    p.add_argument(
        "--rotations", type=int, default=None, help="trial count of render-pixvar"
    )
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tolerance", type=float, default=None, help="override the suite default")
    p.add_argument("--workers", type=int, default=1, help="render threads (render-pixvar)")
    p.add_argument("--out", default=None, help="report path (adds .csv and .png siblings)")
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("kernel-check", help="constraint residuals of a kernel family")
    p.add_argument("--kernel", required=True, choices=sorted(_KERNEL_FAMILIES))
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tolerance", type=float, default=1e-10)
    p.add_argument("--out", default=None, help="report path (adds .csv and .png siblings)")
    p.set_defaults(func=cmd_kernel_check)

    p = sub.add_parser("render", help="render one stored camera view to a PPM image")
    p.add_argument("--input", required=True, help="capture file")
    p.add_argument("--camera", type=int, default=0, help="camera index in the capture")
    p.add_argument("--weights", default=None, help="weights file (default: seeded draw)")
    p.add_argument("--seed", type=int, default=0, help="weight seed when no file is given")
    p.add_argument("--workers", type=int, default=1, help="pixel threads")
    p.add_argument("--out", required=True, help="PPM image to write (adds a .png figure)")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("sdf", help="evaluate a signed-distance slice to CSV")
    p.add_argument("--input", required=True, help="capture file")
    p.add_argument("--weights", default=None, help="weights file (default: seeded draw)")
    p.add_argument("--seed", type=int, default=0, help="weight seed when no file is given")
    p.add_argument("--grid", type=int, default=17, help="points per side of the slice")
    p.add_argument("--extent", type=float, default=0.45, help="slice half-width")
    p.add_argument("--plane-z", type=float, default=0.0, help="height of the slice")
    p.add_argument("--out", required=True, help="CSV to write (adds a .png heatmap)")
    p.set_defaults(func=cmd_sdf)

    p = sub.add_parser("fit", help="least-squares profile recovery on a capture")
    p.add_argument("--input", default=None, help="capture file (default: generated)")
    p.add_argument("--points", type=int, default=None, help="training point count")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tolerance", type=float, default=None)
    p.add_argument("--out", default=None, help="report path (adds .csv and .png siblings)")
    p.set_defaults(func=cmd_fit)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (
        SampleFormatError,
        BankFormatError,
        MissingKernelError,
        GridMismatchError,
        EmptyNeighborhoodError,
        FileNotFoundError,
        IsADirectoryError,
        ValueError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
