"""Figure rendering for the command-line report paths.

Imported lazily by the CLI so library use never pays the matplotlib import;
the Agg backend is forced because every figure goes straight to a file.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = ["residual_histogram", "image_figure", "sdf_heatmap", "rmse_bars"]

_DPI = 120


def residual_histogram(residuals, report, path) -> None:
    """Log-scale residual histogram with the tolerance marked."""
    r = np.asarray(residuals, dtype=float).ravel()
    r = np.where(np.isfinite(r), r, np.nan)
    floor = 1e-18
    logs = np.log10(np.maximum(r[~np.isnan(r)], floor))
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    if logs.size:
        lo = min(logs.min(), np.log10(report.tolerance)) - 0.5
        hi = max(logs.max(), np.log10(report.tolerance)) + 0.5
        ax.hist(logs, bins=np.linspace(lo, hi, 41), color="#4878a8", edgecolor="white")
    ax.axvline(np.log10(report.tolerance), color="#c0392b", linestyle="--", label="tolerance")
    ax.set_xlabel("log10 residual")
    ax.set_ylabel("count")
    word = "pass" if report.passed else "FAIL"
    ax.set_title(f"{report.suite}: {word} (max {report.max_residual:.2e})")
    ax.legend(loc="upper right")
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def image_figure(image, path, title: str = "") -> None:
    """A rendered view, written as a figure with axes off."""
    image = np.clip(np.asarray(image, dtype=float), 0.0, 1.0)
    fig, ax = plt.subplots(figsize=(5.0, 5.0))
    ax.imshow(image, origin="upper", interpolation="nearest")
    ax.set_axis_off()
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def sdf_heatmap(xs, ys, phi, path, plane_z: float = 0.0) -> None:
    """Signed-distance slice as a symmetric diverging heatmap; unsupported
    grid points (NaN) are left blank."""
    phi = np.asarray(phi, dtype=float)
    masked = np.ma.masked_invalid(phi)
    span = float(np.abs(masked).max()) if masked.count() else 1.0
    span = span if span > 0 else 1.0
    fig, ax = plt.subplots(figsize=(5.5, 4.5))
    mesh = ax.pcolormesh(
        xs, ys, masked, shading="nearest", cmap="RdBu", vmin=-span, vmax=span
    )
    ax.set_aspect("equal")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_title(f"signed distance at z = {plane_z:g}")
    fig.colorbar(mesh, ax=ax)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def rmse_bars(fit_rmse: float, baseline_rmse: float, path) -> None:
    """Held-out RMSE of the fitted profile next to the constant-mean baseline."""
    fig, ax = plt.subplots(figsize=(4.5, 4.0))
    names = ["fitted profile", "constant mean"]
    vals = [max(fit_rmse, 1e-18), max(baseline_rmse, 1e-18)]
    ax.bar(names, vals, color=["#4878a8", "#b0b0b0"], edgecolor="white")
    ax.set_yscale("log")
    ax.set_ylabel("held-out RMSE")
    for i, v in enumerate(vals):
        ax.annotate(f"{v:.2e}", (i, v), ha="center", va="bottom")
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
