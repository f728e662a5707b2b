"""Figure builders over solver output files (file in, image out)."""

import json
import warnings
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .io import read_manifest, read_snapshot  # noqa: E402


def plot_profile(snapshot_path, variable, out_path, reference_path=None,
                 zoom=None):
    """Line plot of one variable of a 1-D snapshot, with optional fine-run
    reference overlay and zoom inset."""
    snap = read_snapshot(snapshot_path)
    if snap.dim != 1:
        raise ValueError("profile plots need a 1-D snapshot")
    x = snap.variable("x")
    y = snap.variable(variable)

    fig, ax = plt.subplots(figsize=(7, 4.5))
    if reference_path:
        ref = read_snapshot(reference_path)
        ax.plot(ref.variable("x"), ref.variable(variable), "-", lw=0.8,
                color="0.4", label="reference")
    ax.plot(x, y, "o-", ms=2.0, lw=0.9, label=variable)
    ax.set_xlabel("x")
    ax.set_ylabel(variable)
    ax.set_title(f"{snap.meta['case']}  t = {snap.time:g}")
    ax.legend(loc="best", fontsize=8)

    if zoom is not None:
        x0, x1 = zoom
        inset = ax.inset_axes([0.55, 0.55, 0.42, 0.4])
        mask = (x >= x0) & (x <= x1)
        if reference_path:
            rx = ref.variable("x")
            rmask = (rx >= x0) & (rx <= x1)
            inset.plot(rx[rmask], ref.variable(variable)[rmask], "-",
                       lw=0.8, color="0.4")
        inset.plot(x[mask], y[mask], "o-", ms=2.0, lw=0.9)
        inset.set_xlim(x0, x1)
        ax.indicate_inset_zoom(inset, edgecolor="black")

    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return Path(out_path)


def plot_field2d(snapshot_path, variable, out_path, scale="linear",
                 contours=0, crop=None):
    """Pseudocolor map (optionally log-scaled and contoured) of a 2-D field."""
    snap = read_snapshot(snapshot_path)
    field = snap.grid_2d(variable)
    xs = snap.grid_2d("x")[:, 0]
    ys = snap.grid_2d("y")[0, :]

    if crop is not None:
        (x0, x1), (y0, y1) = crop
        keep_x = (xs >= x0) & (xs <= x1)
        keep_y = (ys >= y0) & (ys <= y1)
        xs, ys = xs[keep_x], ys[keep_y]
        field = field[np.ix_(keep_x, keep_y)]

    norm = None
    if scale == "log":
        positive = field[field > 0]
        if positive.size == 0:
            raise ValueError("log scale needs at least one positive value")
        floor = positive.min()
        if np.any(field <= 0):
            warnings.warn("non-positive values floored for the log scale")
            field = np.maximum(field, floor)
        vmax = field.max()
        if vmax <= floor:  # degenerate span of a uniform field
            vmax = floor * 10.0
        norm = matplotlib.colors.LogNorm(vmin=floor, vmax=vmax)

    fig, ax = plt.subplots(figsize=(6, 5))
    mesh = ax.pcolormesh(_edges(xs), _edges(ys), field.T, shading="flat",
                         norm=norm, cmap="viridis")
    if contours:
        ax.contour(xs, ys, field.T, levels=contours, colors="k",
                   linewidths=0.4)
    fig.colorbar(mesh, ax=ax, label=variable)
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_aspect("equal")
    ax.set_title(f"{snap.meta['case']}  {variable}  t = {snap.time:g}")
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return Path(out_path)


def _edges(centers):
    centers = np.asarray(centers)
    if centers.size == 1:
        return np.array([centers[0] - 0.5, centers[0] + 0.5])
    mid = 0.5 * (centers[1:] + centers[:-1])
    first = centers[0] - (mid[0] - centers[0])
    last = centers[-1] + (centers[-1] - mid[-1])
    return np.concatenate([[first], mid, [last]])


def plot_convergence(table_path, out_path):
    """Log-log error vs grid size from a convergence table JSON."""
    payload = json.loads(Path(table_path).read_text())
    fig, ax = plt.subplots(figsize=(5.5, 4.5))
    for degree, rows in sorted(payload["degrees"].items()):
        cells = [r["cells"] for r in rows]
        errs = [r["error"] for r in rows]
        ax.loglog(cells, errs, "o-", label=f"degree {degree}")
        slope = int(degree) + 1
        ref = errs[0] * (np.asarray(cells, dtype=float) / cells[0]) ** (-slope)
        ax.loglog(cells, ref, "--", lw=0.7, color="0.5")
    ax.set_xlabel("elements per direction")
    ax.set_ylabel(f"{payload.get('norm', 'l2')} error")
    ax.legend(fontsize=8)
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return Path(out_path)


def plot_alpha_stats(manifest_path, out_path):
    """Percentage of elements with an active blending coefficient vs time."""
    manifest = read_manifest(manifest_path)
    alpha = manifest["alpha"]
    fig, ax = plt.subplots(figsize=(5.5, 4))
    ax.plot(alpha["times"], alpha["active_percent"], lw=0.9)
    ax.set_xlabel("t")
    ax.set_ylabel("% of elements with active blending")
    ax.set_ylim(bottom=0)
    case = manifest.get("config", {}).get("case", "")
    ax.set_title(f"{case}  (max coefficient {alpha.get('max', 0):.3f})")
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return Path(out_path)
