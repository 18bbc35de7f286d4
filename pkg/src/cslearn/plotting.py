"""Matplotlib figures written next to the CSV/JSON output of the CLI."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .formats import PALETTE  # noqa: E402

STYLE = {
    "font.size": 9,
    "axes.labelsize": 9,
    "axes.titlesize": 10,
    "legend.fontsize": 7,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "lines.linewidth": 1.2,
    "lines.markersize": 4,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "savefig.dpi": 150,
    "savefig.bbox": "tight",
}


def figsize(scale=1.0, ratio=None):
    width = 5.0 * scale
    ratio = (np.sqrt(5.0) - 1.0) / 2.0 if ratio is None else ratio
    return width, width * ratio


def plot_decay(summary, path, title=None):
    """Median/p95 relative angle distortion against n on log-log axes, with the fit."""
    rows = summary["per_n"]
    n = np.array([r["n"] for r in rows], dtype=float)
    med = np.array([r["angle_median"] for r in rows])
    p95 = np.array([r["angle_p95"] for r in rows])
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=figsize())
        ax.loglog(n, med, "o-", color=PALETTE[0], label="median")
        ax.loglog(n, p95, "s--", color=PALETTE[1], label="95th percentile")
        fit = summary.get("decay_fit")
        if fit:
            grid = np.geomspace(n.min(), n.max(), 50)
            ax.loglog(grid, np.exp(fit["intercept"]) * grid ** fit["slope"], ":", color="k",
                      label=f"fit, slope {fit['slope']:.3f}")
        ax.set_xlabel("target dimension n")
        ax.set_ylabel("relative angle distortion")
        if title:
            ax.set_title(title)
        ax.legend(frameon=False)
        fig.savefig(path)
        plt.close(fig)


def plot_distance_distortion(summary, path):
    """Median relative distortion of every distance kind against n."""
    rows = summary["per_n"]
    n = [r["n"] for r in rows]
    kinds = list(rows[0]["distance_median"])
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=figsize())
        for i, kind in enumerate(kinds):
            vals = [r["distance_median"][kind] for r in rows]
            ax.loglog(n, vals, "o-", color=PALETTE[i % len(PALETTE)], label=kind)
        ax.set_xlabel("target dimension n")
        ax.set_ylabel("median relative distance distortion")
        ax.legend(frameon=False, ncol=2)
        fig.savefig(path)
        plt.close(fig)


def plot_embedding(coords, labels, path, title=None):
    coords = np.asarray(coords)
    labels = np.asarray(labels)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=figsize(ratio=0.9))
        for lab in np.unique(labels):
            sel = labels == lab
            ax.scatter(coords[sel, 0], coords[sel, 1], s=10,
                       color=PALETTE[int(lab) % len(PALETTE)], label=str(lab))
        ax.set_aspect("equal", adjustable="datalim")
        if title:
            ax.set_title(title)
        ax.legend(frameon=False, title="label")
        fig.savefig(path)
        plt.close(fig)


def plot_phase_times(timings_ms, path):
    """Bar chart of per-phase wall-clock time (uncompressed vs compressed runs)."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=figsize())
        names = list(timings_ms)
        phases = list(timings_ms[names[0]])
        width = 0.8 / len(names)
        x = np.arange(len(phases))
        for i, name in enumerate(names):
            ax.bar(x + i * width, [timings_ms[name][p] for p in phases], width,
                   color=PALETTE[i % len(PALETTE)], label=name)
        ax.set_xticks(x + 0.4 - width / 2)
        ax.set_xticklabels(phases)
        ax.set_ylabel("time [ms]")
        ax.legend(frameon=False)
        fig.savefig(path)
        plt.close(fig)
