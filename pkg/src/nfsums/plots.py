"""Matplotlib figure rendering for the report path (Agg, files only)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np


def _save(fig, out_dir, name):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / name
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def slope_fit_figure(xs, ys, slope, title, out_dir, name):
    """log-log scatter with the fitted power law overlaid."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    fig, ax = plt.subplots(figsize=(5, 3.4))
    ax.loglog(xs, ys, "o", ms=4, label="measured")
    ref = ys[0] * (xs / xs[0]) ** slope
    ax.loglog(xs, ref, "--", lw=1, label=f"slope {slope:.3f}")
    ax.set_title(title)
    ax.legend(fontsize=8)
    ax.grid(True, which="both", alpha=0.3)
    return _save(fig, out_dir, name)


def residual_bars(labels, residuals, tolerance, title, out_dir, name):
    fig, ax = plt.subplots(figsize=(max(5, 0.4 * len(labels)), 3.4))
    x = np.arange(len(labels))
    ax.bar(x, np.maximum(np.asarray(residuals, dtype=float), 1e-18))
    ax.axhline(tolerance, color="r", ls="--", lw=1, label=f"tolerance {tolerance:.0e}")
    ax.set_yscale("log")
    ax.set_xticks(x)
    ax.set_xticklabels(labels, rotation=60, ha="right", fontsize=7)
    ax.set_title(title)
    ax.legend(fontsize=8)
    return _save(fig, out_dir, name)


def ratio_scatter(xs, ratios, title, out_dir, name, hline=None):
    fig, ax = plt.subplots(figsize=(5, 3.4))
    ax.plot(xs, ratios, "o", ms=4)
    if hline is not None:
        ax.axhline(hline, color="r", ls="--", lw=1)
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    return _save(fig, out_dir, name)


def curve_figure(xs, ys, title, out_dir, name, loglog=True):
    fig, ax = plt.subplots(figsize=(5, 3.4))
    plot = ax.loglog if loglog else ax.plot
    plot(xs, np.maximum(np.abs(np.asarray(ys, dtype=float)), 1e-300), "-o", ms=3)
    ax.set_title(title)
    ax.grid(True, which="both", alpha=0.3)
    return _save(fig, out_dir, name)
