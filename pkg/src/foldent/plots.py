"""SVG figures for the command-line reports, drawn with matplotlib.

Output is made byte-reproducible by fixing the SVG hash salt and dropping
the creation date from the metadata.
"""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

SVG_META = {"Date": None, "Creator": "foldent"}


def _save(fig, path):
    with matplotlib.rc_context({"svg.hashsalt": "foldent", "svg.fonttype": "none"}):
        fig.savefig(path, format="svg", metadata=SVG_META)
    plt.close(fig)
    return path


def series_plot(path, x, ys: dict, xlabel: str, ylabel: str, title: str = "", hlines: dict | None = None,
                logy: bool = False):
    """Line plot of one or more series against a shared abscissa."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, y in ys.items():
        ax.plot(x, y, marker="o", ms=3, lw=1.2, label=label)
    for label, v in (hlines or {}).items():
        if v is not None and math.isfinite(v):
            ax.axhline(v, ls="--", lw=0.9, color="gray")
            ax.annotate(label, (0.01, v), xycoords=("axes fraction", "data"), fontsize=8,
                        va="bottom", color="dimgray")
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title, fontsize=10)
    if len(ys) > 1:
        ax.legend(fontsize=8)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    return _save(fig, path)


def map_plot(path, fmap, n: int = 4001, zoom=None):
    """Graph of the map, optionally with a zoomed inset window ``(lo, hi)``."""
    import numpy as np

    xs = np.linspace(0.0, 1.0, n)
    xs[-1] = np.nextafter(1.0, 0.0)
    fig, axes = plt.subplots(1, 2 if zoom else 1, figsize=(9 if zoom else 5, 4.2), squeeze=False)
    ax = axes[0, 0]
    ax.plot(xs, fmap(xs), lw=0.8)
    ax.plot([0, 1], [0, 1], ls=":", color="gray", lw=0.7)
    ax.set_xlim(0, 1)
    ax.set_ylim(0, 1)
    ax.set_title(fmap.name, fontsize=10)
    if zoom:
        lo, hi = zoom
        zx = np.linspace(lo, hi, n)
        axes[0, 1].plot(zx, fmap(zx), lw=0.8)
        axes[0, 1].set_title(f"[{lo:.4g}, {hi:.4g}]", fontsize=10)
    fig.tight_layout()
    return _save(fig, path)
