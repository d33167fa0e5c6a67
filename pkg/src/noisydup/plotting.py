"""Rate-curve figures written next to the CSV output.

The output format follows the file extension (``.svg``, ``.png``, ``.pdf``).
"""

from __future__ import annotations

from pathlib import Path
from typing import Mapping, Optional, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

STYLE = {
    "font.size": 10,
    "axes.labelsize": 11,
    "axes.titlesize": 12,
    "legend.fontsize": 9,
    "xtick.labelsize": 9,
    "ytick.labelsize": 9,
    "lines.linewidth": 1.5,
    "axes.grid": True,
    "grid.linestyle": ":",
    "grid.color": "0.6",
    "svg.hashsalt": "noisydup",  # stable element ids across runs
}

SERIES_COLORS = {0.0: "black", 0.01: "tab:blue", 0.1: "tab:red"}


def plot_rate_curves(
    series: Mapping[str, tuple[Sequence[float], Sequence[float]]],
    path,
    *,
    title: str = "",
    xlabel: str = "$p_d$",
    ylabel: str = "Information rate [bits/symbol]",
    colors: Optional[Mapping[str, str]] = None,
    references: Optional[Mapping[str, tuple[float, float]]] = None,
    xlim: tuple[float, float] = (0.0, 1.0),
    ylim: tuple[float, float] = (0.0, 1.0),
) -> Path:
    """One polyline with point markers per series; ``references`` adds labelled points."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(6.0, 4.5))
        for label, (xs, ys) in series.items():
            color = (colors or {}).get(label)
            ax.plot(xs, ys, marker="o", markersize=3, label=label, color=color)
        for label, (x, y) in (references or {}).items():
            ax.plot([x], [y], linestyle="none", marker="x", markersize=7, color="0.3", clip_on=False)
            ax.annotate(label, (x, y), textcoords="offset points", xytext=(4, 4), fontsize=8)
        ax.set_xlim(*xlim)
        ax.set_ylim(*ylim)
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        if title:
            ax.set_title(title)
        ax.legend(loc="lower right")
        fig.tight_layout()
        metadata = {"Date": None} if path.suffix == ".svg" else None
        fig.savefig(path, metadata=metadata)
        plt.close(fig)
    return path
