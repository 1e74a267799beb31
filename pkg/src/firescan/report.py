"""Rendered figures accompanying the CSV outputs of the CLI report paths."""
from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .metrics import MetricsReport
from .tiling import Histogram


def save_histogram_figure(hist: Histogram, path: str | Path) -> Path:
    """Render a patch-count histogram as a bar chart PNG."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    names = [b.label for b in hist.buckets]
    counts = [b.count for b in hist.buckets]

    fig, ax = plt.subplots(figsize=(7, 4))
    ax.bar(range(len(counts)), counts, color="#d1495b")
    ax.set_xticks(range(len(counts)))
    ax.set_xticklabels(names, rotation=30, ha="right")
    ax.set_xlabel("fire pixels per patch")
    ax.set_ylabel("patches")
    ax.set_title(f"Patch distribution for mask '{hist.mask_label}'")
    if max(counts, default=0) > 0:
        ax.set_yscale("symlog")
    ax.grid(axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_metrics_figure(rows: Sequence[tuple[str, MetricsReport]], path: str | Path) -> Path:
    """Render grouped P/R/IoU/F bars, one group per evaluated label."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    metric_names = ("P", "R", "IoU", "F")

    fig, ax = plt.subplots(figsize=(1.8 + 1.6 * max(1, len(rows)), 4))
    group_width = 0.8
    bar_width = group_width / len(metric_names)
    colors = ("#1f77b4", "#2ca02c", "#9467bd", "#d62728")
    for m, (name, color) in enumerate(zip(metric_names, colors)):
        xs = [i - group_width / 2 + (m + 0.5) * bar_width for i in range(len(rows))]
        ys = []
        for _, rep in rows:
            ys.append((rep.precision, rep.recall, rep.iou, rep.f_score)[m])
        ax.bar(xs, ys, width=bar_width, label=name, color=color)
    ax.set_xticks(range(len(rows)))
    ax.set_xticklabels([label for label, _ in rows])
    ax.set_ylim(0.0, 1.05)
    ax.set_ylabel("score")
    ax.set_title("Per-pixel evaluation")
    ax.legend(ncol=4, fontsize=9)
    ax.grid(axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
