"""Report figures rendered to files next to the table/CSV/JSON outputs."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .eval import EvaluationReport, METRIC_NAMES


def render_fold_metrics(report: EvaluationReport, path: str | Path) -> None:
    """Grouped per-fold bars for the four metrics."""
    folds = report.scored_folds
    fig, ax = plt.subplots(figsize=(max(6.0, 0.6 * len(folds) + 2.0), 3.6))
    if folds:
        x = np.arange(len(folds))
        width = 0.2
        for i, name in enumerate(METRIC_NAMES):
            ax.bar(x + (i - 1.5) * width, [getattr(f, name) for f in folds], width, label=name)
        ax.set_xticks(x)
        ax.set_xticklabels([f.participant for f in folds], rotation=45, ha="right")
        ax.set_ylim(0.0, 1.05)
        ax.legend(ncol=4, fontsize=8, loc="lower right")
    ax.set_ylabel("score")
    ax.set_title(
        f"{report.task} ({report.positive_event}) / {report.modality} / {report.model_kind}"
    )
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_confusion(report: EvaluationReport, path: str | Path) -> None:
    """Heatmap of the confusion counts summed over all scored folds."""
    folds = report.scored_folds
    tp = sum(f.tp for f in folds)
    fp = sum(f.fp for f in folds)
    fn = sum(f.fn for f in folds)
    tn = sum(f.tn for f in folds)
    grid = np.array([[tp, fn], [fp, tn]], dtype=float)
    fig, ax = plt.subplots(figsize=(4.2, 3.8))
    ax.imshow(grid, cmap="Blues")
    ticks = [report.positive_event, "silent"]
    ax.set_xticks([0, 1], [f"pred {t}" for t in ticks])
    ax.set_yticks([0, 1], [f"true {t}" for t in ticks])
    for (r, c), value in np.ndenumerate(grid):
        colour = "white" if value > grid.max() / 2 else "black"
        ax.text(c, r, f"{int(value)}", ha="center", va="center", color=colour)
    ax.set_title(f"{report.task} pooled confusion ({len(folds)} folds)")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_report_figures(report: EvaluationReport, out_dir: str | Path, prefix: str) -> list[Path]:
    out_dir = Path(out_dir)
    folds_png = out_dir / f"{prefix}_folds.png"
    confusion_png = out_dir / f"{prefix}_confusion.png"
    render_fold_metrics(report, folds_png)
    render_confusion(report, confusion_png)
    return [folds_png, confusion_png]
