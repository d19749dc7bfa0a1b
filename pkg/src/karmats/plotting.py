"""Figure rendering for simulated series and report outputs.

Trace panels follow one convention everywhere: continuous variables draw
as lines, binary variables as red step bands, categorical variables as
colored segments with one color per code. Latent columns only appear when
asked for.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from matplotlib.colors import BoundaryNorm, ListedColormap
from matplotlib.patches import Patch

from .metrics import EdgeMatchReport, FidelityReport, correlation_matrix
from .simulation import SeriesFrame

__all__ = ["plot_series", "plot_correlation_pair", "plot_match_report"]

_CAT_COLORS = plt.cm.tab10.colors


def _new_axes(n_rows: int, width: float = 9.0, row_height: float = 1.6):
    fig, axes = plt.subplots(
        n_rows, 1, figsize=(width, max(row_height * n_rows, 2.2)), sharex=True, squeeze=False
    )
    return fig, [a[0] for a in axes]


def plot_series(
    frame: SeriesFrame, path: str | Path, show_latent: bool = False, dpi: int = 150
) -> Path:
    """Render one stacked panel per variable and save a PNG."""
    variables = [v for v in frame.variables if show_latent or not v.latent]
    if not variables:
        raise ValueError("nothing to plot: every column is latent")
    fig, axes = _new_axes(len(variables))
    t = np.arange(frame.length)
    for ax, var in zip(axes, variables):
        col = frame.column(var.name)
        if var.kind == "continuous":
            ax.plot(t, col, lw=0.9, color="tab:blue")
        elif var.kind == "binary":
            ax.fill_between(t, 0, col, step="post", color="tab:red", alpha=0.55, lw=0)
            ax.step(t, col, where="post", color="tab:red", lw=0.9)
            ax.set_ylim(-0.1, 1.1)
            ax.set_yticks([0, 1])
        else:
            k = len(var.categories)
            colors = [_CAT_COLORS[i % len(_CAT_COLORS)] for i in range(k)]
            cmap = ListedColormap(colors)
            norm = BoundaryNorm(np.arange(-0.5, k + 0.5), k)
            ax.pcolormesh(
                np.arange(frame.length + 1),
                [0, 1],
                col[np.newaxis, :],
                cmap=cmap,
                norm=norm,
            )
            ax.set_yticks([])
            ax.legend(
                handles=[
                    Patch(color=colors[i], label=var.categories[i]) for i in range(k)
                ],
                loc="upper right",
                fontsize=6,
                ncol=min(k, 4),
                frameon=False,
            )
        label = var.name + (" (latent)" if var.latent else "")
        ax.set_ylabel(label, rotation=0, ha="right", va="center", fontsize=8)
    axes[-1].set_xlabel("step")
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=dpi)
    plt.close(fig)
    return path


def plot_correlation_pair(
    real: SeriesFrame,
    synth: SeriesFrame,
    path: str | Path,
    report: FidelityReport | None = None,
    dpi: int = 150,
) -> Path:
    """Side-by-side correlation heatmaps for a reference and a synthetic frame."""
    names = report.variables if report is not None else real.names
    fig, axes = plt.subplots(1, 2, figsize=(9.5, 4.2))
    for ax, frame, title in ((axes[0], real, "reference"), (axes[1], synth, "synthetic")):
        mat = correlation_matrix(frame, names)
        im = ax.imshow(mat, vmin=-1.0, vmax=1.0, cmap="RdBu_r")
        ax.set_xticks(range(len(names)), names, rotation=90, fontsize=7)
        ax.set_yticks(range(len(names)), names, fontsize=7)
        ax.set_title(title, fontsize=9)
    fig.colorbar(im, ax=axes, shrink=0.8)
    if report is not None:
        fig.suptitle(
            f"matrix_corr={report.matrix_corr:.4f}  mae={report.mae:.4f}  "
            f"rmse={report.rmse:.4f}  frobenius={report.frobenius:.4f}",
            fontsize=9,
        )
    path = Path(path)
    fig.savefig(path, dpi=dpi)
    plt.close(fig)
    return path


def plot_match_report(
    report: EdgeMatchReport, path: str | Path, dpi: int = 150
) -> Path:
    """Bar chart of precision/recall/F1 with the raw counts annotated."""
    fig, ax = plt.subplots(figsize=(5.2, 3.4))
    values = [report.precision, report.recall, report.f1]
    bars = ax.bar(
        ["precision", "recall", "F1"], values, color=["#4c72b0", "#dd8452", "#55a868"]
    )
    for bar, value in zip(bars, values):
        ax.text(
            bar.get_x() + bar.get_width() / 2,
            value + 0.02,
            f"{value:.3f}",
            ha="center",
            fontsize=9,
        )
    ax.set_ylim(0, 1.12)
    ax.set_title(
        f"{report.level} match, window {report.lag_window}: "
        f"TP={report.tp} FP={report.fp} FN={report.fn}",
        fontsize=9,
    )
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=dpi)
    plt.close(fig)
    return path
