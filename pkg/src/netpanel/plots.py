"""Static SVG figures: classification curves, fit boxplots, difference plots.

Figures are rendered through the Agg backend with a fixed hash salt and no
embedded creation date, so the same inputs produce byte-identical SVG files.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

_SVG_OPTS = {"format": "svg", "metadata": {"Date": None}}


def _new_figure(width=6.0, height=4.5):
    plt.rcParams["svg.hashsalt"] = "netpanel"
    return plt.figure(figsize=(width, height))


def _finish(fig, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, **_SVG_OPTS)
    plt.close(fig)


def save_curves_svg(path, curves: dict, title: str = "") -> None:
    """Overlayed ROC or PR curves; ``curves`` maps display name to CurveResult."""
    fig = _new_figure()
    ax = fig.add_subplot(111)
    kinds = {c.kind for c in curves.values()}
    for name, curve in sorted(curves.items()):
        xs = [p[0] for p in curve.points]
        ys = [p[1] for p in curve.points]
        ax.plot(xs, ys, label=f"{name} (AUC {curve.auc:.3f})")
    if kinds == {"roc"}:
        ax.plot([0, 1], [0, 1], linestyle=":", color="gray", linewidth=1)
        ax.set_xlabel("false positive rate")
        ax.set_ylabel("true positive rate")
    else:
        ax.set_xlabel("recall")
        ax.set_ylabel("precision")
    ax.set_xlim(0, 1)
    ax.set_ylim(0, 1.02)
    if title:
        ax.set_title(title)
    ax.legend(loc="lower right", fontsize=8)
    _finish(fig, path)


def save_gof_svg(path, table, title: str = "") -> None:
    """Per-bin draw boxplots with the target overlaid as a line.

    ``table`` is a GofTable; infinite bins are labeled "inf".
    """
    fig = _new_figure(width=7.0)
    ax = fig.add_subplot(111)
    b = len(table.bins)
    positions = list(range(1, b + 1))
    ax.boxplot(
        [table.draw_values[:, j] for j in range(b)],
        positions=positions,
        widths=0.6,
        boxprops={"color": "gray"},
        medianprops={"color": "gray"},
        whiskerprops={"color": "gray"},
        capprops={"color": "gray"},
        flierprops={"markersize": 2, "markeredgecolor": "gray"},
    )
    ax.plot(positions, table.target, color="black", linewidth=1.5,
            label="observed")
    labels = [str(x) if x == x and x != float("inf") else "inf"
              for x in table.bins]
    ax.set_xticks(positions)
    ax.set_xticklabels(labels, fontsize=7)
    ax.set_xlabel(table.kind)
    ax.set_ylabel("count")
    if title:
        ax.set_title(title)
    ax.legend(loc="upper right", fontsize=8)
    _finish(fig, path)


def save_diff_boxplot_svg(path, values_by_kind: dict, title: str = "") -> None:
    """Boxplots of per-bin endogenous-fit differences, one box per kind.

    Values below zero favor the first model, above zero the second; the
    zero line marks parity.
    """
    fig = _new_figure()
    ax = fig.add_subplot(111)
    kinds = [k for k in values_by_kind if values_by_kind[k]]
    data = [values_by_kind[k] for k in kinds]
    if data:
        ax.boxplot(data, positions=list(range(1, len(data) + 1)), widths=0.6)
        ax.set_xticks(list(range(1, len(data) + 1)))
        ax.set_xticklabels(kinds, fontsize=7, rotation=20)
    ax.axhline(0.0, color="gray", linestyle=":", linewidth=1)
    ax.set_ylabel("mean |deviation| difference")
    if title:
        ax.set_title(title)
    _finish(fig, path)
