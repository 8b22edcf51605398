"""Matplotlib figure rendering for fits and reports, written to files."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .core import CurveSet, PiecewiseModel, RhlpModel
from .piecewise import piecewise_approximation, segment_labels
from .rhlp import logistic_proportions, rhlp_approximation


def render_fit(model, curves: CurveSet, path) -> None:
    """Two panels: curves with the fitted mean on top, the regime structure
    (gate proportions or hard segment labels) below."""
    t = curves.grid.t
    fig, (ax, axg) = plt.subplots(
        2, 1, figsize=(7, 5.5), sharex=True, height_ratios=[2.2, 1.0]
    )
    for row in curves.values:
        ax.plot(t, row, color="0.75", lw=0.6, zorder=1)
    ax.plot(t, curves.values.mean(axis=0), color="k", ls="--", lw=1.2, label="mean")
    if isinstance(model, RhlpModel):
        ax.plot(t, rhlp_approximation(model), color="crimson", lw=1.8, label="fit")
        pi = logistic_proportions(model.gate, model.grid)
        for k in range(model.K):
            axg.plot(t, pi[:, k], lw=1.4, label=f"regime {k + 1}")
        axg.set_ylabel("proportion")
        axg.set_ylim(-0.05, 1.05)
    elif isinstance(model, PiecewiseModel):
        fit = piecewise_approximation(model)
        labels = segment_labels(model)
        for k in range(1, model.K + 1):
            sel = labels == k
            ax.plot(t[sel], fit[sel], color="crimson", lw=1.8,
                    label="fit" if k == 1 else None)
        axg.step(t, labels, where="post", lw=1.4)
        axg.set_ylabel("segment")
        axg.set_yticks(range(1, model.K + 1))
    else:
        plt.close(fig)
        raise TypeError(f"cannot render {type(model).__name__}")
    ax.legend(loc="best", fontsize=8)
    axg.set_xlabel("time (s)")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_bic(report, path) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    degrees = sorted({c.p for c in report.grid})
    for p in degrees:
        cells = sorted((c for c in report.grid if c.p == p), key=lambda c: c.K)
        ax.plot([c.K for c in cells], [c.bic for c in cells], marker="o", label=f"p={p}")
    bK, bp = report.best
    best = next(c for c in report.grid if (c.K, c.p) == (bK, bp))
    ax.plot([bK], [best.bic], marker="*", ms=16, color="k", zorder=5)
    ax.set_xlabel("K")
    ax.set_ylabel("BIC")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_cv(report, path) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.bar(np.arange(1, report.k + 1), report.folds, color="steelblue")
    ax.axhline(report.mean_error, color="crimson", ls="--",
               label=f"mean {100 * report.mean_error:.2f}%")
    ax.set_xlabel("fold")
    ax.set_ylabel("misclassification rate")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_bench(report, path) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    methods = sorted({r.method for r in report.rows})
    for method in methods:
        rows = sorted((r for r in report.rows if r.method == method), key=lambda r: (r.m, r.n))
        ax.plot([r.m for r in rows], [r.seconds for r in rows], marker="o", label=method)
    ax.set_xlabel("curve size m")
    ax.set_ylabel("wall time (s)")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
