"""Evaluation harness: approximation error, cross-validated classification
error, and runtime-scaling benchmarks."""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .classify import predict_batch, train
from .core import CurveSet
from .piecewise import fisher_segment
from .rhlp import EmConfig, fit_em
from .simulate import experiment23_spec, sample_rhlp


@dataclass(frozen=True)
class CvReport:
    """Stratified k-fold misclassification summary.

    ``std_error`` is the across-fold sample standard deviation; the raw
    per-fold errors are always kept so any other convention can be
    recomputed from them.
    """

    folds: tuple[float, ...]
    mean_error: float
    std_error: float
    k: int
    seed: int


@dataclass(frozen=True)
class BenchRow:
    method: str
    n: int
    m: int
    K: int
    p: int
    seconds: float
    repetitions: int


@dataclass(frozen=True)
class BenchReport:
    rows: tuple[BenchRow, ...]


def approximation_mse(true_mean, fitted, n: int = 1) -> float:
    """Mean squared error of a fitted curve against the true mean curve.

    ``fitted`` may be one shared m-vector (the per-curve average form then
    collapses, independent of n) or an n x m matrix of per-curve fits.
    """
    mu = np.asarray(true_mean, dtype=float)
    xhat = np.asarray(fitted, dtype=float)
    if xhat.ndim == 1:
        if xhat.shape != mu.shape:
            raise ValueError(f"length mismatch: {mu.shape} vs {xhat.shape}")
        return float(np.mean((mu - xhat) ** 2))
    if xhat.ndim == 2 and xhat.shape[1] == mu.size:
        return float(np.mean((mu[None, :] - xhat) ** 2))
    raise ValueError(f"fitted shape {xhat.shape} incompatible with mean of {mu.size}")


def stratified_folds(labels, k: int, seed: int) -> list[np.ndarray]:
    """Disjoint fold index sets covering every curve, stratified by class:
    a seeded shuffle within each class dealt round-robin into k folds."""
    labels = np.asarray(labels)
    if k < 2:
        raise ValueError("need k >= 2 folds")
    rng = np.random.default_rng(seed)
    folds: list[list[int]] = [[] for _ in range(k)]
    for label in np.unique(labels):
        idx = np.flatnonzero(labels == label)
        if idx.size < k:
            raise ValueError(f"class {label} has {idx.size} curves, fewer than k={k}")
        idx = rng.permutation(idx)
        for f in range(k):
            folds[f].extend(idx[f::k])
    return [np.sort(np.array(f, dtype=int)) for f in folds]


def kfold_cv(
    curves: CurveSet,
    labels,
    k: int,
    family: str,
    K: int,
    p: int,
    cfg: EmConfig = EmConfig(),
    seed: int = 42,
    min_segment_len: int = 1,
) -> CvReport:
    """Stratified k-fold cross-validated misclassification rate."""
    labels = np.asarray(labels, dtype=int)
    folds = stratified_folds(labels, k, seed)
    errors = []
    for held in folds:
        mask = np.ones(curves.n, dtype=bool)
        mask[held] = False
        clf = train(
            curves.subset(mask), labels[mask], family=family, K=K, p=p,
            cfg=cfg, min_segment_len=min_segment_len,
        )
        pred, _ = predict_batch(clf, curves.subset(held))
        errors.append(float(np.mean(pred != labels[held])))
    errors = np.array(errors)
    std = float(errors.std(ddof=1)) if k > 1 else 0.0
    return CvReport(
        folds=tuple(errors.tolist()), mean_error=float(errors.mean()),
        std_error=std, k=k, seed=seed,
    )


def runtime_bench(
    cells,
    methods=("piecewise", "rhlp"),
    K: int = 3,
    p: int = 2,
    repetitions: int = 3,
    seed: int = 42,
    cfg: EmConfig | None = None,
) -> BenchReport:
    """Wall-time of each method on freshly simulated data per (n, m) cell.

    Cells run sequentially so timings do not interfere; when repetitions
    allow (>= 3), the first run is treated as warm-up and excluded from
    the average.
    """
    cells = list(cells)
    if not cells:
        raise ValueError("empty benchmark grid")
    if cfg is None:
        cfg = EmConfig(restarts=1, max_iter=200, seed=seed)
    rows = []
    for n, m in cells:
        curves, _, _ = sample_rhlp(experiment23_spec(int(n), int(m), seed=seed))
        for method in methods:
            times = []
            for _ in range(repetitions):
                t0 = time.perf_counter()
                if method == "piecewise":
                    fisher_segment(curves, K, p)
                elif method == "rhlp":
                    fit_em(curves, K, p, cfg)
                else:
                    raise ValueError(f"unknown method {method!r}")
                times.append(time.perf_counter() - t0)
            kept = times[1:] if repetitions >= 3 else times
            rows.append(BenchRow(
                method=method, n=int(n), m=int(m), K=K, p=p,
                seconds=float(np.mean(kept)), repetitions=repetitions,
            ))
    return BenchReport(rows=tuple(rows))


def rank_correlation(x, y) -> float:
    """Spearman rank correlation (average ranks on ties)."""
    def ranks(v):
        v = np.asarray(v, dtype=float)
        order = np.argsort(v, kind="mergesort")
        r = np.empty(v.size)
        r[order] = np.arange(1, v.size + 1)
        for val in np.unique(v):
            tie = v == val
            if tie.sum() > 1:
                r[tie] = r[tie].mean()
        return r

    rx, ry = ranks(x), ranks(y)
    rx -= rx.mean()
    ry -= ry.mean()
    denom = np.sqrt((rx**2).sum() * (ry**2).sum())
    if denom == 0:
        return 0.0
    return float((rx * ry).sum() / denom)
