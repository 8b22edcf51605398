"""BIC-based joint selection of the regime count K and polynomial degree p."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .core import CurveSet, RhlpModel
from .rhlp import EmConfig, fit_em, rhlp_loglik

log = logging.getLogger(__name__)


def n_params(K: int, p: int) -> int:
    """Free parameter count: K(p+1) coefficients, K variances, 2(K-1) gate
    weights with the last regime pinned; collapses to K(p+4) - 2."""
    return K * (p + 4) - 2


def bic(model: RhlpModel, curves: CurveSet) -> float:
    """Penalized log-likelihood; larger is better."""
    loglik = rhlp_loglik(model, curves)
    return loglik - n_params(model.K, model.p) * math.log(curves.n * curves.m) / 2.0


@dataclass(frozen=True)
class BicCell:
    K: int
    p: int
    loglik: float
    nu: int
    bic: float


@dataclass(frozen=True)
class BicReport:
    """Scores for every fitted (K, p) cell plus the winning pair.

    Ties resolve toward smaller K, then smaller p.  Cells whose fit failed
    are excluded from the grid and listed under ``failures``.
    """

    grid: tuple[BicCell, ...]
    best: tuple[int, int]
    failures: tuple[tuple[int, int, str], ...] = ()


def grid_select(
    curves: CurveSet,
    K_range,
    p_range,
    cfg: EmConfig = EmConfig(),
    threads: int = 1,
) -> BicReport:
    """Fit every (K, p) pair and pick the BIC maximizer.

    Deterministic for a fixed ``cfg.seed`` regardless of ``threads``: each
    cell fits independently and the reduction runs in grid order.
    """
    cells = [(int(K), int(p)) for K in K_range for p in p_range]
    if not cells:
        raise ValueError("empty (K, p) search grid")

    def fit_cell(Kp):
        K, p = Kp
        model, _ = fit_em(curves, K, p, cfg)
        return BicCell(K=K, p=p, loglik=model.loglik, nu=n_params(K, p), bic=bic(model, curves))

    results: list[BicCell | Exception] = []
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = [pool.submit(fit_cell, c) for c in cells]
            for fut in futures:
                results.append(fut.exception() or fut.result())
    else:
        for c in cells:
            try:
                results.append(fit_cell(c))
            except ValueError as exc:
                results.append(exc)

    grid: list[BicCell] = []
    failures: list[tuple[int, int, str]] = []
    for (K, p), res in zip(cells, results):
        if isinstance(res, Exception):
            log.warning("grid cell (K=%d, p=%d) failed: %s", K, p, res)
            failures.append((K, p, str(res)))
        else:
            grid.append(res)
    if not grid:
        raise ValueError("every (K, p) cell failed to fit")

    best = min(grid, key=lambda c: (-c.bic, c.K, c.p))
    return BicReport(grid=tuple(grid), best=(best.K, best.p), failures=tuple(failures))
