"""Globally optimal piecewise polynomial regression over a set of curves.

The segmentation cost is additive over segments, so the optimal K-part
partition of the shared time axis is found exactly by dynamic programming:
a table of one-segment costs for every admissible index interval, a
recursion growing the part count one at a time, and a backtracking pass
recovering the argmin bounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .core import (
    LOG_2PI,
    CurveSet,
    PiecewiseModel,
    PolyRegime,
    design_matrix,
    gaussian_logpdf,
    solve_weighted_ls,
)


@dataclass(frozen=True)
class SegmentFit:
    """One-segment weighted fit: coefficients, noise variance, additive cost."""

    beta: np.ndarray
    sigma2: float
    cost: float


@dataclass(frozen=True)
class CostTables:
    """Dynamic-programming work tables.

    ``c1[a, b]`` is the optimal one-segment cost of the half-open index
    interval (a, b]; entries with a >= b are +inf.  ``ck[k-1, b]`` is the
    optimal cost of splitting (0, b] into k segments and ``back[k-1, b]``
    the cut index attaining it (smallest index on ties).  Only the
    0-anchored per-k rows are kept: those are all the recursion and
    backtracking consume, and the full (a, b) tables per k would cost
    O(K m^2) memory with no consumer.
    """

    c1: np.ndarray
    ck: np.ndarray
    back: np.ndarray


def _segment_cost(ssr: float, n: int, length: int, floor: float) -> tuple[float, float]:
    sigma2 = max(ssr / (n * length), floor)
    return sigma2, ssr / sigma2 + n * length * math.log(sigma2)


def segment_fit(curves: CurveSet, a: int, b: int, p: int, floor: float | None = None) -> SegmentFit:
    """Fit one polynomial regime to samples a+1..b (1-based) of every curve.

    The coefficients minimize the pooled squared residual over all curves;
    the variance is the mean squared residual clamped at the floor, and the
    cost is the additive criterion the segmentation search minimizes.
    """
    m = curves.m
    if not (0 <= a < b <= m):
        raise ValueError(f"segment bounds must satisfy 0 <= a < b <= m, got ({a}, {b})")
    if floor is None:
        floor = curves.variance_floor()
    n = curves.n
    rows = design_matrix(curves.grid, p)[a:b]
    block = curves.values[:, a:b]
    # Pooled OLS over n stacked copies of the segment design collapses to a
    # fit against the per-time mean; the within-time scatter re-enters the
    # residual sum below.
    ybar = block.mean(axis=0)
    beta = solve_weighted_ls(rows, ybar)
    resid = block - rows @ beta
    ssr = float(np.einsum("ij,ij->", resid, resid))
    sigma2, cost = _segment_cost(ssr, n, b - a, floor)
    return SegmentFit(beta=beta, sigma2=sigma2, cost=cost)


def cost_table(curves: CurveSet, p: int, floor: float | None = None, min_len: int = 1) -> np.ndarray:
    """One-segment cost c1[a, b] for every interval (a, b], vectorized.

    The pooled residual splits into the within-time scatter around the
    per-time means plus n times the means' regression residual, and both
    parts reduce to interval sums, so all O(m^2) intervals are served from
    prefix sums and one batched solve instead of m^2 regressions.  The
    means are centered by one global fit and intervals short enough to be
    interpolated get an exact zero regression residual, which keeps the
    quadratic form free of catastrophic cancellation even where the
    variance floor would amplify it.
    """
    if floor is None:
        floor = curves.variance_floor()
    n, m = curves.n, curves.m
    rows = design_matrix(curves.grid, p)
    xbar = curves.values.mean(axis=0)
    ybar = xbar - rows @ solve_weighted_ls(rows, xbar)
    within = ((curves.values - xbar) ** 2).sum(axis=0)

    d = p + 1
    pre_rr = np.zeros((m + 1, d, d))
    np.cumsum(rows[:, :, None] * rows[:, None, :], axis=0, out=pre_rr[1:])
    pre_ry = np.zeros((m + 1, d))
    np.cumsum(rows * ybar[:, None], axis=0, out=pre_ry[1:])
    pre_y2 = np.zeros(m + 1)
    np.cumsum(ybar**2, out=pre_y2[1:])
    pre_w = np.zeros(m + 1)
    np.cumsum(within, out=pre_w[1:])

    ia, ib = np.triu_indices(m + 1, k=min_len)
    length = ib - ia
    gram = pre_rr[ib] - pre_rr[ia]
    rhs = pre_ry[ib] - pre_ry[ia]

    # Jacobi-equilibrated pseudo-inverse solve: tolerant of the rank
    # deficiency of segments shorter than p+1, cheap enough to batch over
    # every interval at once.
    diag = np.sqrt(np.einsum("bii->bi", gram))
    diag[diag <= 0.0] = 1.0
    gram_s = gram / (diag[:, :, None] * diag[:, None, :])
    beta = (np.linalg.pinv(gram_s, hermitian=True) @ (rhs / diag)[..., None])[..., 0] / diag

    # Quadratic form valid for any beta, so it stays exact under the
    # regularized solve; tiny negatives are roundoff.  Intervals of at most
    # p+1 points are interpolated exactly (distinct times give full row
    # rank), so their regression residual is identically zero.
    between = pre_y2[ib] - pre_y2[ia] - 2.0 * np.einsum("bi,bi->b", beta, rhs) \
        + np.einsum("bi,bij,bj->b", beta, gram, beta)
    between[length <= p + 1] = 0.0
    np.clip(between, 0.0, None, out=between)

    ssr = pre_w[ib] - pre_w[ia] + n * between
    sigma2 = np.maximum(ssr / (n * length), floor)
    cost = ssr / sigma2 + n * length * np.log(sigma2)

    c1 = np.full((m + 1, m + 1), np.inf)
    c1[ia, ib] = cost
    return c1


def _dp_tables(c1: np.ndarray, K: int) -> CostTables:
    m = c1.shape[0] - 1
    ck = np.full((K, m + 1), np.inf)
    back = np.full((K, m + 1), -1, dtype=int)
    ck[0] = c1[0]
    for k in range(1, K):
        # candidate cut h splits (0, b] into k parts on (0, h] plus one on
        # (h, b]; argmin returns the first (smallest) h on ties.
        total = ck[k - 1][:, None] + c1
        back[k] = np.argmin(total, axis=0)
        ck[k] = total[back[k], np.arange(m + 1)]
    return CostTables(c1=c1, ck=ck, back=back)


def fisher_segment(curves: CurveSet, K: int, p: int, min_segment_len: int = 1) -> PiecewiseModel:
    """Globally optimal K-segment polynomial fit of a curve set.

    Deterministic: ties in the cut search resolve to the smallest index.
    ``min_segment_len`` may be raised to p+1 to keep every per-segment
    regression full rank; the default length of 1 relies on the ridge
    fallback of the solver instead.
    """
    m = curves.m
    if K < 1:
        raise ValueError("K must be >= 1")
    if min_segment_len < 1:
        raise ValueError("min_segment_len must be >= 1")
    if K * min_segment_len > m:
        raise ValueError(
            f"cannot place {K} segments of >= {min_segment_len} points on {m} samples"
        )
    floor = curves.variance_floor()
    tables = _dp_tables(cost_table(curves, p, floor, min_segment_len), K)

    gamma = [m]
    for k in range(K - 1, 0, -1):
        gamma.append(int(tables.back[k, gamma[-1]]))
    gamma.append(0)
    gamma = np.array(gamma[::-1], dtype=int)

    fits = [
        segment_fit(curves, int(a), int(b), p, floor)
        for a, b in zip(gamma[:-1], gamma[1:])
    ]
    # The stored cost re-evaluates the chosen segments directly, so it is
    # consistent with the returned regimes; the table value only steered
    # the search and differs by floor-amplified roundoff on near-perfectly
    # fitted segments.
    model = PiecewiseModel(
        gamma=gamma, regimes=tuple(_as_regime(f) for f in fits), p=p, K=K,
        grid=curves.grid, cost=float(sum(f.cost for f in fits)),
    )
    return replace(model, loglik=piecewise_loglik(model, curves))


def _as_regime(fit: SegmentFit) -> PolyRegime:
    return PolyRegime(beta=fit.beta, sigma2=fit.sigma2)


def piecewise_loglik(model: PiecewiseModel, curves: CurveSet) -> float:
    """Gaussian log-likelihood of the segmentation on the given curves."""
    if curves.m != model.grid.m:
        raise ValueError("model and curves have different grid lengths")
    rows = design_matrix(curves.grid, model.p)
    total = 0.0
    for k, regime in enumerate(model.regimes):
        a, b = model.gamma[k], model.gamma[k + 1]
        mean = rows[a:b] @ regime.beta
        total += float(np.sum(gaussian_logpdf(curves.values[:, a:b], mean, regime.sigma2)))
    return total


def piecewise_criterion(model: PiecewiseModel, curves: CurveSet) -> float:
    """Additive segmentation criterion; equals -2 loglik - n m log(2 pi)."""
    return -2.0 * piecewise_loglik(model, curves) - curves.n * curves.m * LOG_2PI


def piecewise_approximation(model: PiecewiseModel) -> np.ndarray:
    """Fitted curve: within each segment the polynomial of its regime.

    Piecewise-polynomial and generally discontinuous at segment bounds.
    """
    rows = design_matrix(model.grid, model.p)
    out = np.empty(model.grid.m)
    for k, regime in enumerate(model.regimes):
        a, b = model.gamma[k], model.gamma[k + 1]
        out[a:b] = rows[a:b] @ regime.beta
    return out


def segment_labels(model: PiecewiseModel) -> np.ndarray:
    """1-based segment label of each time point, non-decreasing in t."""
    out = np.empty(model.grid.m, dtype=int)
    for k in range(model.K):
        out[model.gamma[k]:model.gamma[k + 1]] = k + 1
    return out
