"""Shared data model: time grids, curve sets, polynomial designs, model types.

Everything downstream (segmentation, gated regression, classification)
operates on a set of n curves sampled on one shared, strictly increasing
time grid of m points.  All containers are frozen dataclasses over
read-only numpy arrays, so they are safe to share across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

LOG_2PI = math.log(2.0 * math.pi)

# Noise-variance estimates are clamped from below at
# VARIANCE_FLOOR_SCALE * (global variance of the curve values, or 1 if that
# is 0).  A perfectly fitted segment otherwise yields sigma2 = 0 and a
# -inf log-density.
VARIANCE_FLOOR_SCALE = 1e-8

# Ridge added to a least-squares solve only when the factorization reports
# rank deficiency, scaled by the trace of the normal matrix.
RIDGE_SCALE = 1e-10


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class TimeGrid:
    """Strictly increasing sample times (seconds), shared by all curves.

    Single-point grids are accepted so degenerate evaluations (one sample,
    one segment) stay expressible; fitting routines impose their own
    minimum lengths.
    """

    t: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        if t.ndim != 1 or t.size < 1:
            raise ValueError("time grid must be a 1-d vector with at least one point")
        if not np.all(np.isfinite(t)):
            raise ValueError("time grid contains non-finite values")
        if t.size > 1 and not np.all(np.diff(t) > 0):
            raise ValueError("time stamps must be strictly increasing")
        object.__setattr__(self, "t", _readonly(t))

    @property
    def m(self) -> int:
        return self.t.size

    def __len__(self) -> int:
        return self.t.size


@dataclass(frozen=True)
class CurveSet:
    """n curves of m samples each, row i being one curve on the shared grid."""

    grid: TimeGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim == 1:
            v = v[None, :]
        if v.ndim != 2 or v.shape[0] < 1:
            raise ValueError("values must be an n x m matrix with n >= 1")
        if v.shape[1] != self.grid.m:
            raise ValueError(
                f"curves have {v.shape[1]} samples but the grid has {self.grid.m}"
            )
        if not np.all(np.isfinite(v)):
            raise ValueError("curve values contain non-finite entries")
        object.__setattr__(self, "values", _readonly(v))

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def m(self) -> int:
        return self.values.shape[1]

    def variance_floor(self) -> float:
        """Lower clamp for noise-variance estimates on this data."""
        gvar = float(self.values.var())
        return VARIANCE_FLOOR_SCALE * (gvar if gvar > 0.0 else 1.0)

    def subset(self, rows) -> "CurveSet":
        return CurveSet(self.grid, self.values[np.asarray(rows)])


def design_matrix(grid: TimeGrid, p: int) -> np.ndarray:
    """m x (p+1) polynomial design; row j is (1, t_j, t_j^2, ..., t_j^p)."""
    if p < 0:
        raise ValueError("polynomial degree must be >= 0")
    return np.vander(grid.t, N=p + 1, increasing=True)


def gaussian_logpdf(x, mean, var):
    """Elementwise log of the normal density N(x; mean, var)."""
    var = np.asarray(var, dtype=float)
    if np.any(var <= 0.0):
        raise ValueError("variance must be positive")
    x = np.asarray(x, dtype=float)
    out = -0.5 * (LOG_2PI + np.log(var) + (x - mean) ** 2 / var)
    return out if out.ndim else float(out)


def solve_weighted_ls(rows: np.ndarray, targets: np.ndarray, weights=None) -> np.ndarray:
    """Least-squares coefficients for ``targets ~ rows @ beta`` with optional
    nonnegative row weights.

    Solved through an orthogonal factorization of the weighted design; a
    ridge of RIDGE_SCALE * trace of the normal matrix is appended (as extra
    rows) only when the factorization reports rank deficiency, which keeps
    short or degenerate segments solvable without biasing the regular path.
    """
    a = np.asarray(rows, dtype=float)
    b = np.asarray(targets, dtype=float)
    if weights is not None:
        sw = np.sqrt(np.asarray(weights, dtype=float))
        a = a * sw[:, None]
        b = b * sw
    beta, _, rank, _ = np.linalg.lstsq(a, b, rcond=None)
    if rank < a.shape[1]:
        ridge = RIDGE_SCALE * float(np.einsum("ij,ij->", a, a))
        if ridge <= 0.0:
            ridge = RIDGE_SCALE
        aug = np.vstack([a, math.sqrt(ridge) * np.eye(a.shape[1])])
        baug = np.concatenate([b, np.zeros(a.shape[1])])
        beta, _, _, _ = np.linalg.lstsq(aug, baug, rcond=None)
    return beta


@dataclass(frozen=True)
class PolyRegime:
    """One regime: polynomial mean coefficients and noise variance."""

    beta: np.ndarray
    sigma2: float

    def __post_init__(self):
        beta = np.asarray(self.beta, dtype=float).ravel()
        if self.sigma2 <= 0.0 or not np.isfinite(self.sigma2):
            raise ValueError("regime variance must be positive and finite")
        object.__setattr__(self, "beta", _readonly(beta))
        object.__setattr__(self, "sigma2", float(self.sigma2))


def _stack_regimes(regimes) -> tuple[np.ndarray, np.ndarray]:
    betas = np.stack([r.beta for r in regimes])
    sigma2s = np.array([r.sigma2 for r in regimes])
    return betas, sigma2s


@dataclass(frozen=True)
class PiecewiseModel:
    """Hard segmentation fit: K contiguous segments with per-segment regimes.

    ``gamma`` holds the K+1 integer segment bounds with gamma[0] = 0 and
    gamma[K] = m; segment k covers sample indexes gamma[k] .. gamma[k+1]-1
    (0-based).  ``cost`` is the additive segmentation criterion attained by
    the fit and ``loglik`` the matching Gaussian log-likelihood.
    """

    gamma: np.ndarray
    regimes: tuple[PolyRegime, ...]
    p: int
    K: int
    grid: TimeGrid
    loglik: float | None = None
    cost: float | None = None

    def __post_init__(self):
        gamma = np.asarray(self.gamma, dtype=int)
        if gamma.size != self.K + 1:
            raise ValueError("gamma must have K+1 entries")
        if gamma[0] != 0 or gamma[-1] != self.grid.m:
            raise ValueError("gamma must start at 0 and end at m")
        if np.any(np.diff(gamma) < 1):
            raise ValueError("segment bounds must be strictly increasing")
        if len(self.regimes) != self.K:
            raise ValueError("need one regime per segment")
        object.__setattr__(self, "gamma", _readonly(gamma))
        object.__setattr__(self, "regimes", tuple(self.regimes))

    @property
    def betas(self) -> np.ndarray:
        return _stack_regimes(self.regimes)[0]

    @property
    def sigma2s(self) -> np.ndarray:
        return _stack_regimes(self.regimes)[1]


@dataclass(frozen=True)
class RhlpModel:
    """Soft regime-switching fit: K polynomial regimes mixed over time by a
    multinomial logistic gate.

    ``gate`` is the K x 2 matrix of gate weights (intercept, slope per
    regime); the last row is pinned to (0, 0) for identifiability since
    adding a constant vector to every row leaves the gate proportions
    unchanged.
    """

    gate: np.ndarray
    regimes: tuple[PolyRegime, ...]
    p: int
    K: int
    grid: TimeGrid
    loglik: float | None = None

    def __post_init__(self):
        gate = np.asarray(self.gate, dtype=float)
        if gate.shape != (self.K, 2):
            raise ValueError("gate weights must have shape (K, 2)")
        if not np.all(np.isfinite(gate)):
            raise ValueError("gate weights must be finite")
        if len(self.regimes) != self.K:
            raise ValueError("need one regime set per component")
        if self.loglik is not None and not np.isfinite(self.loglik):
            raise ValueError("log-likelihood must be finite")
        object.__setattr__(self, "gate", _readonly(gate))
        object.__setattr__(self, "regimes", tuple(self.regimes))

    @property
    def betas(self) -> np.ndarray:
        return _stack_regimes(self.regimes)[0]

    @property
    def sigma2s(self) -> np.ndarray:
        return _stack_regimes(self.regimes)[1]
