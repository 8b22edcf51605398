"""Regression with a hidden logistic process (soft regime switching).

Each time point carries a latent regime label drawn from a multinomial
whose proportions are a logistic transform of time, so regime transitions
can be abrupt or smooth depending on the gate slopes.  Parameters are
estimated by EM: posteriors per (curve, time, regime) in the E step, a
weighted polynomial solve and variance update per regime in the M step,
and a Newton-type iteratively reweighted least squares loop for the gate
weights.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .core import (
    CurveSet,
    PolyRegime,
    RhlpModel,
    TimeGrid,
    design_matrix,
    solve_weighted_ls,
)
from .core import LOG_2PI
from .piecewise import segment_fit

log = logging.getLogger(__name__)

# A regime whose total posterior mass falls below this is starved: its
# weighted updates are ill-posed and a fit that produced it is degenerate.
STARVED_MASS = 1e-12

_MAX_HALVINGS = 20


@dataclass(frozen=True)
class EmConfig:
    """Knobs of the EM fit and its inner gate solver."""

    max_iter: int = 1000
    tol: float = 1e-6
    restarts: int = 5
    seed: int = 42
    irls_max_iter: int = 50
    irls_grad_tol: float = 1e-6

    def __post_init__(self):
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.tol <= 0:
            raise ValueError("tol must be > 0")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.irls_max_iter < 1:
            raise ValueError("irls_max_iter must be >= 1")


@dataclass(frozen=True)
class EmTrace:
    """Per-iteration log-likelihoods of the winning restart."""

    logliks: tuple[float, ...]
    iterations: int
    converged: bool


class DegenerateFitError(ValueError):
    """A restart starved a regime of posterior mass and was discarded."""


def pin_gate(gate: np.ndarray) -> np.ndarray:
    """Re-express gate weights against the last regime, pinning it to (0, 0).

    The softmax is invariant to subtracting one row from all rows, and the
    pinned form is the one the Newton solver and serialization use.
    """
    gate = np.asarray(gate, dtype=float)
    return gate - gate[-1]


def _gate_logits(gate: np.ndarray, t: np.ndarray) -> np.ndarray:
    return gate[:, 0][None, :] + np.outer(t, gate[:, 1])


def _log_softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))


def logistic_proportions(gate: np.ndarray, grid: TimeGrid) -> np.ndarray:
    """m x K matrix of gate proportions; rows sum to 1 for any finite weights."""
    return np.exp(_log_softmax(_gate_logits(np.asarray(gate, float), grid.t)))


def _log_density_by_regime(model: RhlpModel, curves: CurveSet) -> np.ndarray:
    """n x m x K log N(x_ij; beta_k . r_j, sigma2_k)."""
    rows = design_matrix(curves.grid, model.p)
    means = rows @ model.betas.T                       # (m, K)
    sig2 = model.sigma2s                               # (K,)
    dev = curves.values[:, :, None] - means[None, :, :]
    return -0.5 * (LOG_2PI + np.log(sig2)[None, None, :] + dev**2 / sig2[None, None, :])


def _log_joint(model: RhlpModel, curves: CurveSet, log_pi: np.ndarray | None = None) -> np.ndarray:
    if log_pi is None:
        log_pi = _log_softmax(_gate_logits(model.gate, curves.grid.t))
    return log_pi[None, :, :] + _log_density_by_regime(model, curves)


def _logsumexp(a: np.ndarray, axis: int) -> np.ndarray:
    hi = a.max(axis=axis, keepdims=True)
    hi = np.where(np.isfinite(hi), hi, 0.0)
    return np.squeeze(hi, axis) + np.log(np.exp(a - hi).sum(axis=axis))


def rhlp_loglik(model: RhlpModel, curves: CurveSet, log_pi: np.ndarray | None = None) -> float:
    """Mixture log-likelihood, inner sums taken by log-sum-exp."""
    if curves.m != model.grid.m:
        raise ValueError("model and curves have different grid lengths")
    return float(_logsumexp(_log_joint(model, curves, log_pi), axis=2).sum())


def e_step(model: RhlpModel, curves: CurveSet, log_pi: np.ndarray | None = None) -> np.ndarray:
    """Posterior regime responsibilities, n x m x K, rows summing to 1 over K."""
    lj = _log_joint(model, curves, log_pi)
    return np.exp(lj - _logsumexp(lj, axis=2)[:, :, None])


def m_step_beta(tau: np.ndarray, curves: CurveSet, p: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-regime weighted polynomial solves.

    Returns (K x (p+1) coefficients, starved flags).  A starved regime
    (total responsibility below STARVED_MASS) falls back to the unweighted
    pooled fit and is flagged.
    """
    n, m, K = tau.shape
    if (n, m) != (curves.n, curves.m):
        raise ValueError("responsibilities do not match the curve set")
    rows = design_matrix(curves.grid, p)
    betas = np.empty((K, p + 1))
    starved = np.zeros(K, dtype=bool)
    for k in range(K):
        u = tau[:, :, k].sum(axis=0)                      # per-time mass
        if u.sum() <= STARVED_MASS:
            starved[k] = True
            betas[k] = segment_fit(curves, 0, m, p).beta
            continue
        uv = np.einsum("ij,ij->j", tau[:, :, k], curves.values)
        vbar = np.divide(uv, u, out=np.zeros_like(uv), where=u > 0)
        # Summing the weighted squared residual over curves collapses it to
        # one weighted row per time point.
        betas[k] = solve_weighted_ls(rows, vbar, weights=u)
    return betas, starved


def m_step_sigma(
    tau: np.ndarray,
    curves: CurveSet,
    betas: np.ndarray,
    floor: float | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Per-regime variance updates: responsibility-weighted mean squared
    residual, clamped at the variance floor.  Starved regimes fall back to
    the unweighted mean squared residual and are flagged."""
    if floor is None:
        floor = curves.variance_floor()
    n, m, K = tau.shape
    rows = design_matrix(curves.grid, betas.shape[1] - 1)
    sigma2s = np.empty(K)
    starved = np.zeros(K, dtype=bool)
    for k in range(K):
        resid2 = (curves.values - rows @ betas[k]) ** 2
        mass = tau[:, :, k].sum()
        if mass <= STARVED_MASS:
            starved[k] = True
            sigma2s[k] = max(float(resid2.mean()), floor)
            continue
        sigma2s[k] = max(float((tau[:, :, k] * resid2).sum() / mass), floor)
    return sigma2s, starved


def gate_fit_score(tau: np.ndarray, grid: TimeGrid, gate: np.ndarray) -> float:
    """Expected complete-data score of the gate: sum of tau * log proportions."""
    T = tau.sum(axis=0)
    log_pi = _log_softmax(_gate_logits(np.asarray(gate, float), grid.t))
    return float(np.where(T > 0, T * log_pi, 0.0).sum())


def gate_fit_score_and_grad(
    tau: np.ndarray, grid: TimeGrid, gate: np.ndarray
) -> tuple[float, np.ndarray]:
    """Gate score and its exact gradient on the free (K-1) x 2 weight block."""
    T = tau.sum(axis=0)                                    # (m, K)
    mass = T.sum(axis=1)                                   # n at every point for proper tau
    gate = pin_gate(gate)
    log_pi = _log_softmax(_gate_logits(gate, grid.t))
    pi = np.exp(log_pi)
    score = float(np.where(T > 0, T * log_pi, 0.0).sum())
    t2 = np.column_stack([np.ones(grid.m), grid.t])
    err = T[:, :-1] - mass[:, None] * pi[:, :-1]
    grad = np.einsum("jk,jd->kd", err, t2)
    return score, grad


def _gate_hessian(pi: np.ndarray, mass: np.ndarray, t2: np.ndarray) -> np.ndarray:
    """Negated score Hessian on the free block, as a 2(K-1) square matrix."""
    K1 = pi.shape[1] - 1
    pf = pi[:, :K1]
    coeff = mass[:, None, None] * (
        np.einsum("jk,kl->jkl", pf, np.eye(K1)) - np.einsum("jk,jl->jkl", pf, pf)
    )
    h = np.einsum("jkl,jd,je->kdle", coeff, t2, t2)
    return h.reshape(2 * K1, 2 * K1)


def irls_gate(tau: np.ndarray, grid: TimeGrid, w_init: np.ndarray, cfg: EmConfig) -> np.ndarray:
    """Maximize the gate score by damped Newton steps with step halving.

    The returned weights never score below ``w_init``; the last regime row
    stays pinned at (0, 0).  For K = 1 the gate is vacuous and returned
    unchanged.
    """
    K = tau.shape[2]
    if K == 1:
        return pin_gate(w_init)
    gate = pin_gate(w_init)
    T = tau.sum(axis=0)
    mass = T.sum(axis=1)
    t2 = np.column_stack([np.ones(grid.m), grid.t])

    score, grad = gate_fit_score_and_grad(tau, grid, gate)
    for _ in range(cfg.irls_max_iter):
        if np.abs(grad).max() < cfg.irls_grad_tol:
            break
        pi = np.exp(_log_softmax(_gate_logits(gate, grid.t)))
        hess = _gate_hessian(pi, mass, t2)
        step = _solve_newton(hess, grad.ravel())
        if step is None:
            log.warning("gate Hessian stayed singular after damping; keeping best iterate")
            break
        step = step.reshape(K - 1, 2)
        scale = 1.0
        for _ in range(_MAX_HALVINGS):
            trial = gate.copy()
            trial[:-1] += scale * step
            trial_score, trial_grad = gate_fit_score_and_grad(tau, grid, trial)
            if trial_score >= score:
                gate, score, grad = trial, trial_score, trial_grad
                break
            scale *= 0.5
        else:
            # No non-decreasing step exists at this scale: keep the best
            # iterate found so far.
            break
    return gate


def _solve_newton(hess: np.ndarray, grad: np.ndarray) -> np.ndarray | None:
    for damping in (0.0, 1e-8, 1e-8 * 10, 1e-8 * 100):
        try:
            step = np.linalg.solve(hess + damping * np.eye(hess.shape[0]), grad)
        except np.linalg.LinAlgError:
            continue
        if np.all(np.isfinite(step)):
            return step
    return None


def regime_fit_score(
    tau: np.ndarray, curves: CurveSet, betas: np.ndarray, sigma2s: np.ndarray
) -> float:
    """Expected complete-data score of the regime parameters."""
    rows = design_matrix(curves.grid, betas.shape[1] - 1)
    means = rows @ betas.T
    dev = curves.values[:, :, None] - means[None, :, :]
    logp = -0.5 * (LOG_2PI + np.log(sigma2s)[None, None, :] + dev**2 / sigma2s[None, None, :])
    return float((tau * logp).sum())


def _initial_model(
    curves: CurveSet, K: int, p: int, rng: np.random.Generator, perturb: bool
) -> RhlpModel:
    """Equal contiguous time blocks, per-block pooled fits, zero gate.

    Restarts beyond the first draw the interior block bounds uniformly at
    random instead.
    """
    m = curves.m
    if perturb:
        cuts = np.sort(rng.choice(np.arange(1, m), size=K - 1, replace=False)) if K > 1 else np.array([], int)
    else:
        cuts = np.round(np.arange(1, K) * m / K).astype(int)
    bounds = np.concatenate([[0], cuts, [m]])
    floor = curves.variance_floor()
    regimes = []
    for a, b in zip(bounds[:-1], bounds[1:]):
        fit = segment_fit(curves, int(a), int(b), p, floor)
        regimes.append(PolyRegime(beta=fit.beta, sigma2=fit.sigma2))
    return RhlpModel(gate=np.zeros((K, 2)), regimes=tuple(regimes), p=p, K=K, grid=curves.grid)


def _em_once(
    curves: CurveSet,
    init: RhlpModel,
    cfg: EmConfig,
    fixed_gate: np.ndarray | None,
) -> tuple[RhlpModel, EmTrace]:
    floor = curves.variance_floor()
    model = init
    log_pi_fixed = None
    if fixed_gate is not None:
        with np.errstate(divide="ignore"):
            log_pi_fixed = np.log(np.asarray(fixed_gate, dtype=float))
    logliks: list[float] = []
    converged = False
    for it in range(cfg.max_iter + 1):
        lj = _log_joint(model, curves, log_pi_fixed)
        point_ll = _logsumexp(lj, axis=2)
        loglik = float(point_ll.sum())
        if not np.isfinite(loglik):
            raise DegenerateFitError("log-likelihood became non-finite")
        logliks.append(loglik)
        if it > 0:
            prev = logliks[-2]
            if abs(loglik - prev) <= cfg.tol * max(1.0, abs(prev)):
                converged = True
                break
        if it == cfg.max_iter:
            break

        tau = np.exp(lj - point_ll[:, :, None])
        betas, starved_b = m_step_beta(tau, curves, model.p)
        sigma2s, starved_s = m_step_sigma(tau, curves, betas, floor)
        if starved_b.any() or starved_s.any():
            raise DegenerateFitError(
                f"regime {int(np.argmax(starved_b | starved_s)) + 1} starved of responsibility"
            )
        gate = model.gate
        if fixed_gate is None and model.K > 1:
            gate = irls_gate(tau, curves.grid, gate, cfg)
        regimes = tuple(PolyRegime(beta=b, sigma2=s) for b, s in zip(betas, sigma2s))
        model = RhlpModel(gate=gate, regimes=regimes, p=model.p, K=model.K, grid=model.grid)

    final = RhlpModel(
        gate=model.gate, regimes=model.regimes, p=model.p, K=model.K,
        grid=model.grid, loglik=logliks[-1],
    )
    return final, EmTrace(logliks=tuple(logliks), iterations=len(logliks) - 1, converged=converged)


def fit_em(
    curves: CurveSet,
    K: int,
    p: int,
    cfg: EmConfig = EmConfig(),
    fixed_gate: np.ndarray | None = None,
) -> tuple[RhlpModel, EmTrace]:
    """Fit the gated regression by EM with seeded multi-start.

    Among ``cfg.restarts`` initializations the model with the highest final
    log-likelihood wins (first restart on ties).  When ``fixed_gate`` is
    given (an m x K proportions matrix) the gate update is skipped and
    those proportions are used throughout; the returned gate weights then
    stay at the initial zeros and only the regime parameters are fitted.
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    if p < 0:
        raise ValueError("p must be >= 0")
    if K > curves.m:
        raise ValueError(f"K={K} exceeds the {curves.m} available time points")
    if K * (p + 1) > curves.n * curves.m:
        raise ValueError("model has more coefficients than data points")
    if fixed_gate is not None and np.shape(fixed_gate) != (curves.m, K):
        raise ValueError("fixed_gate must have shape (m, K)")

    best: tuple[RhlpModel, EmTrace] | None = None
    failures: list[str] = []
    for r in range(cfg.restarts):
        rng = np.random.default_rng([cfg.seed, r])
        init = _initial_model(curves, K, p, rng, perturb=r > 0)
        try:
            model, trace = _em_once(curves, init, cfg, fixed_gate)
        except DegenerateFitError as exc:
            failures.append(f"restart {r}: {exc}")
            log.debug("discarding degenerate restart %d: %s", r, exc)
            continue
        if best is None or model.loglik > best[0].loglik:
            best = (model, trace)
    if best is None:
        raise ValueError(
            f"all {cfg.restarts} restarts degenerate ({'; '.join(failures)})"
        )
    return best


def rhlp_approximation(model: RhlpModel) -> np.ndarray:
    """Fitted curve: gate-weighted mix of the regime polynomials.

    Continuous in time by construction, unlike the hard segmentation fit.
    """
    pi = logistic_proportions(model.gate, model.grid)
    means = design_matrix(model.grid, model.p) @ model.betas.T
    return np.einsum("jk,jk->j", pi, means)
