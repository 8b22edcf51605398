"""Seeded generators for every simulated scenario used in the experiments.

All generators are pure functions of their spec and seed: identical seeds
reproduce bit-identical outputs on one platform.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import CurveSet, PolyRegime, RhlpModel, TimeGrid, design_matrix
from .rhlp import logistic_proportions

# Divisors applied to the gate weights to sweep regime transitions from
# abrupt (level 1) to smooth (level 10).
SMOOTHNESS_DIVISORS = (1, 2, 5, 10, 20, 40, 50, 80, 100, 125)

# Three constant regimes switching near 1 s and 3 s on a 5 s window.
_SMOOTH_BETAS = ((0.0,), (10.0,), (5.0,))
_SMOOTH_GATE = ((3341.33, -1706.96), (2436.97, -810.07), (0.0, 0.0))

# Three quadratic regimes switching near 1 s and 4 s on a 5 s window.
_EXP23_BETAS = ((23.0, -36.0, 18.0), (-3.9, 11.08, -2.2), (-337.0, 141.5, -14.0))
_EXP23_GATE = ((92.72, -46.72), (61.16, -15.28), (0.0, 0.0))
_EXP23_SIGMAS = (1.0, 1.25, 0.75)


@dataclass(frozen=True)
class SimSpec:
    """Full parameter set of the generative model plus sampling layout."""

    K: int
    p: int
    betas: tuple
    gate: tuple
    sigmas: tuple
    n: int
    m: int
    t_start: float = 0.0
    t_end: float = 5.0
    seed: int = 42

    def __post_init__(self):
        if self.n < 1 or self.m < 2:
            raise ValueError("need n >= 1 curves and m >= 2 samples")
        if self.t_start >= self.t_end:
            raise ValueError("t_start must precede t_end")
        if len(self.betas) != self.K or len(self.gate) != self.K or len(self.sigmas) != self.K:
            raise ValueError("betas, gate and sigmas must all have K entries")
        if any(len(b) != self.p + 1 for b in self.betas):
            raise ValueError("every beta must have p+1 coefficients")
        if any(s < 0 for s in self.sigmas):
            raise ValueError("noise levels must be nonnegative")

    def grid(self) -> TimeGrid:
        return TimeGrid(np.linspace(self.t_start, self.t_end, self.m))

    def to_model(self) -> RhlpModel:
        regimes = tuple(
            PolyRegime(beta=np.asarray(b, float), sigma2=max(float(s) ** 2, 1e-12))
            for b, s in zip(self.betas, self.sigmas)
        )
        return RhlpModel(
            gate=np.asarray(self.gate, float), regimes=regimes,
            p=self.p, K=self.K, grid=self.grid(),
        )


def mean_curve(spec: SimSpec) -> np.ndarray:
    """Noiseless mean: gate-weighted mix of the regime polynomials."""
    grid = spec.grid()
    pi = logistic_proportions(np.asarray(spec.gate, float), grid)
    means = design_matrix(grid, spec.p) @ np.asarray(spec.betas, float).T
    return np.einsum("jk,jk->j", pi, means)


def sample_rhlp(spec: SimSpec) -> tuple[CurveSet, np.ndarray, np.ndarray]:
    """Draw a curve set from the generative model.

    One hidden label per time point is drawn from the gate proportions and
    shared by all n curves; each observation is then Gaussian around its
    regime polynomial.  Returns (curves, noiseless mean curve, 1-based
    hidden labels).
    """
    grid = spec.grid()
    rng = np.random.default_rng(spec.seed)
    pi = logistic_proportions(np.asarray(spec.gate, float), grid)
    z0 = (rng.random(spec.m)[:, None] > np.cumsum(pi, axis=1)).sum(axis=1)
    z0 = np.minimum(z0, spec.K - 1)  # guard the roundoff tail of the cumsum
    means = design_matrix(grid, spec.p) @ np.asarray(spec.betas, float).T
    mu = means[np.arange(spec.m), z0]
    sig = np.asarray(spec.sigmas, float)[z0]
    values = mu + sig * rng.standard_normal((spec.n, spec.m))
    return CurveSet(grid, values), np.einsum("jk,jk->j", pi, means), z0 + 1


def smoothness_spec(level: int, n: int = 10, m: int = 100, seed: int = 42) -> SimSpec:
    """Three-constant-regime scenario at a transition smoothness level.

    Level 1 keeps the base gate weights (near-hard transitions); higher
    levels divide every nonzero gate row by a fixed divisor, flattening the
    slopes while preserving the transition locations (the intercept/slope
    ratio is unchanged when both scale together).
    """
    if not 1 <= level <= 10:
        raise ValueError("smoothness level must be in 1..10")
    div = SMOOTHNESS_DIVISORS[level - 1]
    gate = tuple((w0 / div, w1 / div) for w0, w1 in _SMOOTH_GATE)
    return SimSpec(
        K=3, p=0, betas=_SMOOTH_BETAS, gate=gate, sigmas=(2.0, 2.0, 2.0),
        n=n, m=m, t_start=0.0, t_end=5.0, seed=seed,
    )


def experiment23_spec(n: int, m: int, seed: int = 42) -> SimSpec:
    """Three-quadratic-regime scenario used for the sample-size and
    curve-size sweeps."""
    return SimSpec(
        K=3, p=2, betas=_EXP23_BETAS, gate=_EXP23_GATE, sigmas=_EXP23_SIGMAS,
        n=n, m=m, t_start=0.0, t_end=5.0, seed=seed,
    )


def _triangle(t: np.ndarray, center: float) -> np.ndarray:
    return np.maximum(6.0 - np.abs(t - center), 0.0)


def waveform(n_per_class: int, seed: int = 42, include_endpoint: bool = True) -> tuple[CurveSet, np.ndarray]:
    """Three-class triangular waveform benchmark.

    Curves are convex mixes of two of three unit-height-6 triangle bumps
    (peaks at t = 11, 15, 7) plus unit Gaussian noise, sampled each second
    on [0, 20].  ``include_endpoint`` keeps t = 20 (21 points); turning it
    off drops it (20 points), the other reading of a 1 s sampling of
    [0, 20].
    """
    if n_per_class < 1:
        raise ValueError("n_per_class must be >= 1")
    t = np.arange(0.0, 21.0 if include_endpoint else 20.0)
    grid = TimeGrid(t)
    h1, h2, h3 = _triangle(t, 11.0), _triangle(t, 15.0), _triangle(t, 7.0)
    pairs = ((h1, h2), (h2, h3), (h1, h3))
    rng = np.random.default_rng(seed)
    blocks = []
    for lo, hi in pairs:
        u = rng.random(n_per_class)[:, None]
        noise = rng.standard_normal((n_per_class, t.size))
        blocks.append(u * lo + (1.0 - u) * hi + noise)
    labels = np.repeat([1, 2, 3], n_per_class)
    return CurveSet(grid, np.vstack(blocks)), labels


def default_complex_models(m: int = 100) -> tuple[RhlpModel, RhlpModel, RhlpModel]:
    """Stand-in generator trio for the heterogeneous-class scenario.

    The outer two are well separated; the middle one is shared by both
    synthetic classes, which is what makes the mixture classes non
    homogeneous.
    """
    def spec(levels):
        return SimSpec(
            K=2, p=0, betas=tuple((v,) for v in levels), gate=((8.0, -4.0), (0.0, 0.0)),
            sigmas=(1.0, 1.0), n=1, m=m, t_start=0.0, t_end=5.0,
        )

    return tuple(spec(lv).to_model() for lv in ((0.0, 10.0), (30.0, 40.0), (60.0, 70.0)))


def complex_classes(
    models: tuple[RhlpModel, RhlpModel, RhlpModel] | None = None,
    seed: int = 42,
) -> tuple[CurveSet, np.ndarray]:
    """Two deliberately heterogeneous classes drawn from three generators.

    Class 1 mixes 15 curves from the first generator with 25 from the
    second; class 2 mixes 17 from the second with 20 from the third, so
    the middle generator contaminates both classes.
    """
    if models is None:
        models = default_complex_models()
    if len(models) != 3:
        raise ValueError("need exactly three reference models")
    grids = {mod.grid.m for mod in models}
    if len(grids) != 1:
        raise ValueError("reference models must share one grid")
    plan = ((0, 15, 1), (1, 25, 1), (1, 17, 2), (2, 20, 2))
    blocks, labels = [], []
    for batch, (mi, count, label) in enumerate(plan):
        mod = models[mi]
        sub_seed = int(np.random.SeedSequence([seed, batch]).generate_state(1)[0])
        spec = SimSpec(
            K=mod.K, p=mod.p,
            betas=tuple(tuple(r.beta) for r in mod.regimes),
            gate=tuple(map(tuple, mod.gate)),
            sigmas=tuple(float(np.sqrt(r.sigma2)) for r in mod.regimes),
            n=count, m=mod.grid.m,
            t_start=float(mod.grid.t[0]), t_end=float(mod.grid.t[-1]),
            seed=sub_seed,
        )
        curves, _, _ = sample_rhlp(spec)
        blocks.append(curves.values)
        labels.extend([label] * count)
    grid = models[0].grid
    return CurveSet(grid, np.vstack(blocks)), np.asarray(labels, dtype=int)
