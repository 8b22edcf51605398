"""Shared fixtures-in-spirit for the test suite."""

import itertools
import math

import numpy as np

from regimecurve import CurveSet, TimeGrid, segment_fit
from regimecurve.simulate import SimSpec, sample_rhlp


def random_curves(rng, n, m, jump=5.0):
    """Noise plus a level jump after the midpoint, on a random grid."""
    t = np.sort(rng.uniform(0, 5, m))
    while len(np.unique(t)) < m:
        t = np.sort(rng.uniform(0, 5, m))
    shift = np.where(np.arange(m) > m // 2, jump, 0.0)
    return CurveSet(TimeGrid(t), rng.normal(size=(n, m)) + shift)


def enumerate_best_cost(curves, K, p):
    """Exhaustive segmentation oracle: minimum additive cost over all cuts."""
    floor = curves.variance_floor()
    best = math.inf
    for cuts in itertools.combinations(range(1, curves.m), K - 1):
        bounds = (0,) + cuts + (curves.m,)
        cost = sum(
            segment_fit(curves, a, b, p, floor).cost
            for a, b in zip(bounds[:-1], bounds[1:])
        )
        best = min(best, cost)
    return best


def two_class_sample(seed, shift=30.0, n1=20, n2=25, m=40):
    """Two regime-switching classes whose levels differ by ``shift``."""
    base = SimSpec(K=2, p=0, betas=((0.0,), (10.0,)), gate=((8.0, -4.0), (0.0, 0.0)),
                   sigmas=(1.0, 1.0), n=n1, m=m, seed=seed)
    far = SimSpec(K=2, p=0, betas=((shift,), (shift + 10.0,)), gate=((8.0, -4.0), (0.0, 0.0)),
                  sigmas=(1.0, 1.0), n=n2, m=m, seed=seed + 1)
    c1, _, _ = sample_rhlp(base)
    c2, _, _ = sample_rhlp(far)
    curves = CurveSet(c1.grid, np.vstack([c1.values, c2.values]))
    labels = np.array([1] * n1 + [2] * n2)
    return curves, labels
