"""MAP curve classification on top of either model family.

One generative model is fitted per class; a new curve goes to the class
maximizing prior times class-conditional density, with every density
product accumulated in log space (raw products over hundreds of samples
underflow).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import CurveSet, PiecewiseModel, RhlpModel
from .piecewise import fisher_segment, piecewise_loglik
from .rhlp import EmConfig, fit_em, rhlp_loglik

FAMILIES = ("rhlp", "piecewise")


@dataclass(frozen=True)
class ClassModel:
    label: int
    prior: float
    model: PiecewiseModel | RhlpModel


@dataclass(frozen=True)
class Classifier:
    """Per-class fitted models plus class priors, one shared model family."""

    classes: tuple[ClassModel, ...]
    family: str

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"family must be one of {FAMILIES}")
        priors = np.array([c.prior for c in self.classes])
        if np.any(priors <= 0) or abs(priors.sum() - 1.0) > 1e-12:
            raise ValueError("priors must be positive and sum to 1")
        ms = {c.model.grid.m for c in self.classes}
        if len(ms) != 1:
            raise ValueError("class models must share one grid length")

    @property
    def labels(self) -> np.ndarray:
        return np.array([c.label for c in self.classes])

    @property
    def grid(self):
        return self.classes[0].model.grid


def train(
    curves: CurveSet,
    labels,
    family: str = "rhlp",
    K: int = 2,
    p: int = 1,
    cfg: EmConfig = EmConfig(),
    min_segment_len: int = 1,
) -> Classifier:
    """Fit one model per class label; priors are the class proportions."""
    if family not in FAMILIES:
        raise ValueError(f"family must be one of {FAMILIES}")
    labels = np.asarray(labels, dtype=int)
    if labels.shape != (curves.n,):
        raise ValueError("need exactly one label per curve")
    classes = []
    for label in np.unique(labels):
        subset = curves.subset(labels == label)
        try:
            if family == "piecewise":
                model = fisher_segment(subset, K, p, min_segment_len)
            else:
                model, _ = fit_em(subset, K, p, cfg)
        except ValueError as exc:
            raise ValueError(f"fit failed for class {label}: {exc}") from exc
        classes.append(ClassModel(label=int(label), prior=subset.n / curves.n, model=model))
    return Classifier(classes=tuple(classes), family=family)


def _curve_log_density(classifier: Classifier, curve: np.ndarray) -> np.ndarray:
    one = CurveSet(classifier.grid, np.asarray(curve, dtype=float)[None, :])
    if classifier.family == "piecewise":
        return np.array([piecewise_loglik(c.model, one) for c in classifier.classes])
    return np.array([rhlp_loglik(c.model, one) for c in classifier.classes])


def class_posteriors(classifier: Classifier, curve) -> np.ndarray:
    """Posterior class probabilities of one curve, normalized in log space."""
    curve = np.asarray(curve, dtype=float)
    if curve.shape != (classifier.grid.m,):
        raise ValueError(
            f"curve has {curve.size} samples, classifier expects {classifier.grid.m}"
        )
    logpost = np.log([c.prior for c in classifier.classes]) + _curve_log_density(classifier, curve)
    logpost -= logpost.max()
    post = np.exp(logpost)
    return post / post.sum()


def predict(classifier: Classifier, curve) -> int:
    """MAP label; exact posterior ties resolve to the smallest label index."""
    return int(classifier.labels[int(np.argmax(class_posteriors(classifier, curve)))])


def predict_batch(classifier: Classifier, curves: CurveSet) -> tuple[np.ndarray, np.ndarray]:
    """Labels and the n x G posterior matrix for every curve of a set."""
    post = np.vstack([class_posteriors(classifier, row) for row in curves.values])
    return classifier.labels[np.argmax(post, axis=1)], post
