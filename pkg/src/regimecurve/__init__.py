"""Curve modeling with regime changes.

Two estimators over a set of curves sharing one time grid: globally
optimal piecewise polynomial regression found by dynamic programming, and
a soft regime-switching regression whose hidden labels follow a
time-indexed multinomial logistic gate, fitted by EM.  On top of either:
BIC model selection, MAP curve classification, seeded simulators, and an
evaluation harness.
"""

from .classify import Classifier, ClassModel, class_posteriors, predict, predict_batch, train
from .core import (
    CurveSet,
    PiecewiseModel,
    PolyRegime,
    RhlpModel,
    TimeGrid,
    design_matrix,
    gaussian_logpdf,
)
from .evaluate import (
    BenchReport,
    BenchRow,
    CvReport,
    approximation_mse,
    kfold_cv,
    rank_correlation,
    runtime_bench,
    stratified_folds,
)
from .model_selection import BicCell, BicReport, bic, grid_select, n_params
from .piecewise import (
    SegmentFit,
    fisher_segment,
    piecewise_approximation,
    piecewise_criterion,
    piecewise_loglik,
    segment_fit,
    segment_labels,
)
from .rhlp import (
    EmConfig,
    EmTrace,
    e_step,
    fit_em,
    gate_fit_score,
    gate_fit_score_and_grad,
    irls_gate,
    logistic_proportions,
    m_step_beta,
    m_step_sigma,
    regime_fit_score,
    rhlp_approximation,
    rhlp_loglik,
)
from .simulate import (
    SimSpec,
    complex_classes,
    default_complex_models,
    experiment23_spec,
    mean_curve,
    sample_rhlp,
    smoothness_spec,
    waveform,
)

__version__ = "0.1.0"

__all__ = [
    "BenchReport", "BenchRow", "BicCell", "BicReport", "ClassModel",
    "Classifier", "CurveSet", "CvReport", "EmConfig", "EmTrace",
    "PiecewiseModel", "PolyRegime", "RhlpModel", "SegmentFit", "SimSpec",
    "TimeGrid", "approximation_mse", "bic", "class_posteriors",
    "complex_classes", "default_complex_models", "design_matrix", "e_step",
    "experiment23_spec", "fisher_segment", "fit_em", "gate_fit_score",
    "gate_fit_score_and_grad", "gaussian_logpdf", "grid_select", "irls_gate",
    "kfold_cv", "logistic_proportions", "m_step_beta", "m_step_sigma",
    "mean_curve", "n_params", "piecewise_approximation", "piecewise_criterion",
    "piecewise_loglik", "predict", "predict_batch", "rank_correlation",
    "regime_fit_score", "rhlp_approximation", "rhlp_loglik", "runtime_bench",
    "sample_rhlp", "segment_fit", "segment_labels", "smoothness_spec",
    "stratified_folds", "train", "waveform",
]
