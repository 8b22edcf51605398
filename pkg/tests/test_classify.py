import math

import numpy as np
import pytest

from regimecurve import (
    Classifier,
    ClassModel,
    CurveSet,
    EmConfig,
    TimeGrid,
    class_posteriors,
    gaussian_logpdf,
    predict,
    predict_batch,
    train,
)
from regimecurve.core import PolyRegime, RhlpModel
from regimecurve.simulate import SimSpec, sample_rhlp

from helpers import two_class_sample


def constant_model(level, sigma2, grid):
    return RhlpModel(
        gate=np.zeros((1, 2)), regimes=(PolyRegime(beta=[level], sigma2=sigma2),),
        p=0, K=1, grid=grid,
    )


class TestTrain:
    def test_single_class_prior_one(self):
        curves, _, _ = sample_rhlp(SimSpec(K=1, p=0, betas=((0.0,),), gate=((0.0, 0.0),),
                                           sigmas=(1.0,), n=5, m=20, seed=0))
        clf = train(curves, np.ones(5, dtype=int), family="rhlp", K=1, p=0,
                    cfg=EmConfig(restarts=1, max_iter=20))
        assert len(clf.classes) == 1
        assert clf.classes[0].prior == 1.0

    def test_priors_are_class_proportions(self):
        rng = np.random.default_rng(0)
        grid = TimeGrid(np.linspace(0, 5, 10))
        values = rng.normal(size=(120, 10)) + np.repeat([0.0, 20.0, 40.0], [35, 40, 45])[:, None]
        labels = np.repeat([1, 2, 3], [35, 40, 45])
        clf = train(CurveSet(grid, values), labels, family="piecewise", K=1, p=0)
        assert [c.prior for c in clf.classes] == pytest.approx([35 / 120, 40 / 120, 45 / 120])

    def test_well_separated_classes_zero_resubstitution_error(self):
        curves, labels = two_class_sample(seed=10)
        for family in ("rhlp", "piecewise"):
            clf = train(curves, labels, family=family, K=2, p=0,
                        cfg=EmConfig(restarts=1, max_iter=40))
            pred, _ = predict_batch(clf, curves)
            assert np.array_equal(pred, labels)

    def test_failure_names_class(self):
        curves, labels = two_class_sample(seed=11, n1=3, n2=3, m=10)
        with pytest.raises(ValueError, match="class 1"):
            train(curves, labels, family="piecewise", K=11, p=0)

    def test_label_count_mismatch(self):
        curves, labels = two_class_sample(seed=12)
        with pytest.raises(ValueError):
            train(curves, labels[:-1], family="rhlp", K=1, p=0)


class TestPosteriors:
    def test_identical_models_equal_priors(self):
        grid = TimeGrid(np.linspace(0, 5, 30))
        model = constant_model(0.0, 1.0, grid)
        clf = Classifier(
            classes=(ClassModel(1, 0.5, model), ClassModel(2, 0.5, model)), family="rhlp",
        )
        rng = np.random.default_rng(1)
        for _ in range(5):
            post = class_posteriors(clf, rng.normal(size=30))
            assert post == pytest.approx([0.5, 0.5], abs=1e-12)

    def test_single_class(self):
        grid = TimeGrid(np.linspace(0, 5, 10))
        clf = Classifier(classes=(ClassModel(3, 1.0, constant_model(0.0, 1.0, grid)),),
                         family="rhlp")
        assert class_posteriors(clf, np.zeros(10)) == pytest.approx([1.0])

    def test_bayes_rule_oracle(self):
        grid = TimeGrid(np.array([0.0, 1.0]))
        m1 = constant_model(0.0, 1.0, grid)
        m2 = constant_model(2.0, 4.0, grid)
        clf = Classifier(classes=(ClassModel(1, 0.3, m1), ClassModel(2, 0.7, m2)), family="rhlp")
        x = np.array([0.5, 1.5])
        lik1 = math.exp(sum(gaussian_logpdf(v, 0.0, 1.0) for v in x))
        lik2 = math.exp(sum(gaussian_logpdf(v, 2.0, 4.0) for v in x))
        expect = 0.3 * lik1 / (0.3 * lik1 + 0.7 * lik2)
        post = class_posteriors(clf, x)
        assert post[0] == pytest.approx(expect, rel=1e-10)
        assert post.sum() == pytest.approx(1.0, abs=1e-12)

    def test_long_curves_stay_normalized(self):
        # 600 points would underflow any raw density product
        grid = TimeGrid(np.linspace(0, 5, 600))
        clf = Classifier(
            classes=(ClassModel(1, 0.5, constant_model(0.0, 0.01, grid)),
                     ClassModel(2, 0.5, constant_model(50.0, 0.01, grid))),
            family="rhlp",
        )
        post = class_posteriors(clf, np.full(600, 25.0) + np.linspace(-1, 1, 600))
        assert post.sum() == pytest.approx(1.0, abs=1e-12)
        assert np.all(post >= 0)

    def test_wrong_length_rejected(self):
        grid = TimeGrid(np.linspace(0, 5, 10))
        clf = Classifier(classes=(ClassModel(1, 1.0, constant_model(0.0, 1.0, grid)),),
                         family="rhlp")
        with pytest.raises(ValueError):
            class_posteriors(clf, np.zeros(9))


class TestPredict:
    def test_argmax(self):
        grid = TimeGrid(np.array([0.0, 1.0]))
        clf = Classifier(
            classes=(ClassModel(1, 0.5, constant_model(0.0, 1.0, grid)),
                     ClassModel(2, 0.5, constant_model(10.0, 1.0, grid))),
            family="rhlp",
        )
        assert predict(clf, np.array([0.1, -0.2])) == 1
        assert predict(clf, np.array([9.8, 10.1])) == 2

    def test_exact_tie_prefers_smaller_label(self):
        grid = TimeGrid(np.array([0.0, 1.0]))
        model = constant_model(0.0, 1.0, grid)
        clf = Classifier(classes=(ClassModel(1, 0.5, model), ClassModel(2, 0.5, model)),
                         family="rhlp")
        assert predict(clf, np.array([0.3, -0.3])) == 1

    def test_invariant_to_common_density_shift(self):
        # adding one constant to every class log-density cancels in the softmax
        grid = TimeGrid(np.linspace(0, 5, 8))
        m1 = constant_model(0.0, 1.0, grid)
        m2 = constant_model(3.0, 2.0, grid)
        clf = Classifier(classes=(ClassModel(1, 0.4, m1), ClassModel(2, 0.6, m2)), family="rhlp")
        rng = np.random.default_rng(3)
        curve = rng.normal(size=8)
        post = class_posteriors(clf, curve)
        scaled = Classifier(
            classes=(ClassModel(1, 0.4, constant_model(0.0, 1.0, grid)),
                     ClassModel(2, 0.6, constant_model(3.0, 2.0, grid))),
            family="rhlp",
        )
        assert class_posteriors(scaled, curve) == pytest.approx(post, abs=1e-12)


class TestClassifierValidation:
    def test_bad_priors_rejected(self):
        grid = TimeGrid(np.array([0.0, 1.0]))
        model = constant_model(0.0, 1.0, grid)
        with pytest.raises(ValueError):
            Classifier(classes=(ClassModel(1, 0.5, model), ClassModel(2, 0.6, model)),
                       family="rhlp")

    def test_bad_family_rejected(self):
        grid = TimeGrid(np.array([0.0, 1.0]))
        model = constant_model(0.0, 1.0, grid)
        with pytest.raises(ValueError):
            Classifier(classes=(ClassModel(1, 1.0, model),), family="spline")
