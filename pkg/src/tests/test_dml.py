import unittest
import sys
import os

# Add the project root so the `src` package resolves
sys.path.append(os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__)))))

import numpy as np
from scipy.special import expit

from src.ai_core.causal_forest import CausalForestSpec
from src.ai_core.dml import crossfit_residualize, fit_dml, fit_linear_cate
from src.ai_core.model_selection import build_estimator
from src.models.estimation_model import NuisanceSpec, ResidualizedData, SearchSpec
from src.models.panel_model import CrossSection
from src.utils.constants import CateBasis, FinalStageKind, ModelFamily, Scoring
from src.utils.exceptions import DegenerateResiduals, EmptyData, InvalidSpec, SingleClass

FAST_NUISANCE = NuisanceSpec(
    outcome_candidates=(SearchSpec(ModelFamily.LASSO, {"l1_penalty": [1e-3]}, k_folds=3),),
    treatment_candidates=(SearchSpec(ModelFamily.LOGISTIC, {"l2_penalty": [1.0]}, k_folds=3,
                                     scoring=Scoring.F1),),
    k_folds=3,
)


def _residuals(y_res, t_res) -> ResidualizedData:
    y_res = np.asarray(y_res, dtype=float)
    t_res = np.asarray(t_res, dtype=float)
    zeros = np.zeros_like(y_res)
    return ResidualizedData(y_res, t_res, np.zeros(y_res.shape[0], dtype=int), zeros, zeros)


def _confounded_rows(n: int, theta: float, seed: int):
    """Y = θT + x0 + noise with P(T=1) rising in x0"""
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, 2))
    T = (rng.random(n) < 1.0 / (1.0 + np.exp(-0.8 * X[:, 0]))).astype(int)
    Y = theta * T + X[:, 0] + 0.5 * rng.normal(size=n)
    rows = [CrossSection(f"c{i:04d}", {"x0": X[i, 0], "x1": X[i, 1]}, float(T[i]), float(Y[i]), int(T[i]))
            for i in range(n)]
    return rows, X, T, Y


class TestLinearFinalStage(unittest.TestCase):
    """Residual-on-residual regression"""

    def test_exact_intercept_effect(self):
        model = fit_linear_cate(_residuals([2, -2, 2], [1, -1, 1]))
        self.assertEqual(model.ate, 2.0)
        self.assertEqual(model.ate_stderr, 0.0)
        self.assertEqual(model.ate_ci, (2.0, 2.0))

    def test_proportional_residuals_collapse_the_interval(self):
        t_res = np.array([0.3, -0.7, 0.5, -0.2, 0.6])
        model = fit_linear_cate(_residuals(2.0 * t_res, t_res))
        self.assertAlmostEqual(model.ate, 2.0, places=12)
        self.assertLess(model.ate_ci[1] - model.ate_ci[0], 1e-9)

    def test_orthogonal_residuals_give_zero(self):
        model = fit_linear_cate(_residuals([1, 1, -1, -1], [1, -1, 1, -1]))
        self.assertEqual(model.ate, 0.0)
        self.assertLess(model.ate_ci[0], 0.0)
        self.assertGreater(model.ate_ci[1], 0.0)

    def test_interval_uses_sandwich_error(self):
        t_res = np.array([1.0, -1.0, 0.5, -0.5])
        y_res = np.array([1.0, -3.0, 1.0, 0.0])
        model = fit_linear_cate(_residuals(y_res, t_res))
        theta = np.dot(t_res, y_res) / np.dot(t_res, t_res)
        se = np.sqrt(np.sum(t_res ** 2 * (y_res - theta * t_res) ** 2)) / np.dot(t_res, t_res)
        self.assertAlmostEqual(model.ate, theta, places=12)
        self.assertAlmostEqual(model.ate_ci[1] - model.ate, 1.96 * se, places=12)

    def test_zero_treatment_residuals(self):
        with self.assertRaises(DegenerateResiduals):
            fit_linear_cate(_residuals([1, 2, 3], [0, 0, 0]))

    def test_linear_in_x_basis(self):
        rng = np.random.default_rng(4)
        X = rng.normal(size=(50, 1))
        t_res = rng.normal(size=50)
        y_res = t_res * (1.0 + 2.0 * X[:, 0])
        model = fit_linear_cate(_residuals(y_res, t_res), X, CateBasis.LINEAR_IN_X, ["x0"])
        np.testing.assert_allclose(model.coef, [1.0, 2.0], atol=1e-9)
        self.assertAlmostEqual(model.ate, 1.0 + 2.0 * X[:, 0].mean(), places=9)
        self.assertEqual(model.feature_ranges["x0"], (float(X.min()), float(X.max())))

    def test_linear_in_x_needs_features(self):
        with self.assertRaises(InvalidSpec):
            fit_linear_cate(_residuals([1, 2], [1, -1]), None, CateBasis.LINEAR_IN_X)


class TestCrossFitting(unittest.TestCase):

    def test_single_class_treatment(self):
        X = np.random.default_rng(0).normal(size=(30, 2))
        with self.assertRaises(SingleClass):
            crossfit_residualize(X, np.ones(30), np.zeros(30), FAST_NUISANCE)

    def test_predictions_are_out_of_fold(self):
        _, X, T, Y = _confounded_rows(150, 2.0, seed=1)
        res = crossfit_residualize(X, Y, T, FAST_NUISANCE, seed=3, n_jobs=1)
        self.assertEqual(sorted(np.unique(res.fold_id).tolist()), [0, 1, 2])
        for k in range(3):
            train, test = res.fold_id != k, res.fold_id == k
            g = build_estimator(ModelFamily.LASSO, {"l1_penalty": 1e-3}, 3).fit(X[train], Y[train])
            np.testing.assert_allclose(res.y_hat[test], g.predict(X[test]), rtol=1e-10, atol=1e-10)
        np.testing.assert_allclose(res.y_res, Y - res.y_hat)
        np.testing.assert_allclose(res.t_res, T - res.t_hat)

    def test_first_stage_report(self):
        _, X, T, Y = _confounded_rows(150, 2.0, seed=2)
        report = crossfit_residualize(X, Y, T, FAST_NUISANCE, seed=0).report
        self.assertEqual(report.outcome_family, ModelFamily.LASSO.value)
        self.assertEqual(report.treatment_family, ModelFamily.LOGISTIC.value)
        self.assertEqual(report.outcome_params, {"l1_penalty": 1e-3})
        self.assertGreater(report.outcome_test_r2, 0.3)
        self.assertEqual(len(report.outcome_cv), 1)
        self.assertIn("mean_score", report.treatment_cv[0])

    def test_nuisance_preset_from_config(self):
        spec = NuisanceSpec.from_dict({"preset": "forest_and_logistic"})
        self.assertEqual([s.family for s in spec.outcome_candidates], [ModelFamily.RANDOM_FOREST])
        self.assertEqual([s.family for s in spec.treatment_candidates], [ModelFamily.LOGISTIC])
        self.assertEqual(spec.treatment_candidates[0].scoring, Scoring.F1)


class TestOrthogonality(unittest.TestCase):
    """Nuisance errors reach the effect only at second order"""

    def test_nuisance_bias_enters_at_second_order(self):
        rng = np.random.default_rng(21)
        n, theta = 1_000_000, 2.0
        X = rng.normal(size=(n, 2))
        m = expit(0.8 * X[:, 0])
        T = (rng.random(n) < m).astype(float)
        g = X[:, 0] + np.sin(X[:, 1])
        Y = theta * T + g + 0.5 * rng.normal(size=n)
        ell = theta * m + g

        def partialled_out(eps):
            return fit_linear_cate(_residuals(Y - ell - eps, T - m - eps)).ate

        def plug_in(eps):
            # regress Y - g on T with a biased g
            return float(np.dot(T, Y - g - eps) / np.dot(T, T))

        base = partialled_out(0.0)
        self.assertLess(abs(base - theta), 0.02)
        full, half = partialled_out(0.1) - base, partialled_out(0.05) - base
        self.assertGreater(full / half, 3.5)
        self.assertLess(full / half, 4.5)

        naive_full, naive_half = plug_in(0.1) - plug_in(0.0), plug_in(0.05) - plug_in(0.0)
        self.assertAlmostEqual(naive_full / naive_half, 2.0, places=6)
        self.assertLess(abs(half), abs(naive_half) / 2.0)

    def test_fair_coin_treatment_residuals_are_centered(self):
        rng = np.random.default_rng(5)
        X = rng.normal(size=(2000, 3))
        T = (rng.random(2000) < 0.5).astype(float)
        Y = X[:, 0] + rng.normal(size=2000)
        res = crossfit_residualize(X, Y, T, FAST_NUISANCE, seed=0, n_jobs=1)
        self.assertLess(abs(float(res.t_res.mean())), 0.05)
        self.assertLess(float(np.max(np.abs(res.t_hat - 0.5))), 0.15)

    def test_exact_outcome_model_leaves_no_outcome_residual(self):
        rng = np.random.default_rng(6)
        X = rng.normal(size=(300, 3))
        T = (X[:, 2] + rng.normal(size=300) > 0).astype(float)
        Y = 1.0 + 2.0 * X[:, 0] - X[:, 1]
        spec = NuisanceSpec(
            outcome_candidates=(SearchSpec(ModelFamily.LASSO, {"l1_penalty": [0.0]}, k_folds=3),),
            treatment_candidates=FAST_NUISANCE.treatment_candidates,
            k_folds=3,
        )
        res = crossfit_residualize(X, Y, T, spec, seed=0, n_jobs=1)
        np.testing.assert_allclose(res.y_res, np.zeros(300), atol=1e-6)
        self.assertGreater(res.report.outcome_test_r2, 1.0 - 1e-9)


class TestFitDml(unittest.TestCase):

    def test_recovers_constant_effect(self):
        rows, *_ = _confounded_rows(400, 2.0, seed=7)
        model = fit_dml(rows, FAST_NUISANCE, seed=0, min_units=50, n_jobs=1)
        self.assertEqual(model.kind, FinalStageKind.LINEAR)
        self.assertLess(abs(model.ate - 2.0), 0.3)
        self.assertLess(model.ate_ci[0], model.ate)
        self.assertEqual(model.feature_names, ["x0", "x1"])
        self.assertEqual(model.meta["seed"], 0)

    def test_causal_forest_final_stage(self):
        rows, X, *_ = _confounded_rows(300, 2.0, seed=8)
        spec = CausalForestSpec(n_trees=20, min_samples_leaf=10, seed=0)
        model = fit_dml(rows, FAST_NUISANCE, FinalStageKind.CAUSAL_FOREST, seed=0,
                        forest_spec=spec, min_units=50, n_jobs=1)
        self.assertEqual(model.kind, FinalStageKind.CAUSAL_FOREST)
        np.testing.assert_allclose(model.ate, model.forest.predict(X).mean())
        half = model.ate_ci[1] - model.ate
        self.assertAlmostEqual(half, 1.96 * model.ate_stderr, places=12)
        self.assertIn("intercept_only_ate", model.meta)

    def test_forest_and_linear_ate_agree(self):
        rows, X, T, Y = _confounded_rows(600, 2.0, seed=9)
        residuals = crossfit_residualize(X, Y, T, FAST_NUISANCE, seed=0, n_jobs=1)
        linear = fit_dml(rows, FAST_NUISANCE, seed=0, min_units=50, n_jobs=1, residuals=residuals)
        forest = fit_dml(rows, FAST_NUISANCE, FinalStageKind.CAUSAL_FOREST, seed=0,
                         forest_spec=CausalForestSpec(n_trees=50, min_samples_leaf=25, seed=0),
                         min_units=50, n_jobs=1, residuals=residuals)
        joint = (linear.ate_ci[1] - linear.ate_ci[0]) / 2.0 + (forest.ate_ci[1] - forest.ate_ci[0]) / 2.0
        self.assertLessEqual(abs(forest.ate - linear.ate), joint)
        self.assertAlmostEqual(forest.meta["intercept_only_ate"], linear.ate, places=12)

    def test_too_few_units(self):
        rows, *_ = _confounded_rows(20, 2.0, seed=0)
        with self.assertRaises(EmptyData):
            fit_dml(rows, FAST_NUISANCE, min_units=50)

    def test_unbinarized_treatment(self):
        rows, *_ = _confounded_rows(60, 2.0, seed=0)
        rows[0].treatment = None
        with self.assertRaises(InvalidSpec):
            fit_dml(rows, FAST_NUISANCE, min_units=10)


if __name__ == "__main__":
    unittest.main()
