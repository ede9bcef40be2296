import unittest
import sys
import os

# Add the project root so the `src` package resolves
sys.path.append(os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__)))))

import numpy as np

from src.ai_core.overlap import estimate_propensity, trim_overlap
from src.models.estimation_model import SearchSpec
from src.utils.constants import ModelFamily, Scoring
from src.utils.exceptions import EmptyResult, InvalidSpec, SingleClass

FAST_BOOSTING = {"n_stages": 40, "learning_rate": 0.1, "max_depth": 2}


class TestTrimOverlap(unittest.TestCase):
    """Propensity trimming keeps low < e < high"""

    def test_keeps_interior_units(self):
        kept, report = trim_overlap([0.1, 0.3, 0.5, 0.85], 0.2, 0.8, ["a", "b", "c", "d"])
        self.assertEqual(kept.tolist(), [1, 2])
        self.assertEqual(report.n_kept, 2)
        self.assertEqual(report.kept.tolist(), [False, True, True, False])
        self.assertEqual(report.to_frame()["cell_id"].tolist(), ["a", "b", "c", "d"])

    def test_bounds_are_excluded(self):
        kept, _ = trim_overlap([0.2, 0.8, 0.5], 0.2, 0.8)
        self.assertEqual(kept.tolist(), [2])

    def test_everything_balanced(self):
        kept, report = trim_overlap(np.full(10, 0.5))
        self.assertEqual(report.n_kept, 10)
        self.assertEqual(kept.tolist(), list(range(10)))

    def test_nothing_survives(self):
        with self.assertRaises(EmptyResult):
            trim_overlap([0.01, 0.99, 0.05])

    def test_invalid_bounds(self):
        with self.assertRaises(InvalidSpec):
            trim_overlap([0.5], 0.8, 0.2)


class TestEstimatePropensity(unittest.TestCase):

    def test_random_assignment_centres_on_half(self):
        rng = np.random.default_rng(0)
        X = rng.normal(size=(400, 3))
        T = (rng.random(400) < 0.5).astype(float)
        scores = estimate_propensity(X, T, k_folds=5, spec=FAST_BOOSTING, seed=1)
        self.assertEqual(scores.shape, (400,))
        self.assertTrue(np.all((scores > 0) & (scores < 1)))
        self.assertLess(abs(scores.mean() - 0.5), 0.1)

    def test_deterministic_assignment_is_mostly_trimmed(self):
        rng = np.random.default_rng(3)
        X = rng.normal(size=(400, 2))
        T = (X[:, 0] > 0).astype(float)
        scores = estimate_propensity(X, T, k_folds=5, spec=FAST_BOOSTING, seed=1)
        inside = (scores > 0.2) & (scores < 0.8)
        self.assertLess(inside.mean(), 0.2)
        if inside.any():
            kept, _ = trim_overlap(scores, 0.2, 0.8)
            self.assertEqual(kept.tolist(), np.nonzero(inside)[0].tolist())
        else:
            with self.assertRaises(EmptyResult):
                trim_overlap(scores, 0.2, 0.8)

    def test_reproducible_for_a_seed(self):
        rng = np.random.default_rng(5)
        X = rng.normal(size=(120, 2))
        T = (rng.random(120) < 0.5).astype(float)
        a = estimate_propensity(X, T, k_folds=3, spec=FAST_BOOSTING, seed=9)
        b = estimate_propensity(X, T, k_folds=3, spec=FAST_BOOSTING, seed=9)
        np.testing.assert_array_equal(a, b)

    def test_tuned_logistic_spec(self):
        rng = np.random.default_rng(2)
        X = rng.normal(size=(200, 2))
        T = (rng.random(200) < 0.5).astype(float)
        spec = SearchSpec(ModelFamily.LOGISTIC, {"l2_penalty": [0.1, 1.0]}, k_folds=3, scoring=Scoring.F1)
        scores = estimate_propensity(X, T, k_folds=3, spec=spec, seed=0)
        self.assertLess(abs(scores.mean() - 0.5), 0.1)

    def test_regressor_spec_is_rejected(self):
        X = np.zeros((10, 1))
        T = np.array([0, 1] * 5, dtype=float)
        with self.assertRaises(InvalidSpec):
            estimate_propensity(X, T, spec=SearchSpec(ModelFamily.LASSO, {"l1_penalty": [0.1]}))

    def test_single_class(self):
        with self.assertRaises(SingleClass):
            estimate_propensity(np.zeros((10, 1)), np.ones(10))


if __name__ == "__main__":
    unittest.main()
