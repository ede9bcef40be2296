import unittest
import sys
import os

# Add the project root so the `src` package resolves
sys.path.append(os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__)))))

import numpy as np

from src.ai_core.causal_forest import (
    CausalForest, CausalForestSpec, fit_causal_forest, leaf_effect, predict_cate, spec_grid,
    tune_causal_forest,
)
from src.ai_core.interpretation import interpret_tree
from src.models.estimation_model import ResidualizedData
from src.utils.exceptions import DegenerateResiduals, EmptyData, InvalidSpec, UnknownFeature


def _residuals(y_res, t_res) -> ResidualizedData:
    zeros = np.zeros_like(y_res)
    return ResidualizedData(y_res, t_res, np.zeros(y_res.shape[0], dtype=int), zeros, zeros)


def _step_data(n: int = 1000, seed: int = 0):
    """Ỹ = θ(x)·T̃ + noise with θ = 2 on x0 > 0, 0 elsewhere"""
    rng = np.random.default_rng(seed)
    X = rng.uniform(-1, 1, size=(n, 2))
    t_res = rng.normal(size=n)
    theta = np.where(X[:, 0] > 0, 2.0, 0.0)
    y_res = theta * t_res + 0.1 * rng.normal(size=n)
    return X, _residuals(y_res, t_res)


class TestLeafEffect(unittest.TestCase):

    def test_ratio_of_cross_products(self):
        self.assertEqual(leaf_effect(np.array([2.0, -2.0, 2.0]), np.array([1.0, -1.0, 1.0])), 2.0)

    def test_zero_weight_leaf(self):
        self.assertEqual(leaf_effect(np.array([1.0, 2.0]), np.array([0.0, 0.0])), 0.0)


class TestCausalForest(unittest.TestCase):
    """Honest causal forest over residualized data"""

    def test_homogeneous_effect(self):
        rng = np.random.default_rng(1)
        X = rng.uniform(-1, 1, size=(800, 2))
        t_res = rng.normal(size=800)
        y_res = 2.0 * t_res + 0.1 * rng.normal(size=800)
        forest = fit_causal_forest(X, _residuals(y_res, t_res),
                                   CausalForestSpec(n_trees=30, min_samples_leaf=20, seed=0))
        cates = forest.predict(X)
        self.assertLess(np.max(np.abs(cates - 2.0)), 0.25)

    def test_step_effect_sign(self):
        X, res = _step_data()
        forest = fit_causal_forest(X, res, CausalForestSpec(n_trees=50, min_samples_leaf=10, seed=3))
        query = np.array([[0.8, 0.0], [-0.8, 0.0]])
        high, low = forest.predict(query)
        self.assertGreater(high, 1.5)
        self.assertLess(low, 0.5)

    def test_same_seed_same_forest(self):
        X, res = _step_data(300)
        a = fit_causal_forest(X, res, CausalForestSpec(n_trees=10, min_samples_leaf=10, seed=5))
        b = fit_causal_forest(X, res, CausalForestSpec(n_trees=10, min_samples_leaf=10, seed=5, n_jobs=2))
        np.testing.assert_array_equal(a.predict(X), b.predict(X))

    def test_honest_halves_are_disjoint(self):
        X, res = _step_data(300)
        forest = fit_causal_forest(X, res, CausalForestSpec(n_trees=5, min_samples_leaf=10, seed=2))
        for tree in forest.trees_:
            struct, est = set(tree.structure_index_.tolist()), set(tree.estimation_index_.tolist())
            self.assertFalse(struct & est)
            self.assertLessEqual(abs(len(struct) - len(est)), 1)

    def test_tree_order_does_not_matter(self):
        X, res = _step_data(300)
        forest = fit_causal_forest(X, res, CausalForestSpec(n_trees=8, min_samples_leaf=10, seed=4))
        before = forest.predict(X)
        forest.trees_ = list(reversed(forest.trees_))
        np.testing.assert_allclose(forest.predict(X), before, rtol=0, atol=1e-12)

    def test_prediction_is_mean_of_estimation_leaf_effects(self):
        """Brute force: each tree's leaf effect recomputed from its estimation half"""
        X, res = _step_data(200)
        forest = fit_causal_forest(X, res, CausalForestSpec(n_trees=3, min_samples_leaf=10, seed=6))
        query = np.array([[0.3, -0.2], [-0.6, 0.9], [0.05, 0.05]])
        expected = np.zeros(query.shape[0])
        for tree in forest.trees_:
            leaves = tree.apply(query)
            for i, leaf in enumerate(leaves):
                idx = tree.leaf_estimation_[int(leaf)]
                self.assertTrue(set(idx.tolist()) <= set(tree.estimation_index_.tolist()))
                expected[i] += leaf_effect(res.y_res[idx], res.t_res[idx]) / 3.0
        np.testing.assert_allclose(forest.predict(query), expected, rtol=0, atol=1e-12)

    def test_round_trip(self):
        X, res = _step_data(200)
        forest = fit_causal_forest(X, res, CausalForestSpec(n_trees=4, min_samples_leaf=10, seed=1),
                                   ["elevation", "ppt"])
        again = CausalForest.from_dict(forest.to_dict())
        np.testing.assert_array_equal(again.predict(X), forest.predict(X))
        self.assertEqual(again.feature_names, ["elevation", "ppt"])

    def test_named_point(self):
        X, res = _step_data(200)
        forest = fit_causal_forest(X, res, CausalForestSpec(n_trees=4, min_samples_leaf=10, seed=1),
                                   ["elevation", "ppt"])
        value = predict_cate(forest, {"elevation": 0.5, "ppt": 0.1})
        self.assertEqual(value.shape, (1,))
        self.assertEqual(value[0], forest.predict(np.array([[0.5, 0.1]]))[0])
        with self.assertRaises(UnknownFeature):
            predict_cate(forest, {"elevation": 0.5, "slope": 0.1})

    def test_degenerate_residuals(self):
        X = np.zeros((100, 1))
        with self.assertRaises(DegenerateResiduals):
            fit_causal_forest(X, _residuals(np.ones(100), np.zeros(100)))

    def test_too_few_units(self):
        X, res = _step_data(30)
        with self.assertRaises(EmptyData):
            fit_causal_forest(X, res, CausalForestSpec(min_samples_leaf=10))

    def test_invalid_spec(self):
        with self.assertRaises(InvalidSpec):
            CausalForestSpec(subsample_fraction=0.0)


class TestForestTuning(unittest.TestCase):

    def test_grid_expansion(self):
        specs = spec_grid(CausalForestSpec(seed=3), {"min_samples_leaf": [5, 20], "n_trees": [10]})
        self.assertEqual([(s.min_samples_leaf, s.n_trees, s.seed) for s in specs],
                         [(5, 10, 3), (20, 10, 3)])

    def test_picks_lowest_heldout_objective(self):
        X, res = _step_data(400)
        candidates = spec_grid(CausalForestSpec(n_trees=10, seed=0), {"min_samples_leaf": [10, 60]})
        forest, best, table = tune_causal_forest(X, res, candidates, seed=0)
        self.assertEqual(len(table), 2)
        winner = int(np.argmin(table["heldout_objective"].to_numpy()))
        self.assertEqual(best, candidates[winner])
        self.assertEqual(forest.spec, best)


class TestInterpretationTree(unittest.TestCase):

    def test_constant_cates_single_leaf(self):
        X = np.random.default_rng(0).normal(size=(20, 2))
        tree = interpret_tree(X, np.full(20, 1.5), 2)
        self.assertEqual(tree.leaves(), [0])
        self.assertEqual(tree.depth(), 0)
        stats = tree.node_stats[0]
        self.assertEqual(stats.n, 20)
        self.assertAlmostEqual(stats.cate_mean, 1.5, places=12)
        self.assertAlmostEqual(stats.cate_std, 0.0, places=12)

    def test_depth_two_partition(self):
        rng = np.random.default_rng(1)
        X = rng.normal(size=(200, 3))
        cate = X[:, 0] + 0.5 * X[:, 1] ** 2 + 0.1 * rng.normal(size=200)
        tree = interpret_tree(X, cate, 2)
        self.assertLessEqual(tree.depth(), 2)
        self.assertLessEqual(len(tree.leaves()), 4)
        self.assertEqual(sum(s.n for s in tree.leaf_stats().values()), 200)

    def test_step_threshold(self):
        rng = np.random.default_rng(2)
        x0 = np.tile(np.arange(11, dtype=float), 10)
        X = np.column_stack([x0, rng.normal(size=x0.size)])
        cate = (x0 > 5).astype(float)
        tree = interpret_tree(X, cate, 2, ["slope", "noise"])
        root = tree.to_dict()["root"]
        self.assertEqual(root["feature"], "slope")
        self.assertGreater(root["threshold"], 4.0)
        self.assertLess(root["threshold"], 6.0)
        self.assertEqual(root["true"]["cate_mean"], 0.0)
        self.assertEqual(root["false"]["cate_mean"], 1.0)
        self.assertTrue(tree.render_text().startswith("node 0: if slope <= 5.5000"))

    def test_node_interval(self):
        X = np.arange(4, dtype=float).reshape(-1, 1)
        cate = np.array([1.0, 2.0, 3.0, 4.0])
        tree = interpret_tree(X, cate, 1)
        root = tree.node_stats[0]
        half = 1.96 * np.std(cate, ddof=1) / 2.0
        self.assertAlmostEqual(root.ci_high - root.cate_mean, half, places=12)


if __name__ == "__main__":
    unittest.main()
