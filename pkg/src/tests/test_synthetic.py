import unittest
import sys
import os

# Add the project root so the `src` package resolves
sys.path.append(os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__)))))

import numpy as np

from src.ai_core.synthetic import (
    SyntheticSpec, difference_in_means, generate_plm, generate_plm_continuous, oracle_cate, propensity,
)
from src.utils.constants import AssignmentKind, ThetaKind
from src.utils.exceptions import DimensionMismatch, InvalidSpec


class TestOracleCate(unittest.TestCase):
    """Known effect functions"""

    def test_constant(self):
        spec = SyntheticSpec(d=3, theta_value=2.0)
        np.testing.assert_array_equal(oracle_cate(spec, np.zeros((4, 3))), np.full(4, 2.0))

    def test_linear_at_centre(self):
        spec = SyntheticSpec(d=2, theta_kind=ThetaKind.LINEAR, theta_coef=(2.0,), theta_intercept=1.0)
        self.assertEqual(oracle_cate(spec, [0.5, 0.0])[0], 2.0)

    def test_linear_named_point(self):
        spec = SyntheticSpec(d=3, theta_kind=ThetaKind.LINEAR, theta_coef=(2.0, 0.0, 0.0), theta_intercept=1.0)
        self.assertEqual(oracle_cate(spec, {"x0": 1.0, "x1": 5.0, "x2": -3.0})[0], 3.0)

    def test_step(self):
        spec = SyntheticSpec(d=2, n_uniform=0, theta_kind=ThetaKind.STEP, theta_value=2.0)
        np.testing.assert_array_equal(oracle_cate(spec, [[-0.1, 0.0], [0.1, 0.0], [0.0, 9.0]]),
                                      [0.0, 2.0, 0.0])

    def test_quadratic(self):
        spec = SyntheticSpec(d=1, theta_kind=ThetaKind.QUADRATIC, theta_quadratic=(1.0, -2.0, 3.0))
        self.assertEqual(oracle_cate(spec, [2.0])[0], 3.0)

    def test_wrong_width(self):
        with self.assertRaises(DimensionMismatch):
            oracle_cate(SyntheticSpec(d=3), [1.0, 2.0])


class TestGeneratePlm(unittest.TestCase):

    def test_shapes_and_oracle(self):
        spec = SyntheticSpec(n=200, d=4, seed=1)
        rows, oracle = generate_plm(spec)
        self.assertEqual(len(rows), 200)
        self.assertEqual(list(rows[0].features), ["x0", "x1", "x2", "x3"])
        self.assertEqual(oracle.ate, 2.0)
        self.assertTrue(all(r.treatment in (0, 1) for r in rows))
        self.assertEqual(rows[0].extras["true_cate"], 2.0)
        self.assertEqual(len({r.cell_id for r in rows}), 200)

    def test_uniform_and_normal_features(self):
        _, oracle = generate_plm(SyntheticSpec(n=500, d=4, seed=2))
        self.assertTrue(np.all((oracle.X[:, :2] >= 0) & (oracle.X[:, :2] <= 1)))
        self.assertLess(oracle.X[:, 2:].min(), 0.0)

    def test_propensities_inside_unit_interval(self):
        spec = SyntheticSpec(n=500, d=6, confounding=2.0, seed=3)
        _, oracle = generate_plm(spec)
        self.assertTrue(np.all((oracle.propensity > 0) & (oracle.propensity < 1)))

    def test_reproducible(self):
        spec = SyntheticSpec(n=100, d=3, seed=11)
        a, _ = generate_plm(spec)
        b, _ = generate_plm(spec)
        self.assertEqual([(r.outcome, r.treatment, r.features) for r in a],
                         [(r.outcome, r.treatment, r.features) for r in b])
        c, _ = generate_plm(SyntheticSpec(n=100, d=3, seed=12))
        self.assertNotEqual([r.outcome for r in a], [r.outcome for r in c])

    def test_deterministic_assignment(self):
        spec = SyntheticSpec(n=200, d=2, assignment=AssignmentKind.DETERMINISTIC, seed=0)
        rows, oracle = generate_plm(spec)
        x0 = oracle.X[:, 0]
        self.assertEqual([r.treatment for r in rows], (x0 > 0.5).astype(int).tolist())
        self.assertEqual(set(np.unique(propensity(spec, oracle.X)).tolist()), {0.0, 1.0})

    def test_confounding_biases_difference_in_means(self):
        spec = SyntheticSpec(n=4000, d=4, confounding=1.0, seed=5)
        rows, oracle = generate_plm(spec)
        naive, stderr = difference_in_means([r.outcome for r in rows], [r.treatment for r in rows])
        self.assertGreater(naive - oracle.ate, 1.0)
        self.assertGreater(stderr, 0.0)

    def test_no_confounding_no_bias(self):
        spec = SyntheticSpec(n=4000, d=4, confounding=0.0, seed=6)
        rows, oracle = generate_plm(spec)
        naive, stderr = difference_in_means([r.outcome for r in rows], [r.treatment for r in rows])
        self.assertLess(abs(naive - oracle.ate), 4 * stderr)

    def test_continuous_variant_leaves_treatment_unset(self):
        spec = SyntheticSpec(n=101, d=2, seed=4)
        rows, oracle = generate_plm_continuous(spec)
        self.assertTrue(all(r.treatment is None for r in rows))
        raw = np.array([r.treatment_raw for r in rows])
        self.assertEqual(int((raw > np.median(raw)).sum()), 50)
        self.assertEqual(oracle.ate, 2.0)

    def test_invalid_specs(self):
        with self.assertRaises(InvalidSpec):
            SyntheticSpec(n=5)
        with self.assertRaises(InvalidSpec):
            SyntheticSpec(d=2, theta_feature=2)
        with self.assertRaises(InvalidSpec):
            SyntheticSpec.from_dict({"n": 100, "unknown": 1})

    def test_dict_round_trip(self):
        spec = SyntheticSpec(n=50, d=3, theta_kind=ThetaKind.LINEAR, theta_coef=(1.0, 0.5), seed=8)
        self.assertEqual(SyntheticSpec.from_dict(spec.to_dict()), spec)


class TestDifferenceInMeans(unittest.TestCase):

    def test_simple_groups(self):
        estimate, stderr = difference_in_means([1.0, 3.0, 10.0, 12.0], [0, 0, 1, 1])
        self.assertEqual(estimate, 9.0)
        self.assertAlmostEqual(stderr, np.sqrt(2.0 / 2 + 2.0 / 2), places=12)

    def test_needs_both_groups(self):
        with self.assertRaises(InvalidSpec):
            difference_in_means([1.0, 2.0, 3.0], [1, 1, 0])


if __name__ == "__main__":
    unittest.main()
