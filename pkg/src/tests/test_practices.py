import unittest
import sys
import os

# Add the project root so the `src` package resolves
sys.path.append(os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__)))))

import math

from shapely.geometry import Polygon, box

from src.ai_core.geometry import parcel_rectangle_area, validate_parcel
from src.ai_core.practices import (
    aggregation_for, binarize_treatment, crop_rotation, grid_abundances, practice_records,
    rotation_delta, shannon_diversity, treatment_series,
)
from src.models.panel_model import GridCell, PanelDataset, PanelRecord
from src.models.practice_model import Parcel
from src.utils.constants import AggregationKind, TreatmentKind
from src.utils.exceptions import (
    AllZero, ConstantTreatment, DegeneratePolygon, NonSimplePolygon, TooFewYears,
)


def _square(x0, y0, x1, y1):
    return ((x0, y0), (x1, y0), (x1, y1), (x0, y1))


class TestGridAbundances(unittest.TestCase):
    """Crop coverage fractions of square grid cells"""

    def setUp(self):
        self.cell = GridCell("c1", 0.0, 0.0, 10.0)   # bounds (-5, -5, 5, 5)

    def test_full_cover(self):
        parcel = Parcel("p1", _square(-10, -10, 10, 10), "wheat", 2010)
        result = grid_abundances([parcel], [self.cell], 2010)
        self.assertAlmostEqual(result["c1"]["wheat"], 1.0, places=12)

    def test_two_halves(self):
        parcels = [Parcel("p1", _square(-5, -5, 0, 5), "wheat", 2010),
                   Parcel("p2", _square(0, -5, 5, 5), "maize", 2010)]
        result = grid_abundances(parcels, [self.cell], 2010)
        self.assertAlmostEqual(result["c1"]["wheat"], 0.5, places=12)
        self.assertAlmostEqual(result["c1"]["maize"], 0.5, places=12)

    def test_other_year_ignored(self):
        parcel = Parcel("p1", _square(-10, -10, 10, 10), "wheat", 2011)
        self.assertEqual(grid_abundances([parcel], [self.cell], 2010), {"c1": {}})

    def test_triangle_matches_shapely_intersection(self):
        ring = ((-8.0, -3.0), (4.0, -7.0), (1.0, 9.0))
        parcel = Parcel("t", ring, "barley", 2010)
        expected = Polygon(ring).intersection(box(-5, -5, 5, 5)).area / 100.0
        result = grid_abundances([parcel], [self.cell], 2010)
        self.assertAlmostEqual(result["c1"]["barley"], expected, places=9)

    def test_hole_is_subtracted(self):
        parcel = Parcel("p1", _square(-10, -10, 10, 10), "wheat", 2010,
                        holes=(_square(-2, -2, 2, 2),))
        area = parcel_rectangle_area(parcel, self.cell.bounds)
        self.assertAlmostEqual(area, 100.0 - 16.0, places=9)

    def test_overlapping_parcels_rescaled(self):
        parcels = [Parcel("p1", _square(-5, -5, 5, 5), "wheat", 2010),
                   Parcel("p2", _square(-5, -5, 5, 5), "maize", 2010)]
        result = grid_abundances(parcels, [self.cell], 2010)
        self.assertAlmostEqual(sum(result["c1"].values()), 1.0, places=12)

    def test_degenerate_polygons(self):
        with self.assertRaises(DegeneratePolygon):
            validate_parcel(Parcel("d", ((0, 0), (1, 1)), "wheat", 2010))
        with self.assertRaises(DegeneratePolygon):
            validate_parcel(Parcel("d", ((0, 0), (1, 1), (2, 2)), "wheat", 2010))

    def test_self_intersecting_polygon(self):
        """Bow-tie with non-zero shoelace area"""
        with self.assertRaises(NonSimplePolygon):
            validate_parcel(Parcel("b", ((0, 0), (4, 4), (4, 0), (0, 2)), "wheat", 2010))


class TestPracticeMetrics(unittest.TestCase):

    def test_single_crop_has_zero_diversity(self):
        self.assertEqual(shannon_diversity({"wheat": 1.0}), 0.0)

    def test_even_split_is_ln2(self):
        self.assertAlmostEqual(shannon_diversity({"a": 0.5, "b": 0.5}), math.log(2), delta=1e-9)

    def test_three_crops(self):
        self.assertAlmostEqual(shannon_diversity({"a": 0.7, "b": 0.2, "c": 0.1}), 0.801819, delta=1e-6)

    def test_diversity_ignores_scale(self):
        self.assertAlmostEqual(shannon_diversity({"a": 0.35, "b": 0.35}), math.log(2), delta=1e-12)

    def test_all_zero(self):
        with self.assertRaises(AllZero):
            shannon_diversity({"a": 0.0, "b": 0.0})

    def test_rotation_delta(self):
        self.assertAlmostEqual(rotation_delta({"a": 0.5, "b": 0.5}, {"a": 0.2, "b": 0.8}), 0.6, places=12)

    def test_rotation_full_switch_twice(self):
        series = [{"a": 1.0}, {"b": 1.0}, {"a": 1.0}]
        self.assertEqual(crop_rotation(series), 4.0)

    def test_rotation_identical_years(self):
        self.assertEqual(crop_rotation([{"a": 0.4, "b": 0.3}] * 3), 0.0)

    def test_rotation_needs_two_years(self):
        with self.assertRaises(TooFewYears):
            crop_rotation([{"a": 1.0}])


class TestBinarization(unittest.TestCase):

    def test_even_count(self):
        result = binarize_treatment([1, 2, 3, 4])
        self.assertEqual([a.treated for a in result], [0, 0, 1, 1])

    def test_ties_at_median_stay_control(self):
        result = binarize_treatment([1, 2, 2, 9], ["a", "b", "c", "d"])
        self.assertEqual([a.treated for a in result], [0, 0, 0, 1])
        self.assertEqual([a.cell_id for a in result], ["a", "b", "c", "d"])
        self.assertEqual(result[3].treatment_raw, 9.0)

    def test_constant_treatment(self):
        with self.assertRaises(ConstantTreatment):
            binarize_treatment([5, 5, 5])


class TestPracticeRecords(unittest.TestCase):

    def setUp(self):
        cells = (GridCell("a", 0.0, 0.0), GridCell("b", 500.0, 0.0))
        records = (
            PanelRecord("a", 2001, {"wheat": 1.0}, {"ndvi": 0.5}, 600.0),
            PanelRecord("a", 2002, {"maize": 1.0}, {"ndvi": 0.6}, 700.0),
            PanelRecord("b", 2002, {"wheat": 0.5, "maize": 0.5}, {"ndvi": 0.3}, 500.0),
            PanelRecord("b", 2001, {}, {"ndvi": 0.2}, 400.0),
        )
        self.panel = PanelDataset(cells, records, (2001, 2002))

    def test_records_per_cell_year(self):
        records = practice_records(self.panel)
        self.assertEqual([(r.cell_id, r.year) for r in records],
                         [("a", 2001), ("a", 2002), ("b", 2001), ("b", 2002)])
        self.assertIsNone(records[0].rotation_delta)
        self.assertEqual(records[1].rotation_delta, 2.0)
        self.assertEqual(records[2].shannon_H, 0.0)     # empty landscape
        self.assertAlmostEqual(records[3].shannon_H, math.log(2), delta=1e-12)

    def test_rotation_series_skips_first_year(self):
        series = treatment_series(practice_records(self.panel), TreatmentKind.CROP_ROTATION)
        self.assertEqual(series["a"], {2002: 2.0})
        self.assertEqual(series["b"], {2002: 1.0})

    def test_diversity_series_keeps_every_year(self):
        series = treatment_series(practice_records(self.panel), TreatmentKind.LANDSCAPE_CROP_DIVERSITY)
        self.assertEqual(sorted(series["a"]), [2001, 2002])

    def test_aggregation_kind(self):
        self.assertIs(aggregation_for(TreatmentKind.CROP_ROTATION), AggregationKind.SUM)
        self.assertIs(aggregation_for(TreatmentKind.LANDSCAPE_CROP_DIVERSITY), AggregationKind.MEAN)


if __name__ == "__main__":
    unittest.main()
