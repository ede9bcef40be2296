import unittest
import sys
import os

# Add the project root so the `src` package resolves
sys.path.append(os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__)))))

import io
import shutil
import tempfile
from contextlib import redirect_stderr

from src.ai_core.aggregation import aggregate_temporal, filter_cropland, select_major_crops
from src.database.panel_store import (
    PanelSchema, load_panel, panel_frame, practices_frame, read_cross_section, read_frame,
    read_practices, write_cross_section, write_frame,
)
from src.models.panel_model import CrossSection, GridCell, PanelDataset, PanelRecord
from src.models.practice_model import PracticeRecord
from src.utils.constants import AggregationKind, ExitCode
from src.utils.exceptions import DataError, DuplicateRecord, EmptyResult, MalformedNumber, MissingColumn

HEADER = "cell_id,year,outcome,abund_wheat,abund_maize,tmax,ppt\n"


def _panel(totals):
    """One cell per total abundance, two identical years each"""
    cells, records = [], []
    for i, total in enumerate(totals):
        cid = f"c{i}"
        cells.append(GridCell(cid, float(i), 0.0))
        for year in (2001, 2002):
            records.append(PanelRecord(cid, year, {"wheat": total}, {"tmax": 20.0}, 500.0))
    return PanelDataset(tuple(cells), tuple(records), (2001, 2002))


class TestLoadPanel(unittest.TestCase):
    """Panel CSV ingestion and row diagnostics"""

    def setUp(self):
        self.tmp = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.tmp, ignore_errors=True)

    def _write(self, body: str) -> str:
        path = os.path.join(self.tmp, "panel.csv")
        with open(path, "w", encoding="utf-8") as f:
            f.write(HEADER + body)
        return path

    def test_valid_panel(self):
        path = self._write("a,2001,600,0.5,0.4,21.0,300\n"
                           "a,2002,700,0.6,0.3,22.0,310\n"
                           "b,2001,500,0.9,0.0,19.5,280\n")
        panel = load_panel(path)
        self.assertEqual(len(panel.records), 3)
        self.assertEqual(panel.cell_ids, ["a", "b"])
        self.assertEqual(panel.study_years, (2001, 2002))
        self.assertEqual(sorted(panel.environment_names()), ["ppt", "tmax"])
        self.assertEqual(panel.records[0].abundances, {"wheat": 0.5, "maize": 0.4})

    def test_abundance_above_one_is_rejected(self):
        path = self._write("a,2001,600,0.5,0.4,21.0,300\n"
                           "a,2002,700,1.2,0.0,22.0,310\n")
        with redirect_stderr(io.StringIO()) as err:
            with self.assertRaises(MalformedNumber) as ctx:
                load_panel(path)
        self.assertEqual(len(ctx.exception.diagnostics), 1)
        self.assertEqual(ctx.exception.diagnostics[0].row, 2)
        self.assertIn("row=2 code=MALFORMED_NUMBER", err.getvalue())

    def test_abundance_sum_above_one_is_rejected(self):
        path = self._write("a,2001,600,0.7,0.6,21.0,300\n")
        with redirect_stderr(io.StringIO()):
            with self.assertRaises(MalformedNumber) as ctx:
                load_panel(path)
        self.assertEqual(ctx.exception.diagnostics[0].row, 1)

    def test_lenient_mode_drops_bad_rows(self):
        path = self._write("a,2001,600,0.5,0.4,21.0,300\n"
                           "a,2002,700,abc,0.0,22.0,310\n"
                           "b,2001,500,0.9,0.0,,280\n")
        with redirect_stderr(io.StringIO()) as err:
            panel = load_panel(path, strict=False)
        self.assertEqual(len(panel.records), 1)
        lines = [l for l in err.getvalue().splitlines() if l.startswith("row=")]
        self.assertEqual([line.split()[0] for line in lines], ["row=2", "row=3"])

    def test_duplicate_record(self):
        path = self._write("a,2001,600,0.5,0.4,21.0,300\n"
                           "a,2001,610,0.5,0.4,21.0,300\n")
        with self.assertRaises(DuplicateRecord):
            load_panel(path)

    def test_missing_column(self):
        path = self._write("a,2001,600,0.5,0.4,21.0,300\n")
        schema = PanelSchema(abundances={"wheat": "abund_wheat"}, environment={"srad": "srad"})
        with self.assertRaises(MissingColumn):
            load_panel(path, schema=schema)

    def test_study_period_skips_rows(self):
        path = self._write("a,2000,600,0.5,0.4,21.0,300\n"
                           "a,2001,600,0.5,0.4,21.0,300\n"
                           "a,2002,700,0.6,0.3,22.0,310\n")
        panel = load_panel(path, study_period=(2001, 2002))
        self.assertEqual(panel.study_years, (2001, 2002))
        self.assertEqual(len(panel.records), 2)

    def test_missing_outcome_is_kept_as_none(self):
        path = self._write("a,2001,,0.5,0.4,21.0,300\n")
        panel = load_panel(path)
        self.assertFalse(panel.records[0].has_outcome)

    def test_panel_frame_round_trip(self):
        path = self._write("a,2001,600,0.5,0.4,21.0,300\n"
                           "a,2002,700,0.6,0.3,22.0,310\n")
        panel = load_panel(path)
        out = write_frame(panel_frame(panel), os.path.join(self.tmp, "out", "panel.csv"))
        again = load_panel(out)
        self.assertEqual([r.abundances for r in again.records], [r.abundances for r in panel.records])
        self.assertEqual([r.outcome for r in again.records], [600.0, 700.0])


class TestGridCell(unittest.TestCase):

    def test_bounds_and_area(self):
        cell = GridCell("g", 10.0, 20.0, 4.0)
        self.assertEqual(cell.bounds, (8.0, 18.0, 12.0, 22.0))
        self.assertEqual(cell.area, 16.0)

    def test_non_positive_size_is_a_data_error(self):
        for size in (0.0, -5.0, float("nan")):
            with self.assertRaises(DataError) as ctx:
                GridCell("g", 0.0, 0.0, size)
            self.assertEqual(ctx.exception.exit_code, ExitCode.DATA_ERROR)


class TestCroplandFilter(unittest.TestCase):

    def test_threshold_is_inclusive(self):
        kept = filter_cropland(_panel([0.79, 0.80, 0.81, 0.0]), 0.8)
        self.assertEqual(kept.cell_ids, ["c1", "c2"])
        self.assertEqual(len(kept.records), 4)

    def test_nothing_survives(self):
        with self.assertRaises(EmptyResult):
            filter_cropland(_panel([0.1, 0.2]), 0.8)


class TestTemporalAggregation(unittest.TestCase):

    def setUp(self):
        cells = (GridCell("a", 10.0, 20.0), GridCell("b", 11.0, 20.0))
        records = (
            PanelRecord("a", 2001, {"wheat": 0.5, "rye": 0.0}, {"tmax": 20.0}, 600.0),
            PanelRecord("a", 2002, {"wheat": 0.7, "rye": 0.0}, {"tmax": 22.0}, 700.0),
            PanelRecord("b", 2001, {"wheat": 0.9, "rye": 0.01}, {"tmax": 18.0}, 500.0),
            PanelRecord("b", 2002, {"wheat": 0.9, "rye": 0.0}, {"tmax": 18.0}, 520.0),
        )
        self.panel = PanelDataset(cells, records, (2001, 2002))
        self.series = {"a": {2001: 0.5, 2002: 0.7}, "b": {2001: 0.6, 2002: 0.4}}

    def test_major_crops_by_median(self):
        self.assertEqual(select_major_crops(self.panel, 0.02), ["wheat"])

    def test_sum_and_mean(self):
        rows = aggregate_temporal(self.panel, self.series, AggregationKind.SUM, ["wheat"])
        by_id = {r.cell_id: r for r in rows}
        self.assertEqual(by_id["a"].outcome, 650.0)
        self.assertAlmostEqual(by_id["a"].features["wheat"], 0.6, places=12)
        self.assertEqual(by_id["a"].features["tmax"], 21.0)
        self.assertEqual(by_id["b"].treatment_raw, 1.0)
        self.assertEqual((by_id["a"].centroid_lon, by_id["a"].centroid_lat), (10.0, 20.0))

        rows = aggregate_temporal(self.panel, self.series, AggregationKind.MEAN, ["wheat"])
        self.assertAlmostEqual(rows[0].treatment_raw, 0.6, places=12)
        self.assertIsNone(rows[0].treatment)

    def test_missing_outcome_drops_cell(self):
        records = list(self.panel.records)
        records[3] = PanelRecord("b", 2002, {"wheat": 0.9}, {"tmax": 18.0}, None)
        panel = PanelDataset(self.panel.cells, tuple(records), (2001, 2002))
        diagnostics = []
        rows = aggregate_temporal(panel, self.series, AggregationKind.SUM, ["wheat"], diagnostics)
        self.assertEqual([r.cell_id for r in rows], ["a"])
        self.assertEqual([d.code for d in diagnostics], ["MISSING_OUTCOME"])
        self.assertEqual(diagnostics[0].row, 2)

    def test_missing_outcome_rows_are_one_based(self):
        records = list(self.panel.records)
        records[0] = PanelRecord("a", 2001, {"wheat": 0.5}, {"tmax": 20.0}, None)
        panel = PanelDataset(self.panel.cells, tuple(records), (2001, 2002))
        diagnostics = []
        aggregate_temporal(panel, self.series, AggregationKind.SUM, ["wheat"], diagnostics)
        self.assertEqual(diagnostics[0].row, 1)
        self.assertTrue(diagnostics[0].format().startswith("row=1 code=MISSING_OUTCOME"))


class TestCrossSectionStore(unittest.TestCase):

    def setUp(self):
        self.tmp = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.tmp, ignore_errors=True)

    def test_write_and_read(self):
        rows = [CrossSection("007", {"tmax": 20.5, "wheat": 0.25}, 1.5, 600.0, 1, 3.0, 4.0),
                CrossSection("008", {"tmax": 19.0, "wheat": 0.75}, 0.5, 550.0, 0, 3.5, 4.0)]
        path = write_cross_section(rows, os.path.join(self.tmp, "cross_section.csv"))
        again = read_cross_section(path)
        self.assertEqual([r.cell_id for r in again], ["007", "008"])
        self.assertEqual(again[0].features, {"tmax": 20.5, "wheat": 0.25})
        self.assertEqual([r.treatment for r in again], [1, 0])
        self.assertEqual(read_frame(path)["cell_id"].tolist(), ["007", "008"])

    def test_practices_sorted_and_first_year_blank(self):
        records = [PracticeRecord("b", 2011, 0.5, 0.2), PracticeRecord("a", 2011, 0.0, 1.0),
                   PracticeRecord("a", 2010, 0.69, None)]
        path = write_frame(practices_frame(records), os.path.join(self.tmp, "practices.csv"))
        again = read_practices(path)
        self.assertEqual([(r.cell_id, r.year) for r in again], [("a", 2010), ("a", 2011), ("b", 2011)])
        self.assertIsNone(again[0].rotation_delta)
        self.assertEqual(again[1].rotation_delta, 1.0)


if __name__ == "__main__":
    unittest.main()
