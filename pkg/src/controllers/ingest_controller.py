"""
======================================================
📥 Ingest Controller
Causal Land Suitability Pipeline
Panel validation, optional parcel gridding and the cropland filter.
======================================================
"""
from dataclasses import replace
from typing import Dict, List

import pandas as pd

from src.ai_core.aggregation import filter_cropland
from src.ai_core.practices import grid_abundances
from src.database.geojson_store import load_parcels
from src.database.panel_store import (
    PanelSchema, abundance_frame, load_panel, panel_frame, read_grid, write_frame,
)
from src.models.panel_model import PanelDataset
from src.models.run_config_model import RunConfig, StageResult
from src.controllers.stage_support import begin_stage, finish_stage
from src.utils.constants import ArtifactNames, Stage
from src.utils.logger import logger

SETTINGS = ("schema", "strict", "study_period", "cropland_threshold")


def _with_parcel_abundances(panel: PanelDataset, year_maps: Dict[int, Dict[str, Dict[str, float]]]
                            ) -> PanelDataset:
    """Replace declared abundances by the gridded ones wherever a cell was gridded"""
    records = []
    for rec in panel.records:
        gridded = year_maps.get(rec.year, {}).get(rec.cell_id)
        records.append(rec if gridded is None else replace(rec, abundances=dict(gridded)))
    return replace(panel, records=tuple(records))


def cmd_ingest(run: RunConfig) -> StageResult:
    """
    Validate the panel, grid parcels (when given) and keep cropland cells.

    Writes panel.csv and, with parcels, abundances.csv.
    """
    run = run.validate(Stage.INGEST)
    started = begin_stage(run, Stage.INGEST)

    columns = list(pd.read_csv(run.panel_path, nrows=0).columns)
    schema = PanelSchema.from_dict(run.schema, columns)
    panel = load_panel(run.panel_path, schema, run.study_period, run.strict)

    inputs: List[str] = [run.panel_path]
    artifacts: List[str] = []
    if run.parcels_path:
        parcels = load_parcels(run.parcels_path)
        grid = read_grid(run.grid_path) if run.grid_path else list(panel.cells)
        inputs += [p for p in (run.parcels_path, run.grid_path) if p]
        year_maps = {year: grid_abundances(parcels, grid, year) for year in panel.study_years}
        artifacts.append(write_frame(abundance_frame(year_maps), run.path(ArtifactNames.ABUNDANCES)))
        panel = _with_parcel_abundances(panel, year_maps)

    kept = filter_cropland(panel, run.cropland_threshold)
    artifacts.insert(0, write_frame(panel_frame(kept), run.path(ArtifactNames.PANEL)))
    logger.info(f"🌾 Cropland cells: {len(kept.cells)}/{len(panel.cells)}")

    return finish_stage(run, Stage.INGEST, started, SETTINGS, inputs, artifacts,
                        {"n_cells": len(kept.cells), "n_cells_in": len(panel.cells),
                         "years": list(kept.study_years)})
