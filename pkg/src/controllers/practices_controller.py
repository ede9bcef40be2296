"""
======================================================
🌾 Practices Controller
Causal Land Suitability Pipeline
Per-year practice table, temporal aggregation and treatment binarization.
======================================================
"""
from typing import List

from src.ai_core.aggregation import aggregate_temporal
from src.ai_core.practices import (
    aggregation_for, binarize_treatment, practice_records, treatment_series,
)
from src.database.panel_store import (
    practices_frame, read_panel, write_cross_section, write_frame,
)
from src.models.run_config_model import RunConfig, StageResult
from src.controllers.stage_support import begin_stage, finish_stage, require
from src.utils.constants import ArtifactNames, Stage
from src.utils.exceptions import Diagnostic, emit_diagnostics
from src.utils.logger import logger

SETTINGS = ("treatment", "major_crops")


def cmd_practices(run: RunConfig) -> StageResult:
    """panel.csv -> practices.csv + cross_section.csv (binarized treatment)"""
    run = run.validate(Stage.PRACTICES)
    started = begin_stage(run, Stage.PRACTICES)
    panel_path = require(run.path(ArtifactNames.PANEL), Stage.INGEST)

    panel = read_panel(panel_path)
    records = practice_records(panel)
    practices_path = write_frame(practices_frame(records), run.path(ArtifactNames.PRACTICES))

    diagnostics: List[Diagnostic] = []
    rows = aggregate_temporal(panel, treatment_series(records, run.treatment),
                              aggregation_for(run.treatment), run.major_crops, diagnostics)
    if diagnostics:
        emit_diagnostics(diagnostics)
        logger.log_diagnostics(diagnostics)

    assignments = binarize_treatment([r.treatment_raw for r in rows], [r.cell_id for r in rows])
    for row, assignment in zip(rows, assignments):
        row.treatment = assignment.treated
    n_treated = sum(a.treated for a in assignments)
    logger.info(f"🎚️  Treatment '{run.treatment.value}': {n_treated}/{len(rows)} cells treated")

    cross_path = write_cross_section(rows, run.path(ArtifactNames.CROSS_SECTION))
    return finish_stage(run, Stage.PRACTICES, started, SETTINGS, [panel_path],
                        [practices_path, cross_path],
                        {"n_cells": len(rows), "n_treated": n_treated,
                         "n_dropped": len(diagnostics)})
