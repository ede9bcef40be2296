"""
======================================================
📊 Report Controller
Causal Land Suitability Pipeline
Suitability map, CATE distribution, Spearman table, optional
counterfactual shift and the run summary.
======================================================
"""
import os
from typing import List

import numpy as np
import pandas as pd

from src.ai_core.analysis import (
    ShiftSpec, build_suitability_map, build_summary, cate_feature_pairs, cate_histogram,
    counterfactual_shift, export_map, histogram_frame, spearman_table,
)
from src.database.model_store import save_json
from src.database.panel_store import read_frame, write_frame
from src.models.estimation_model import PropensityReport
from src.models.run_config_model import RunConfig, StageResult
from src.controllers.stage_support import begin_stage, estimated_units, finish_stage
from src.utils.constants import ArtifactNames, Stage

SETTINGS = ("histogram_bins", "pair_features", "shift", "trim_low", "trim_high")


def _propensity_report(run: RunConfig):
    path = run.path(ArtifactNames.PROPENSITY)
    if not os.path.exists(path):
        return None
    frame = read_frame(path)
    return PropensityReport(tuple(frame["cell_id"].astype(str)), frame["score"].to_numpy(dtype=float),
                            frame["kept"].to_numpy(dtype=int).astype(bool), run.trim_low, run.trim_high)


def cmd_report(run: RunConfig) -> StageResult:
    """
    Raises:
        MissingArtifact: `fit` has not produced a model in the output directory
    """
    run = run.validate(Stage.REPORT)
    started = begin_stage(run, Stage.REPORT)
    model, units, X, cates = estimated_units(run)
    features = pd.DataFrame(X, columns=model.feature_names)
    artifacts: List[str] = []

    suitability = build_suitability_map(units, cates)
    artifacts += export_map(suitability, os.path.splitext(run.path(ArtifactNames.MAP_CSV))[0])

    edges, counts = cate_histogram(cates, run.histogram_bins)
    artifacts.append(write_frame(histogram_frame(edges, counts), run.path(ArtifactNames.HISTOGRAM)))

    spearman_df = spearman_table(features, cates)
    artifacts.append(write_frame(spearman_df, run.path(ArtifactNames.SPEARMAN)))

    pairs = cate_feature_pairs(features, cates, run.pair_features)
    artifacts.append(write_frame(pairs, run.path(ArtifactNames.FEATURE_PAIRS)))

    summary = build_summary(model, cates, spearman_df, _propensity_report(run), run.treatment.value)
    if run.shift:
        shifted = counterfactual_shift(model, features, ShiftSpec(dict(run.shift)))
        artifacts.append(write_frame(shifted.to_frame([u.cell_id for u in units]),
                                     run.path(ArtifactNames.SHIFT)))
        summary["shift"] = {"deltas": dict(run.shift), "mean_change": shifted.mean_change,
                            "flagged_fraction": shifted.flagged_fraction,
                            "extrapolation_warning": shifted.extrapolation_warning}
    summary["n_treated"] = int(np.sum([u.treatment == 1 for u in units]))
    artifacts.append(save_json(summary, run.path(ArtifactNames.SUMMARY)))

    return finish_stage(run, Stage.REPORT, started, SETTINGS,
                        [run.path(ArtifactNames.MODEL), run.path(ArtifactNames.CATES)],
                        artifacts, {"ate": model.ate, "n_units": len(units)})
