"""
======================================================
🎯 Fit Controller
Causal Land Suitability Pipeline
Overlap trimming, cross-fitted nuisances and the final CATE stage.
======================================================
"""
from dataclasses import replace
from typing import Any, Dict, List, Optional, Union

import pandas as pd

from src.ai_core.causal_forest import CausalForestSpec
from src.ai_core.dml import fit_dml
from src.ai_core.overlap import estimate_propensity, trim_overlap
from src.ai_core.practices import binarize_treatment
from src.database.model_store import save_json, save_model
from src.database.panel_store import read_cross_section, write_frame
from src.models.estimation_model import NuisanceSpec, SearchSpec
from src.models.panel_model import CrossSection, cross_section_arrays
from src.models.run_config_model import RunConfig, StageResult
from src.controllers.stage_support import begin_stage, finish_stage, require
from src.utils.constants import ArtifactNames, FinalStageKind, ModelFamily, Stage
from src.utils.exceptions import ConfigError
from src.utils.logger import logger

SETTINGS = ("trim_low", "trim_high", "k_folds", "propensity", "nuisance", "final_stage",
            "cate_basis", "forest", "forest_grid", "min_units")


def _propensity_spec(run: RunConfig) -> Union[None, Dict[str, Any], SearchSpec]:
    """A `family` key means a tuned SearchSpec, otherwise boosting parameters"""
    if not run.propensity:
        return None
    if "family" in run.propensity:
        return SearchSpec.from_dict({"k_folds": run.k_folds, **run.propensity})
    return dict(run.propensity)


def _nuisance_spec(run: RunConfig) -> NuisanceSpec:
    return NuisanceSpec.from_dict({"k_folds": run.k_folds, **(run.nuisance or {})})


def _forest_spec(run: RunConfig) -> Optional[CausalForestSpec]:
    if run.final_stage is not FinalStageKind.CAUSAL_FOREST:
        return None
    try:
        spec = CausalForestSpec.from_dict(run.forest or {})
    except TypeError as e:
        raise ConfigError(f"bad forest spec: {e}")
    return replace(spec, seed=int(run.seed), n_jobs=run.threads)


def _ensure_binarized(rows: List[CrossSection]) -> None:
    if all(r.treatment is not None for r in rows):
        return
    logger.info("🎚️  Treatment not binarized yet; splitting at the median")
    for row, a in zip(rows, binarize_treatment([r.treatment_raw for r in rows],
                                               [r.cell_id for r in rows])):
        row.treatment = a.treated


def cmd_fit(run: RunConfig) -> StageResult:
    """
    cross_section.csv -> propensity.csv, cate_model.json, first_stage.json, cates.csv

    Only units inside the overlap band reach the DML estimator.
    """
    run = run.validate(Stage.FIT)
    started = begin_stage(run, Stage.FIT)
    cross_path = require(run.path(ArtifactNames.CROSS_SECTION), Stage.PRACTICES)

    rows = read_cross_section(cross_path)
    _ensure_binarized(rows)
    cell_ids, _, X, _, T, _ = cross_section_arrays(rows)

    prop_spec = _propensity_spec(run)
    estimator = prop_spec.family.value if isinstance(prop_spec, SearchSpec) \
        else ModelFamily.GRADIENT_BOOSTING_CLASSIFIER.value
    scores = estimate_propensity(X, T, run.k_folds, prop_spec, int(run.seed), run.threads)
    kept_idx, report = trim_overlap(scores, run.trim_low, run.trim_high, cell_ids, estimator)
    propensity_path = write_frame(report.to_frame(), run.path(ArtifactNames.PROPENSITY))

    kept_rows = [rows[i] for i in kept_idx]
    model = fit_dml(
        kept_rows,
        nuisance=_nuisance_spec(run),
        final_stage=run.final_stage,
        seed=int(run.seed),
        forest_spec=_forest_spec(run),
        forest_grid=run.forest_grid,
        min_units=run.min_units,
        n_jobs=run.threads,
        basis=run.cate_basis,
    )
    model.meta["treatment"] = run.treatment.value
    model.meta["n_trimmed"] = int(len(rows) - len(kept_rows))

    model_path = save_model(model, run.path(ArtifactNames.MODEL))
    first_stage_path = save_json(model.first_stage.to_dict() if model.first_stage else {},
                                 run.path(ArtifactNames.FIRST_STAGE))

    kept_ids, _, X_kept, _, T_kept, _ = cross_section_arrays(kept_rows)
    cates = pd.DataFrame({"cell_id": kept_ids, "cate": model.predict_cate(X_kept),
                          "treated": T_kept.astype(int), "propensity": scores[kept_idx]})
    cates_path = write_frame(cates, run.path(ArtifactNames.CATES))

    return finish_stage(run, Stage.FIT, started, SETTINGS, [cross_path],
                        [propensity_path, model_path, first_stage_path, cates_path],
                        {"ate": model.ate, "ate_ci": list(model.ate_ci),
                         "n_units": model.n_units, "n_trimmed": model.meta["n_trimmed"]})
