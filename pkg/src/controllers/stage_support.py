"""
Helpers shared by the stage controllers: manifest + timing bookkeeping
"""
import os
import time
from typing import Any, Dict, Optional, Sequence

import numpy as np

from src.database.manifest import write_manifest
from src.database.model_store import load_model
from src.database.panel_store import read_cross_section, read_frame
from src.models.run_config_model import RunConfig, StageResult
from src.utils.constants import ArtifactNames, Stage
from src.utils.exceptions import MissingArtifact
from src.utils.logger import logger


def begin_stage(run: RunConfig, stage: Stage) -> float:
    os.makedirs(run.out_dir, exist_ok=True)
    logger.log_stage_start(stage.value, run.seed)
    return time.perf_counter()


def finish_stage(run: RunConfig, stage: Stage, started: float, settings_keys: Sequence[str],
                 inputs: Sequence[str], artifacts: Sequence[str],
                 summary: Optional[Dict[str, Any]] = None) -> StageResult:
    manifest = write_manifest(run.out_dir, stage, run.stage_settings(settings_keys), run.seed,
                              inputs, artifacts)
    logger.log_stage_end(stage.value, len(artifacts), time.perf_counter() - started)
    return StageResult(stage, list(artifacts), manifest, summary or {})


def require(path: str, producer: Stage) -> str:
    """Upstream artifact must exist; names the stage that creates it"""
    if not os.path.exists(path):
        raise MissingArtifact(f"{os.path.basename(path)} not found in {os.path.dirname(path) or '.'}; "
                              f"run '{producer.value}' first")
    return path


def estimated_units(run: RunConfig):
    """
    Units that reached the final stage, in cates.csv order.

    Returns:
        (model, rows, X, cates) with X ordered by the model's feature names
    """

    model = load_model(require(run.path(ArtifactNames.MODEL), Stage.FIT))
    cates = read_frame(require(run.path(ArtifactNames.CATES), Stage.FIT))
    rows = {r.cell_id: r for r in read_cross_section(
        require(run.path(ArtifactNames.CROSS_SECTION), Stage.PRACTICES))}
    ids = cates["cell_id"].astype(str).tolist()
    missing = [cid for cid in ids if cid not in rows]
    if missing:
        raise MissingArtifact(f"{len(missing)} estimated cells are absent from the cross-section")
    units = [rows[cid] for cid in ids]
    X = np.array([[r.features[n] for n in model.feature_names] for r in units], dtype=float)
    return model, units, X, cates["cate"].to_numpy(dtype=float)
