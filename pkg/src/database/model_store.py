"""
Versioned JSON persistence for fitted models and reports
"""
import json
import math
import os
from typing import Any, Mapping

import numpy as np

from src.models.estimation_model import CateModel
from src.utils.exceptions import MissingArtifact
from src.utils.logger import logger


def to_jsonable(value: Any) -> Any:
    """Plain JSON values: numpy scalars and arrays unwrapped, NaN/inf written as null"""
    if isinstance(value, Mapping):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(value) if math.isfinite(value) else None
    return value


def save_json(data: Mapping[str, Any], path: str) -> str:
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(to_jsonable(data), f, sort_keys=True, indent=2, allow_nan=False)
        f.write("\n")
    return path


def load_json(path: str) -> Any:
    if not os.path.exists(path):
        raise MissingArtifact(f"artifact not found: {path}")
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)


def save_model(model: CateModel, path: str) -> str:
    save_json(model.to_dict(), path)
    logger.info(f"💾 Model saved: {path}")
    return path


def load_model(path: str) -> CateModel:
    """Raises MissingArtifact when no fitted model exists at `path`"""
    return CateModel.from_dict(load_json(path))
