"""
============================================
✂️ Overlap
Causal Land Suitability Pipeline
Out-of-fold propensity scores and trimming of extreme units
============================================
"""

from typing import Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from joblib import Parallel, delayed

from config import config
from src.ai_core.model_selection import build_estimator, grid_search_cv, stratified_kfold_indices
from src.models.estimation_model import PropensityReport, SearchSpec
from src.utils.constants import Defaults, ModelFamily
from src.utils.exceptions import EmptyResult, InvalidSpec, SingleClass
from src.utils.logger import logger
from src.utils.math_helpers import clip_probabilities

PropensitySpec = Union[None, Mapping, SearchSpec]


def _fold_scores(X, T, fold_id, k, family, params, seed):
    train, test = fold_id != k, fold_id == k
    model = build_estimator(family, params, seed)
    model.fit(X[train], T[train])
    return test, model.predict_proba(X[test])


def estimate_propensity(X, T, k_folds: int = config.K_FOLDS, spec: PropensitySpec = None,
                        seed: int = 0, n_jobs: int = 1) -> np.ndarray:
    """
    Out-of-fold P(T=1 | X): each unit is scored by a model that never saw it.

    Args:
        spec: gradient-boosting classifier parameters, or a SearchSpec tuned
              here independently of the DML treatment model

    Raises:
        SingleClass: T has one class only
    """
    X = np.asarray(X, dtype=float)
    T = np.asarray(T, dtype=float)
    if np.unique(T).size < 2:
        raise SingleClass("propensity model needs treated and control units")

    if isinstance(spec, SearchSpec):
        if not spec.family.is_classifier:
            raise InvalidSpec(f"propensity model must be a classifier, got {spec.family.value}")
        tuned = grid_search_cv(X, T, spec.with_seed(seed), n_jobs=n_jobs)
        family, params = spec.family, tuned.best_params
    else:
        family = ModelFamily.GRADIENT_BOOSTING_CLASSIFIER
        params = dict(spec) if spec is not None else dict(Defaults.PROPENSITY_MODEL)

    fold_id = stratified_kfold_indices(T, k_folds, seed)
    parts = Parallel(n_jobs=n_jobs)(
        delayed(_fold_scores)(X, T, fold_id, k, family, params, seed) for k in range(k_folds)
    )
    scores = np.empty(X.shape[0], dtype=float)
    for test, proba in parts:
        scores[test] = proba
    scores = clip_probabilities(scores)
    logger.info(f"📈 Propensity ({family.value}): mean={scores.mean():.3f}, "
                f"min={scores.min():.3f}, max={scores.max():.3f}")
    return scores


def trim_overlap(scores, low: float = config.PROPENSITY_LOW, high: float = config.PROPENSITY_HIGH,
                 cell_ids: Optional[Sequence[str]] = None,
                 estimator: str = ModelFamily.GRADIENT_BOOSTING_CLASSIFIER.value
                 ) -> Tuple[np.ndarray, PropensityReport]:
    """
    Keep units with low < score < high (both bounds excluded).

    Raises:
        EmptyResult: no unit survives
    """
    if not 0.0 <= low < high <= 1.0:
        raise InvalidSpec(f"trim bounds must satisfy 0 <= low < high <= 1, got ({low}, {high})")
    scores = np.asarray(scores, dtype=float)
    kept = (scores > low) & (scores < high)
    ids = tuple(cell_ids) if cell_ids is not None else tuple(str(i) for i in range(scores.shape[0]))
    logger.log_trim(int(scores.shape[0]), int(kept.sum()), low, high)
    if not kept.any():
        raise EmptyResult(f"no unit has a propensity inside ({low}, {high})")
    report = PropensityReport(ids, scores, kept, low, high, estimator)
    return np.nonzero(kept)[0], report
