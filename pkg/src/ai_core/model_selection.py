"""
============================================
🔍 Model Selection
Causal Land Suitability Pipeline
- Seeded k-fold (and stratified) partitions
- Grid search with k-fold CV, first-in-grid tie-breaking
- Family selection across several SearchSpecs
============================================
"""

import itertools
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from src.ai_core.boosting import GradientBoostingClassifier, GradientBoostingModel
from src.ai_core.forest import RandomForestClassifier, RandomForestRegressor
from src.ai_core.linear_models import LassoModel, LogisticRegressionModel
from src.ai_core.metrics import f1_score, r2_score
from src.ai_core.preprocessing import ScaledEstimator
from src.ai_core.tree import RegressionTree
from src.models.estimation_model import SearchSpec
from src.utils.constants import ModelFamily, Scoring
from src.utils.exceptions import EmptyData, InvalidSpec
from src.utils.logger import logger


# ============================================
# 🗂️ FOLDS
# ============================================
def kfold_indices(n: int, k: int, seed: int = 0) -> np.ndarray:
    """Fold id in [0, k) for each of n units; a function of (n, k, seed) only"""
    if k < 2 or n < k:
        raise InvalidSpec(f"cannot split {n} units into {k} folds")
    rng = np.random.default_rng(seed)
    fold_id = np.empty(n, dtype=int)
    fold_id[rng.permutation(n)] = np.arange(n) % k
    return fold_id


def stratified_kfold_indices(labels, k: int, seed: int = 0) -> np.ndarray:
    """Fold ids that spread every class evenly over the k folds"""
    labels = np.asarray(labels)
    n = labels.shape[0]
    if k < 2 or n < k:
        raise InvalidSpec(f"cannot split {n} units into {k} folds")
    rng = np.random.default_rng(seed)
    fold_id = np.empty(n, dtype=int)
    offset = 0
    for cls in np.unique(labels):
        members = np.nonzero(labels == cls)[0]
        members = members[rng.permutation(members.shape[0])]
        fold_id[members] = (offset + np.arange(members.shape[0])) % k
        offset += members.shape[0]
    return fold_id


def train_test_indices(n: int, test_fraction: float, seed: int = 0,
                       labels=None) -> tuple:
    """Seeded holdout split (stratified when labels are given)"""
    rng = np.random.default_rng(seed)
    if labels is None:
        order = rng.permutation(n)
        n_test = max(1, int(round(test_fraction * n)))
        return np.sort(order[n_test:]), np.sort(order[:n_test])
    labels = np.asarray(labels)
    test: List[np.ndarray] = []
    for cls in np.unique(labels):
        members = np.nonzero(labels == cls)[0]
        members = members[rng.permutation(members.shape[0])]
        test.append(members[:max(1, int(round(test_fraction * members.shape[0])))])
    test_idx = np.sort(np.concatenate(test))
    train_mask = np.ones(n, dtype=bool)
    train_mask[test_idx] = False
    return np.nonzero(train_mask)[0], test_idx


# ============================================
# 🏭 ESTIMATOR FACTORY
# ============================================
_SEEDED = {
    ModelFamily.RANDOM_FOREST, ModelFamily.RANDOM_FOREST_CLASSIFIER,
    ModelFamily.GRADIENT_BOOSTING, ModelFamily.GRADIENT_BOOSTING_CLASSIFIER,
}


def build_estimator(family: ModelFamily, params: Dict[str, Any], seed: int = 0,
                    n_jobs: int = 1, scale: bool = True):
    """Unfitted learner of `family`, wrapped with a per-fit MaxAbsScaler when `scale`"""
    params = dict(params)
    if family in _SEEDED:
        params.setdefault("seed", seed)
    if family is ModelFamily.RANDOM_FOREST:
        model = RandomForestRegressor(n_jobs=n_jobs, **params)
    elif family is ModelFamily.RANDOM_FOREST_CLASSIFIER:
        model = RandomForestClassifier(n_jobs=n_jobs, **params)
    elif family is ModelFamily.GRADIENT_BOOSTING:
        model = GradientBoostingModel(**params)
    elif family is ModelFamily.GRADIENT_BOOSTING_CLASSIFIER:
        model = GradientBoostingClassifier(**params)
    elif family is ModelFamily.LASSO:
        model = LassoModel(**params)
    elif family is ModelFamily.LOGISTIC:
        model = LogisticRegressionModel(**params)
    elif family is ModelFamily.REGRESSION_TREE:
        model = RegressionTree(**params)
    else:
        raise InvalidSpec(f"unknown model family {family}")
    return ScaledEstimator(model) if scale else model


_RESTORABLE = {cls.__name__: cls for cls in (
    RandomForestRegressor, RandomForestClassifier, GradientBoostingModel, GradientBoostingClassifier,
    LassoModel, LogisticRegressionModel, RegressionTree,
)}


def estimator_from_dict(data: Dict[str, Any]):
    """Fitted learner from its `to_dict` form, scaler wrapper included"""
    kind = data.get("type")
    if kind == "ScaledEstimator":
        return ScaledEstimator.from_dict(data, estimator_from_dict(data["estimator"]))
    if kind not in _RESTORABLE:
        raise InvalidSpec(f"unknown estimator type {kind!r}")
    return _RESTORABLE[kind].from_dict(data)


def score_predictions(scoring: Scoring, y, y_pred) -> float:
    if scoring is Scoring.F1:
        return f1_score(y, y_pred)
    return r2_score(y, y_pred)


def grid_points(grid: Dict[str, Sequence[Any]]) -> List[Dict[str, Any]]:
    """Cartesian product of the grid, in dict order (last key varies fastest)"""
    keys = list(grid.keys())
    return [dict(zip(keys, values)) for values in itertools.product(*(grid[k] for k in keys))]


# ============================================
# 🔎 GRID SEARCH
# ============================================
@dataclass
class GridSearchResult:
    family: ModelFamily
    best_params: Dict[str, Any]
    best_score: float
    best_model: Any
    cv_table: pd.DataFrame


def _cv_scores(X: np.ndarray, y: np.ndarray, fold_id: np.ndarray, spec: SearchSpec,
               params: Dict[str, Any], scale: bool) -> List[float]:
    scores = []
    for k in range(spec.k_folds):
        train, test = fold_id != k, fold_id == k
        model = build_estimator(spec.family, params, spec.seed, 1, scale)
        model.fit(X[train], y[train])
        scores.append(score_predictions(spec.scoring, y[test], model.predict(X[test])))
    return scores


def grid_search_cv(X, y, spec: SearchSpec, n_jobs: int = 1, scale: bool = True) -> GridSearchResult:
    """
    Mean out-of-fold score of every grid point; the best point is refit on
    all rows. Folds depend on spec.seed only; ties go to the earliest point.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or X.shape[0] == 0 or X.shape[0] != y.shape[0]:
        raise EmptyData(f"grid search needs matching non-empty X, y (got {X.shape}, {y.shape})")

    if spec.family.is_classifier:
        fold_id = stratified_kfold_indices(y, spec.k_folds, spec.seed)
    else:
        fold_id = kfold_indices(X.shape[0], spec.k_folds, spec.seed)

    points = grid_points(spec.grid)
    all_scores = Parallel(n_jobs=n_jobs)(
        delayed(_cv_scores)(X, y, fold_id, spec, params, scale) for params in points
    )

    rows = []
    for params, scores in zip(points, all_scores):
        row = {"family": spec.family.value, **{f"param_{k}": v for k, v in params.items()}}
        row.update({f"fold_{k}": s for k, s in enumerate(scores)})
        row["mean_score"] = float(np.mean(scores))
        rows.append(row)
    cv_table = pd.DataFrame(rows)

    best = int(np.argmax(cv_table["mean_score"].to_numpy()))
    best_params = points[best]
    best_model = build_estimator(spec.family, best_params, spec.seed, n_jobs, scale).fit(X, y)
    logger.debug(
        f"🔎 Grid search {spec.family.value}: {len(points)} points, "
        f"best {best_params} {spec.scoring.value}={cv_table['mean_score'].iloc[best]:.4f}"
    )
    return GridSearchResult(spec.family, best_params, float(cv_table["mean_score"].iloc[best]),
                            best_model, cv_table)


def select_nuisance_model(X, y, candidates: Sequence[SearchSpec], seed: int = 0,
                          n_jobs: int = 1, scale: bool = True) -> GridSearchResult:
    """
    Grid-search every candidate family and keep the best mean CV score.
    The earlier candidate wins ties. The returned cv_table stacks all families.
    """
    if not candidates:
        raise InvalidSpec("no candidate model families")
    best: Optional[GridSearchResult] = None
    tables = []
    for spec in candidates:
        result = grid_search_cv(X, y, spec.with_seed(seed), n_jobs=n_jobs, scale=scale)
        tables.append(result.cv_table)
        if best is None or result.best_score > best.best_score:
            best = result
    best.cv_table = pd.concat(tables, ignore_index=True)
    logger.info(f"🏆 Selected {best.family.value} {best.best_params} (CV score {best.best_score:.4f})")
    return best
