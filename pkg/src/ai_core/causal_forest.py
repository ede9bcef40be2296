"""
============================================
🌲 Causal Forest
Causal Land Suitability Pipeline
- Honest causal trees over residualized data (Ỹ, T̃)
- Heterogeneity split score Σ_child n_child · τ̂²_child
- Forest CATE = mean of the per-tree leaf effects
- Held-out tuning on the residual objective mean((Ỹ - θ̂(X)·T̃)²)
============================================
"""

from dataclasses import asdict, dataclass, replace
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from config import config
from src.ai_core.model_selection import grid_points, train_test_indices
from src.ai_core.tree import (
    MaxFeatures, NodeState, TreeArrays, candidate_features, grow_tree, resolve_max_features,
)
from src.models.estimation_model import ResidualizedData
from src.utils.constants import Thresholds
from src.utils.exceptions import (
    DegenerateResiduals, DimensionMismatch, EmptyData, InvalidSpec, UnknownFeature,
)
from src.utils.logger import logger


@dataclass(frozen=True)
class CausalForestSpec:
    """Causal forest hyperparameters (min_samples_leaf applies to both honesty halves)"""
    n_trees: int = config.CAUSAL_FOREST_TREES
    subsample_fraction: float = config.CAUSAL_FOREST_SUBSAMPLE
    min_samples_leaf: int = config.CAUSAL_FOREST_MIN_LEAF
    max_depth: Optional[int] = None
    max_features: MaxFeatures = None
    honest: bool = True
    seed: int = 0
    n_jobs: int = 1

    def __post_init__(self):
        if self.n_trees < 1:
            raise InvalidSpec("n_trees must be >= 1")
        if not 0.0 < self.subsample_fraction <= 1.0:
            raise InvalidSpec(f"subsample_fraction must be in (0, 1], got {self.subsample_fraction}")
        if self.min_samples_leaf < 1:
            raise InvalidSpec("min_samples_leaf must be >= 1")

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data.pop("n_jobs")
        return data

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "CausalForestSpec":
        return cls(**dict(data))


def leaf_effect(y_res: np.ndarray, t_res: np.ndarray) -> float:
    """τ̂ = Σ T̃Ỹ / Σ T̃² (the intercept-only residual regression)"""
    denom = float(np.dot(t_res, t_res))
    if denom < Thresholds.LEAF_WEIGHT_MIN:
        return 0.0
    return float(np.dot(t_res, y_res)) / denom


def best_heterogeneity_split(X: np.ndarray, y_res: np.ndarray, t_res: np.ndarray,
                             struct_idx: np.ndarray, est_idx: np.ndarray,
                             features: Sequence[int], min_leaf: int
                             ) -> Optional[Tuple[int, float, float]]:
    """
    Best split of a node by Σ_child n_child·τ̂²_child on the structure half.

    Admissible splits leave >= min_leaf samples and Σ T̃² >= LEAF_WEIGHT_MIN
    on each side in both honesty halves. Ties go to the lowest feature, then
    the lowest threshold.
    """
    n = struct_idx.shape[0]
    if n < 2 * min_leaf or est_idx.shape[0] < 2 * min_leaf:
        return None
    ty = t_res[struct_idx] * y_res[struct_idx]
    tt = t_res[struct_idx] ** 2
    ty_total, tt_total = ty.sum(), tt.sum()
    n_left = np.arange(1, n)
    n_right = n - n_left
    eps = Thresholds.LEAF_WEIGHT_MIN
    n_est = est_idx.shape[0]
    tt_est = t_res[est_idx] ** 2

    best_score = -np.inf
    best: Optional[Tuple[int, float]] = None
    for f in features:
        xs = X[struct_idx, f]
        order = np.argsort(xs, kind="mergesort")
        xs_sorted = xs[order]
        valid = (n_left >= min_leaf) & (n_right >= min_leaf) & (xs_sorted[:-1] < xs_sorted[1:])
        if not valid.any():
            continue
        ty_left = np.cumsum(ty[order])[:-1]
        tt_left = np.cumsum(tt[order])[:-1]
        tt_right = tt_total - tt_left
        thresholds = 0.5 * (xs_sorted[:-1] + xs_sorted[1:])

        # estimation-half counts and weights on each side of every threshold
        xe = X[est_idx, f]
        e_order = np.argsort(xe, kind="mergesort")
        xe_sorted = xe[e_order]
        tt_est_cum = np.concatenate([[0.0], np.cumsum(tt_est[e_order])])
        ne_left = np.searchsorted(xe_sorted, thresholds, side="right")
        tte_left = tt_est_cum[ne_left]
        tte_right = tt_est_cum[-1] - tte_left

        valid &= (tt_left >= eps) & (tt_right >= eps)
        valid &= (ne_left >= min_leaf) & (n_est - ne_left >= min_leaf)
        valid &= (tte_left >= eps) & (tte_right >= eps)
        if not valid.any():
            continue
        with np.errstate(divide="ignore", invalid="ignore"):
            tau_left = ty_left / tt_left
            tau_right = (ty_total - ty_left) / tt_right
            score = n_left * tau_left ** 2 + n_right * tau_right ** 2
        score = np.where(valid, score, -np.inf)
        k = int(np.argmax(score))
        if score[k] > best_score:
            best_score = float(score[k])
            best = (int(f), float(thresholds[k]))
    if best is None:
        return None
    return best[0], best[1], best_score


class CausalTree:
    """
    Honest causal tree: the structure half chooses the splits, the
    estimation half fills the leaf effects.
    """

    def __init__(self, min_samples_leaf: int = config.CAUSAL_FOREST_MIN_LEAF,
                 max_depth: Optional[int] = None, max_features: MaxFeatures = None,
                 honest: bool = True):
        self.min_samples_leaf = int(min_samples_leaf)
        self.max_depth = max_depth
        self.max_features = max_features
        self.honest = honest
        self.tree_: Optional[TreeArrays] = None
        self.structure_index_: np.ndarray = np.empty(0, dtype=int)
        self.estimation_index_: np.ndarray = np.empty(0, dtype=int)
        self.leaf_estimation_: Dict[int, np.ndarray] = {}

    def fit(self, X: np.ndarray, y_res: np.ndarray, t_res: np.ndarray,
            sample_index: Optional[np.ndarray] = None,
            rng: Optional[np.random.Generator] = None) -> "CausalTree":
        X = np.asarray(X, dtype=float)
        sample = np.arange(X.shape[0]) if sample_index is None else np.asarray(sample_index, dtype=int)
        rng = rng if rng is not None else np.random.default_rng(0)
        if self.honest:
            shuffled = sample[rng.permutation(sample.shape[0])]
            half = shuffled.shape[0] // 2
            struct_idx, est_idx = np.sort(shuffled[:half]), np.sort(shuffled[half:])
        else:
            struct_idx = est_idx = np.sort(sample)
        self.structure_index_, self.estimation_index_ = struct_idx, est_idx

        n_features = X.shape[1]
        m = resolve_max_features(self.max_features, n_features)

        def split_fn(state: NodeState, depth: int):
            found = best_heterogeneity_split(
                X, y_res, t_res, state[0], state[1],
                candidate_features(n_features, m, rng), self.min_samples_leaf)
            return None if found is None else found[:2]

        def leaf_fn(state: NodeState):
            est = state[1]
            return leaf_effect(y_res[est], t_res[est]), int(est.shape[0])

        leaves: Dict[int, NodeState] = {}
        self.tree_ = grow_tree(X, (struct_idx, est_idx), split_fn, leaf_fn, self.max_depth,
                               leaf_states=leaves)
        self.leaf_estimation_ = {leaf: state[1] for leaf, state in leaves.items()}
        return self

    def apply(self, X) -> np.ndarray:
        return self.tree_.apply(np.asarray(X, dtype=float))

    def predict(self, X) -> np.ndarray:
        return self.tree_.predict(np.asarray(X, dtype=float))

    def get_params(self) -> Dict[str, Any]:
        return {"min_samples_leaf": self.min_samples_leaf, "max_depth": self.max_depth,
                "max_features": self.max_features, "honest": self.honest}

    def to_dict(self) -> Dict[str, Any]:
        return {"type": "CausalTree", "params": self.get_params(), "tree": self.tree_.to_dict()}

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "CausalTree":
        tree = cls(**data["params"])
        tree.tree_ = TreeArrays.from_dict(data["tree"])
        return tree


def _fit_one_causal_tree(X, y_res, t_res, spec: CausalForestSpec,
                         seed_seq: np.random.SeedSequence) -> CausalTree:
    rng = np.random.default_rng(seed_seq)
    n = X.shape[0]
    size = max(2, int(round(spec.subsample_fraction * n)))
    sample = np.sort(rng.choice(n, size=min(size, n), replace=False))
    tree = CausalTree(spec.min_samples_leaf, spec.max_depth, spec.max_features, spec.honest)
    return tree.fit(X, y_res, t_res, sample_index=sample, rng=rng)


class CausalForest:
    """Forest of honest causal trees; CATE is the mean leaf effect over trees"""

    def __init__(self, spec: Optional[CausalForestSpec] = None,
                 feature_names: Optional[Sequence[str]] = None):
        self.spec = spec or CausalForestSpec()
        self.feature_names = list(feature_names) if feature_names is not None else None
        self.trees_: List[CausalTree] = []

    def fit(self, X, y_res, t_res) -> "CausalForest":
        X = np.asarray(X, dtype=float)
        y_res = np.asarray(y_res, dtype=float)
        t_res = np.asarray(t_res, dtype=float)
        if X.ndim != 2 or X.shape[0] != y_res.shape[0] or X.shape[0] != t_res.shape[0]:
            raise DimensionMismatch(f"X {X.shape} does not match residuals {y_res.shape}, {t_res.shape}")
        if self.feature_names is None:
            self.feature_names = [f"x{j}" for j in range(X.shape[1])]
        seeds = np.random.SeedSequence(self.spec.seed).spawn(self.spec.n_trees)
        self.trees_ = Parallel(n_jobs=self.spec.n_jobs)(
            delayed(_fit_one_causal_tree)(X, y_res, t_res, self.spec, ss) for ss in seeds
        )
        return self

    def _as_matrix(self, X) -> np.ndarray:
        if isinstance(X, Mapping):
            unknown = [k for k in X if k not in self.feature_names]
            missing = [k for k in self.feature_names if k not in X]
            if unknown or missing:
                raise UnknownFeature(f"unknown={unknown} missing={missing}")
            return np.array([[float(X[name]) for name in self.feature_names]])
        if isinstance(X, pd.DataFrame):
            missing = [n for n in self.feature_names if n not in X.columns]
            if missing:
                raise UnknownFeature(f"missing features {missing}")
            return X[self.feature_names].to_numpy(dtype=float)
        arr = np.asarray(X, dtype=float)
        if arr.ndim == 1:
            arr = arr.reshape(1, -1)
        if arr.shape[1] != len(self.feature_names):
            raise DimensionMismatch(f"expected {len(self.feature_names)} features, got {arr.shape[1]}")
        return arr

    def tree_predictions(self, X) -> np.ndarray:
        """(n_trees, n_samples) leaf effects"""
        if not self.trees_:
            raise RuntimeError("CausalForest is not fitted")
        Xm = self._as_matrix(X)
        return np.stack([tree.predict(Xm) for tree in self.trees_])

    def predict(self, X) -> np.ndarray:
        return self.tree_predictions(X).mean(axis=0)

    def to_dict(self) -> Dict[str, Any]:
        return {"type": "CausalForest", "spec": self.spec.to_dict(),
                "feature_names": self.feature_names,
                "trees": [t.to_dict() for t in self.trees_]}

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "CausalForest":
        forest = cls(CausalForestSpec.from_dict(data["spec"]), data.get("feature_names"))
        forest.trees_ = [CausalTree.from_dict(t) for t in data["trees"]]
        return forest


def _check_residuals(residuals: ResidualizedData, X: np.ndarray, min_leaf: int) -> None:
    if float(np.var(residuals.t_res)) < Thresholds.RESIDUAL_VARIANCE_MIN:
        raise DegenerateResiduals("treatment residuals have (near) zero variance")
    if X.shape[0] != residuals.n:
        raise DimensionMismatch(f"X has {X.shape[0]} rows, residuals {residuals.n}")
    if residuals.n < 4 * min_leaf:
        raise EmptyData(f"causal forest needs >= {4 * min_leaf} units, got {residuals.n}")


def fit_causal_forest(X, residuals: ResidualizedData, spec: Optional[CausalForestSpec] = None,
                      feature_names: Optional[Sequence[str]] = None) -> CausalForest:
    """
    Raises:
        DegenerateResiduals: var(T̃) below the residual variance floor
    """
    spec = spec or CausalForestSpec()
    X = np.asarray(X, dtype=float)
    _check_residuals(residuals, X, spec.min_samples_leaf)
    logger.info(f"🌲 Causal forest: {spec.n_trees} trees, subsample={spec.subsample_fraction}, "
                f"min_leaf={spec.min_samples_leaf}, n={X.shape[0]}")
    return CausalForest(spec, feature_names).fit(X, residuals.y_res, residuals.t_res)


def predict_cate(forest: CausalForest, x) -> np.ndarray:
    """CATE of one point (mapping or vector) or of every row of a matrix / frame"""
    return forest.predict(x)


def residual_objective(cate: np.ndarray, y_res: np.ndarray, t_res: np.ndarray) -> float:
    """mean((Ỹ - θ̂(X)·T̃)²)"""
    return float(np.mean((np.asarray(y_res) - np.asarray(cate) * np.asarray(t_res)) ** 2))


def tune_causal_forest(X, residuals: ResidualizedData, candidates: Sequence[CausalForestSpec],
                       eval_split: float = config.EVAL_SPLIT, seed: int = 0,
                       feature_names: Optional[Sequence[str]] = None
                       ) -> Tuple[CausalForest, CausalForestSpec, pd.DataFrame]:
    """
    Pick the spec with the lowest held-out residual objective (earliest wins
    ties) and refit it on all units.
    """
    if not candidates:
        raise InvalidSpec("no causal forest candidates")
    X = np.asarray(X, dtype=float)
    _check_residuals(residuals, X, min(s.min_samples_leaf for s in candidates))
    train, test = train_test_indices(X.shape[0], eval_split, seed)
    rows = []
    for i, spec in enumerate(candidates):
        forest = CausalForest(spec, feature_names).fit(X[train], residuals.y_res[train],
                                                       residuals.t_res[train])
        objective = residual_objective(forest.predict(X[test]), residuals.y_res[test],
                                       residuals.t_res[test])
        rows.append({"candidate": i, **spec.to_dict(), "heldout_objective": objective})
    table = pd.DataFrame(rows)
    best = int(np.argmin(table["heldout_objective"].to_numpy()))
    best_spec = candidates[best]
    logger.info(f"🎛️  Causal forest tuning: candidate {best} wins "
                f"(held-out objective {table['heldout_objective'].iloc[best]:.4f})")
    forest = fit_causal_forest(X, residuals, best_spec, feature_names)
    return forest, best_spec, table


def spec_grid(base: CausalForestSpec, grid: Mapping[str, Sequence[Any]]) -> List[CausalForestSpec]:
    """Candidate specs from a parameter grid (dict order, last key fastest)"""
    return [replace(base, **point) for point in grid_points(grid)]
