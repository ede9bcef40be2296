"""
======================================================
🎯 Estimation Data Model
Causal Land Suitability Pipeline
Search / nuisance specifications, residualized data, propensity reports
and the fitted CATE model.
======================================================
"""
from dataclasses import dataclass, field, asdict
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from config import config
from src.utils.constants import (
    CateBasis, Defaults, FinalStageKind, ModelFamily, Scoring,
)
from src.utils.exceptions import DimensionMismatch, InvalidSpec, UnknownFeature

MODEL_FORMAT_VERSION = 1


# ============================================
# 🔍 MODEL SELECTION SPECS
# ============================================
@dataclass(frozen=True)
class SearchSpec:
    """Model family + hyperparameter grid searched by k-fold CV"""
    family: ModelFamily
    grid: Mapping[str, Sequence[Any]]
    k_folds: int = config.K_FOLDS
    scoring: Scoring = Scoring.R2
    seed: int = 0

    def __post_init__(self):
        if not self.grid or any(len(v) == 0 for v in self.grid.values()):
            raise InvalidSpec(f"empty hyperparameter grid for {self.family.value}")
        if self.k_folds < 2:
            raise InvalidSpec(f"k_folds must be >= 2, got {self.k_folds}")

    def with_seed(self, seed: int) -> "SearchSpec":
        return SearchSpec(self.family, self.grid, self.k_folds, self.scoring, seed)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "family": self.family.value,
            "grid": {k: list(v) for k, v in self.grid.items()},
            "k_folds": self.k_folds,
            "scoring": self.scoring.value,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "SearchSpec":
        family = ModelFamily(data["family"])
        scoring = data.get("scoring")
        if scoring is None:
            scoring = Scoring.F1.value if family.is_classifier else Scoring.R2.value
        return cls(
            family=family,
            grid={k: list(v) for k, v in data["grid"].items()},
            k_folds=int(data.get("k_folds", config.K_FOLDS)),
            scoring=Scoring(scoring),
            seed=int(data.get("seed", 0)),
        )


def default_outcome_candidates() -> Tuple[SearchSpec, ...]:
    """Default Y ~ X families: random forest, lasso, boosting"""
    return (
        SearchSpec(ModelFamily.RANDOM_FOREST, Defaults.FOREST_GRID),
        SearchSpec(ModelFamily.LASSO, Defaults.LASSO_GRID),
        SearchSpec(ModelFamily.GRADIENT_BOOSTING, Defaults.BOOSTING_GRID),
    )


def default_treatment_candidates() -> Tuple[SearchSpec, ...]:
    """Default T ~ X families: logistic, random forest, boosting"""
    return (
        SearchSpec(ModelFamily.LOGISTIC, Defaults.LOGISTIC_GRID, scoring=Scoring.F1),
        SearchSpec(ModelFamily.RANDOM_FOREST_CLASSIFIER, Defaults.FOREST_GRID, scoring=Scoring.F1),
        SearchSpec(ModelFamily.GRADIENT_BOOSTING_CLASSIFIER, Defaults.BOOSTING_GRID, scoring=Scoring.F1),
    )


@dataclass(frozen=True)
class NuisanceSpec:
    """First-stage learners: g (Y ~ X) and f (T ~ X)"""
    outcome_candidates: Tuple[SearchSpec, ...] = field(default_factory=default_outcome_candidates)
    treatment_candidates: Tuple[SearchSpec, ...] = field(default_factory=default_treatment_candidates)
    k_folds: int = config.K_FOLDS
    eval_split: float = config.EVAL_SPLIT

    def __post_init__(self):
        if self.k_folds < 2:
            raise InvalidSpec(f"k_folds must be >= 2, got {self.k_folds}")
        if not (0.0 < self.eval_split <= 0.5):
            raise InvalidSpec(f"eval_split must be in (0, 0.5], got {self.eval_split}")
        if not self.outcome_candidates or not self.treatment_candidates:
            raise InvalidSpec("nuisance spec needs at least one candidate per model")
        for spec in self.treatment_candidates:
            if not spec.family.is_classifier:
                raise InvalidSpec(f"treatment model must be a classifier, got {spec.family.value}")

    @classmethod
    def forest_and_logistic(cls) -> "NuisanceSpec":
        """Random forest for Y, logistic regression for T"""
        return cls(
            outcome_candidates=(SearchSpec(ModelFamily.RANDOM_FOREST, Defaults.FOREST_GRID),),
            treatment_candidates=(SearchSpec(ModelFamily.LOGISTIC, Defaults.LOGISTIC_GRID,
                                             scoring=Scoring.F1),),
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "outcome_candidates": [s.to_dict() for s in self.outcome_candidates],
            "treatment_candidates": [s.to_dict() for s in self.treatment_candidates],
            "k_folds": self.k_folds,
            "eval_split": self.eval_split,
        }

    @classmethod
    def from_dict(cls, data: Optional[Mapping[str, Any]]) -> "NuisanceSpec":
        if not data:
            return cls()
        if data.get("preset") == "forest_and_logistic":
            return cls.forest_and_logistic()
        kwargs: Dict[str, Any] = {}
        if "outcome_candidates" in data:
            kwargs["outcome_candidates"] = tuple(SearchSpec.from_dict(d) for d in data["outcome_candidates"])
        if "treatment_candidates" in data:
            kwargs["treatment_candidates"] = tuple(SearchSpec.from_dict(d) for d in data["treatment_candidates"])
        if "k_folds" in data:
            kwargs["k_folds"] = int(data["k_folds"])
        if "eval_split" in data:
            kwargs["eval_split"] = float(data["eval_split"])
        return cls(**kwargs)


# ============================================
# 📊 FIRST STAGE
# ============================================
@dataclass(frozen=True)
class FirstStageReport:
    """Train/test scores of the 80-20 split (R² for Y ~ X, F1 for T ~ X)"""
    outcome_family: str
    outcome_params: Dict[str, Any]
    outcome_train_r2: float
    outcome_test_r2: float
    treatment_family: str
    treatment_params: Dict[str, Any]
    treatment_train_f1: float
    treatment_test_f1: float
    outcome_cv: List[Dict[str, Any]] = field(default_factory=list)
    treatment_cv: List[Dict[str, Any]] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "FirstStageReport":
        return cls(**dict(data))


@dataclass(frozen=True)
class ResidualizedData:
    """Out-of-fold residuals Ỹ, T̃ (inputs of the final stage)"""
    y_res: np.ndarray
    t_res: np.ndarray
    fold_id: np.ndarray
    y_hat: np.ndarray
    t_hat: np.ndarray
    report: Optional[FirstStageReport] = None

    @property
    def n(self) -> int:
        return int(self.y_res.shape[0])

    def subset(self, index: np.ndarray) -> "ResidualizedData":
        return ResidualizedData(
            y_res=self.y_res[index], t_res=self.t_res[index], fold_id=self.fold_id[index],
            y_hat=self.y_hat[index], t_hat=self.t_hat[index], report=self.report,
        )


# ============================================
# ✂️ OVERLAP
# ============================================
@dataclass(frozen=True)
class PropensityReport:
    cell_ids: Tuple[str, ...]
    scores: np.ndarray
    kept: np.ndarray
    low: float
    high: float
    estimator: str = ""

    @property
    def n_kept(self) -> int:
        return int(self.kept.sum())

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "cell_id": list(self.cell_ids),
            "score": self.scores,
            "kept": self.kept.astype(int),
        })


# ============================================
# 🎯 CATE MODEL
# ============================================
@dataclass
class CateModel:
    """
    Fitted final-stage effect function θ(·) with ATE and 95% CI.

    Linear models store `coef` over the basis φ(x) = [1] or [1, x];
    causal-forest models keep the fitted forest in `forest`.
    """
    kind: FinalStageKind
    feature_names: List[str]
    ate: float
    ate_ci: Tuple[float, float]
    ate_stderr: float
    basis: CateBasis = CateBasis.INTERCEPT_ONLY
    coef: Optional[np.ndarray] = None
    coef_stderr: Optional[np.ndarray] = None
    forest: Any = None
    feature_ranges: Dict[str, Tuple[float, float]] = field(default_factory=dict)
    n_units: int = 0
    first_stage: Optional[FirstStageReport] = None
    residual_objective: float = float("nan")
    meta: Dict[str, Any] = field(default_factory=dict)

    def _as_matrix(self, X: Union[np.ndarray, pd.DataFrame, Mapping[str, float]]) -> np.ndarray:
        if isinstance(X, Mapping):
            unknown = [k for k in X if k not in self.feature_names]
            missing = [k for k in self.feature_names if k not in X]
            if unknown or missing:
                raise UnknownFeature(f"unknown={unknown} missing={missing}")
            return np.array([[float(X[n]) for n in self.feature_names]])
        if isinstance(X, pd.DataFrame):
            missing = [n for n in self.feature_names if n not in X.columns]
            if missing:
                raise UnknownFeature(f"missing features {missing}")
            return X[self.feature_names].to_numpy(dtype=float)
        arr = np.asarray(X, dtype=float)
        if arr.ndim == 1:
            arr = arr.reshape(1, -1)
        if arr.shape[1] != len(self.feature_names):
            raise DimensionMismatch(
                f"expected {len(self.feature_names)} features, got {arr.shape[1]}")
        return arr

    def predict_cate(self, X) -> np.ndarray:
        """θ̂(x) for every row of X"""
        Xm = self._as_matrix(X)
        if self.kind is FinalStageKind.CAUSAL_FOREST:
            return self.forest.predict(Xm)
        if self.basis is CateBasis.INTERCEPT_ONLY:
            return np.full(Xm.shape[0], float(self.coef[0]))
        return self.coef[0] + Xm @ self.coef[1:]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "format_version": MODEL_FORMAT_VERSION,
            "type": "CateModel",
            "kind": self.kind.value,
            "feature_names": list(self.feature_names),
            "ate": self.ate,
            "ate_ci": list(self.ate_ci),
            "ate_stderr": self.ate_stderr,
            "basis": self.basis.value,
            "coef": None if self.coef is None else [float(c) for c in self.coef],
            "coef_stderr": None if self.coef_stderr is None else [float(c) for c in self.coef_stderr],
            "forest": None if self.forest is None else self.forest.to_dict(),
            "feature_ranges": {k: list(v) for k, v in self.feature_ranges.items()},
            "n_units": self.n_units,
            "first_stage": None if self.first_stage is None else self.first_stage.to_dict(),
            "residual_objective": self.residual_objective,
            "meta": self.meta,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "CateModel":
        if int(data.get("format_version", 0)) != MODEL_FORMAT_VERSION:
            raise InvalidSpec(f"unsupported model format_version {data.get('format_version')}")
        forest = None
        if data.get("forest") is not None:
            from src.ai_core.causal_forest import CausalForest
            forest = CausalForest.from_dict(data["forest"])
        return cls(
            kind=FinalStageKind(data["kind"]),
            feature_names=list(data["feature_names"]),
            ate=float(data["ate"]),
            ate_ci=tuple(data["ate_ci"]),
            ate_stderr=float(data["ate_stderr"]),
            basis=CateBasis(data.get("basis", CateBasis.INTERCEPT_ONLY.value)),
            coef=None if data.get("coef") is None else np.array(data["coef"], dtype=float),
            coef_stderr=None if data.get("coef_stderr") is None else np.array(data["coef_stderr"], dtype=float),
            forest=forest,
            feature_ranges={k: (float(v[0]), float(v[1])) for k, v in data.get("feature_ranges", {}).items()},
            n_units=int(data.get("n_units", 0)),
            first_stage=None if data.get("first_stage") is None else FirstStageReport.from_dict(data["first_stage"]),
            residual_objective=float("nan") if data.get("residual_objective") is None else float(data["residual_objective"]),
            meta=dict(data.get("meta", {})),
        )
