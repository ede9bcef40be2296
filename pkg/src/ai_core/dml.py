"""
============================================
🎯 Double Machine Learning
Causal Land Suitability Pipeline
- First stage: family/grid selection on an 80-20 split, train/test report
- Cross-fitted residuals Ỹ = Y - ĝ(X), T̃ = T - f̂(X)
- Final stage: residual regression (linear) or causal forest
============================================
"""

from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from config import config
from src.ai_core.causal_forest import (
    CausalForestSpec, fit_causal_forest, residual_objective, spec_grid, tune_causal_forest,
)
from src.ai_core.metrics import f1_score, r2_score
from src.ai_core.model_selection import (
    GridSearchResult, build_estimator, select_nuisance_model, stratified_kfold_indices,
    train_test_indices,
)
from src.models.estimation_model import (
    CateModel, FirstStageReport, NuisanceSpec, ResidualizedData,
)
from src.models.panel_model import CrossSection, cross_section_arrays
from src.utils.constants import CateBasis, FinalStageKind, Thresholds
from src.utils.exceptions import (
    DegenerateResiduals, DimensionMismatch, EmptyData, InvalidSpec, SingleClass, UndefinedF1,
)
from src.utils.logger import logger


def _json_records(table: pd.DataFrame) -> List[Dict[str, Any]]:
    """CV table rows with NaN turned into None"""
    return table.astype(object).where(table.notna(), None).to_dict(orient="records")


def _safe_f1(t, t_hat) -> float:
    try:
        return f1_score(t, t_hat)
    except UndefinedF1:
        return float("nan")


# ============================================
# 🧪 FIRST STAGE
# ============================================
def _first_stage_report(X, Y, T, spec: NuisanceSpec, seed: int, n_jobs: int
                        ) -> Tuple[FirstStageReport, GridSearchResult, GridSearchResult]:
    """Select g and f on the training part of an 80-20 split and score both parts"""
    train, test = train_test_indices(X.shape[0], spec.eval_split, seed, labels=T)
    outcome = select_nuisance_model(X[train], Y[train], spec.outcome_candidates, seed, n_jobs)
    treatment = select_nuisance_model(X[train], T[train], spec.treatment_candidates, seed, n_jobs)

    report = FirstStageReport(
        outcome_family=outcome.family.value,
        outcome_params=dict(outcome.best_params),
        outcome_train_r2=r2_score(Y[train], outcome.best_model.predict(X[train])),
        outcome_test_r2=r2_score(Y[test], outcome.best_model.predict(X[test])),
        treatment_family=treatment.family.value,
        treatment_params=dict(treatment.best_params),
        treatment_train_f1=_safe_f1(T[train], treatment.best_model.predict(X[train])),
        treatment_test_f1=_safe_f1(T[test], treatment.best_model.predict(X[test])),
        outcome_cv=_json_records(outcome.cv_table),
        treatment_cv=_json_records(treatment.cv_table),
    )
    logger.log_first_stage(report.to_dict())
    return report, outcome, treatment


def _crossfit_fold(X, Y, T, fold_id, k, outcome: GridSearchResult, treatment: GridSearchResult,
                   seed: int):
    train, test = fold_id != k, fold_id == k
    g = build_estimator(outcome.family, outcome.best_params, seed).fit(X[train], Y[train])
    f = build_estimator(treatment.family, treatment.best_params, seed).fit(X[train], T[train])
    return test, g.predict(X[test]), f.predict_proba(X[test])


def crossfit_residualize(X, Y, T, spec: Optional[NuisanceSpec] = None, seed: int = 0,
                         n_jobs: int = config.N_JOBS) -> ResidualizedData:
    """
    Out-of-fold residuals over all units with the first-stage selected models.
    Features are max-abs scaled inside every nuisance fit.

    Raises:
        SingleClass: T has one class
        DegenerateResiduals: var(T̃) < 1e-12
    """
    spec = spec or NuisanceSpec()
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    T = np.asarray(T, dtype=float)
    if X.shape[0] != Y.shape[0] or X.shape[0] != T.shape[0]:
        raise DimensionMismatch(f"X {X.shape}, Y {Y.shape}, T {T.shape} differ in length")
    if np.isnan(X).any() or np.isnan(Y).any() or np.isnan(T).any():
        raise EmptyData("missing values are not supported in the first stage")
    if np.unique(T).size < 2:
        raise SingleClass("treatment has a single class")

    report, outcome, treatment = _first_stage_report(X, Y, T, spec, seed, n_jobs)

    fold_id = stratified_kfold_indices(T, spec.k_folds, seed)
    parts = Parallel(n_jobs=n_jobs)(
        delayed(_crossfit_fold)(X, Y, T, fold_id, k, outcome, treatment, seed)
        for k in range(spec.k_folds)
    )
    y_hat = np.empty_like(Y)
    t_hat = np.empty_like(T)
    for test, g_pred, f_pred in parts:
        y_hat[test] = g_pred
        t_hat[test] = f_pred

    t_res = T - t_hat
    if float(np.var(t_res)) < Thresholds.RESIDUAL_VARIANCE_MIN:
        raise DegenerateResiduals("treatment residuals have (near) zero variance")
    logger.debug(f"Residuals: var(Y_res)={np.var(Y - y_hat):.4f}, var(T_res)={np.var(t_res):.4f}")
    return ResidualizedData(Y - y_hat, t_res, fold_id, y_hat, t_hat, report)


# ============================================
# 📏 LINEAR FINAL STAGE
# ============================================
def _feature_ranges(X: Optional[np.ndarray], names: Sequence[str]) -> Dict[str, Tuple[float, float]]:
    if X is None or X.shape[1] == 0:
        return {}
    return {n: (float(X[:, j].min()), float(X[:, j].max())) for j, n in enumerate(names)}


def fit_linear_cate(residuals: ResidualizedData, X=None,
                    basis: CateBasis = CateBasis.INTERCEPT_ONLY,
                    feature_names: Optional[Sequence[str]] = None) -> CateModel:
    """
    Least squares of Ỹ on T̃·φ(X) with HC0 (sandwich) standard errors.
    Intercept-only: θ̂ = Σ T̃Ỹ / Σ T̃². Linear-in-X: ATE = mean(φ(X))ᵀβ.

    Raises:
        DegenerateResiduals: var(T̃) below the floor
    """
    y_res = np.asarray(residuals.y_res, dtype=float)
    t_res = np.asarray(residuals.t_res, dtype=float)
    if float(np.var(t_res)) < Thresholds.RESIDUAL_VARIANCE_MIN:
        raise DegenerateResiduals("treatment residuals have (near) zero variance")
    Xm = None if X is None else np.asarray(X, dtype=float)
    if Xm is not None and Xm.shape[0] != y_res.shape[0]:
        raise DimensionMismatch(f"X has {Xm.shape[0]} rows, residuals {y_res.shape[0]}")
    if feature_names is None:
        feature_names = [] if Xm is None else [f"x{j}" for j in range(Xm.shape[1])]
    names = list(feature_names)

    if basis is CateBasis.INTERCEPT_ONLY:
        tt = float(np.dot(t_res, t_res))
        theta = float(np.dot(t_res, y_res)) / tt
        resid = y_res - theta * t_res
        stderr = float(np.sqrt(np.sum(t_res ** 2 * resid ** 2))) / tt
        coef = np.array([theta])
        coef_stderr = np.array([stderr])
        ate, ate_se = theta, stderr
    else:
        if Xm is None:
            raise InvalidSpec("linear_in_X basis needs the feature matrix")
        phi = np.hstack([np.ones((Xm.shape[0], 1)), Xm])
        Z = t_res[:, None] * phi
        coef = np.linalg.lstsq(Z, y_res, rcond=None)[0]
        resid = y_res - Z @ coef
        bread = np.linalg.pinv(Z.T @ Z)
        meat = (Z * (resid ** 2)[:, None]).T @ Z
        cov = bread @ meat @ bread
        coef_stderr = np.sqrt(np.clip(np.diag(cov), 0.0, None))
        phi_bar = phi.mean(axis=0)
        ate = float(phi_bar @ coef)
        ate_se = float(np.sqrt(max(float(phi_bar @ cov @ phi_bar), 0.0)))

    half = Thresholds.Z_95 * ate_se
    return CateModel(
        kind=FinalStageKind.LINEAR,
        feature_names=names,
        ate=float(ate),
        ate_ci=(float(ate - half), float(ate + half)),
        ate_stderr=float(ate_se),
        basis=basis,
        coef=np.asarray(coef, dtype=float),
        coef_stderr=np.asarray(coef_stderr, dtype=float),
        feature_ranges=_feature_ranges(Xm, names),
        n_units=int(y_res.shape[0]),
        first_stage=residuals.report,
        residual_objective=float(np.mean(resid ** 2)),
    )


# ============================================
# 🚀 ORCHESTRATION
# ============================================
def fit_dml(data: Sequence[CrossSection], nuisance: Optional[NuisanceSpec] = None,
            final_stage: FinalStageKind = FinalStageKind.LINEAR, seed: int = 0,
            forest_spec: Optional[CausalForestSpec] = None,
            forest_grid: Optional[Mapping[str, Sequence[Any]]] = None,
            min_units: int = config.MIN_UNITS, n_jobs: int = config.N_JOBS,
            basis: CateBasis = CateBasis.INTERCEPT_ONLY,
            residuals: Optional[ResidualizedData] = None) -> CateModel:
    """
    Cross-fit the nuisances, then fit the final stage.

    For the causal forest the ATE is the mean per-unit CATE and its CI uses the
    intercept-only robust standard error on the same residuals.
    """
    final_stage = FinalStageKind(final_stage)
    cell_ids, names, X, _, T, Y = cross_section_arrays(data)
    if len(cell_ids) < min_units:
        raise EmptyData(f"DML needs >= {min_units} units, got {len(cell_ids)}")
    if np.isnan(T).any():
        raise InvalidSpec("treatment is not binarized for every unit")

    if residuals is None:
        residuals = crossfit_residualize(X, Y, T, nuisance, seed, n_jobs)
    reference = fit_linear_cate(residuals, X, CateBasis.INTERCEPT_ONLY, names)

    if final_stage is FinalStageKind.LINEAR:
        model = reference if basis is CateBasis.INTERCEPT_ONLY else fit_linear_cate(residuals, X, basis, names)
        model.meta = {"seed": seed}
    else:
        base = forest_spec or CausalForestSpec(seed=seed, n_jobs=n_jobs)
        if forest_grid:
            forest, base, _ = tune_causal_forest(X, residuals, spec_grid(base, forest_grid),
                                                 seed=seed, feature_names=names)
        else:
            forest = fit_causal_forest(X, residuals, base, names)
        cates = forest.predict(X)
        ate = float(cates.mean())
        half = Thresholds.Z_95 * reference.ate_stderr
        model = CateModel(
            kind=FinalStageKind.CAUSAL_FOREST,
            feature_names=list(names),
            ate=ate,
            ate_ci=(ate - half, ate + half),
            ate_stderr=reference.ate_stderr,
            forest=forest,
            feature_ranges=reference.feature_ranges,
            n_units=len(cell_ids),
            first_stage=residuals.report,
            residual_objective=residual_objective(cates, residuals.y_res, residuals.t_res),
            meta={"seed": seed, "forest_spec": base.to_dict(),
                  "intercept_only_ate": reference.ate},
        )
    logger.log_ate(f"DML ({final_stage.value})", model.ate, model.ate_ci)
    return model
