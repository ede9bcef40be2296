"""
AI Core package initialization
"""

from .tree import RegressionTree, fit_regression_tree
from .forest import RandomForestRegressor, RandomForestClassifier, fit_random_forest, predict
from .boosting import GradientBoostingModel, GradientBoostingClassifier, fit_gradient_boosting
from .linear_models import LogisticRegressionModel, LassoModel, fit_logistic, fit_lasso
from .preprocessing import MaxAbsScaler
from .metrics import r2_score, f1_score
from .model_selection import grid_search_cv, select_nuisance_model
from .overlap import estimate_propensity, trim_overlap
from .dml import crossfit_residualize, fit_linear_cate, fit_dml
from .causal_forest import CausalForest, CausalForestSpec, fit_causal_forest, predict_cate
from .interpretation import InterpretationTree, interpret_tree

__all__ = [
    'RegressionTree',
    'fit_regression_tree',
    'RandomForestRegressor',
    'RandomForestClassifier',
    'fit_random_forest',
    'predict',
    'GradientBoostingModel',
    'GradientBoostingClassifier',
    'fit_gradient_boosting',
    'LogisticRegressionModel',
    'LassoModel',
    'fit_logistic',
    'fit_lasso',
    'MaxAbsScaler',
    'r2_score',
    'f1_score',
    'grid_search_cv',
    'select_nuisance_model',
    'estimate_propensity',
    'trim_overlap',
    'crossfit_residualize',
    'fit_linear_cate',
    'fit_dml',
    'CausalForest',
    'CausalForestSpec',
    'fit_causal_forest',
    'predict_cate',
    'InterpretationTree',
    'interpret_tree',
]
