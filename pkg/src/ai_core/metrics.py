"""
============================================
📊 Fit Metrics
Causal Land Suitability Pipeline
R² for outcome models, F1 (class 1) for treatment models
============================================
"""

import numpy as np

from src.utils.exceptions import EmptyData, UndefinedF1, ZeroVariance


def r2_score(y, y_hat) -> float:
    """
    Coefficient of determination 1 - SS_res / SS_tot.

    Raises:
        ZeroVariance: y is constant
    """
    y = np.asarray(y, dtype=float)
    y_hat = np.asarray(y_hat, dtype=float)
    if y.size == 0 or y.shape != y_hat.shape:
        raise EmptyData(f"r2_score needs matching non-empty inputs (got {y.shape}, {y_hat.shape})")
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot == 0.0:
        raise ZeroVariance("r2_score is undefined for constant y")
    ss_res = float(np.sum((y - y_hat) ** 2))
    # (ss_tot - ss_res) / ss_tot keeps hand-computed ratios exact
    return (ss_tot - ss_res) / ss_tot


def f1_score(t, t_hat) -> float:
    """
    F1 of the positive class (treated = 1): 2TP / (2TP + FP + FN).

    Raises:
        UndefinedF1: no actual and no predicted positives
    """
    t = np.asarray(t).astype(int)
    t_hat = np.asarray(t_hat).astype(int)
    if t.size == 0 or t.shape != t_hat.shape:
        raise EmptyData(f"f1_score needs matching non-empty inputs (got {t.shape}, {t_hat.shape})")
    tp = int(np.sum((t == 1) & (t_hat == 1)))
    fp = int(np.sum((t == 0) & (t_hat == 1)))
    fn = int(np.sum((t == 1) & (t_hat == 0)))
    denom = 2 * tp + fp + fn
    if denom == 0:
        raise UndefinedF1("f1_score is undefined without positives")
    return 2 * tp / denom
