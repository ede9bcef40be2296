"""
============================================
📏 Linear Models
Causal Land Suitability Pipeline
- L2-penalized logistic regression (Newton-Raphson with step halving)
- Lasso by cyclic coordinate descent with soft-thresholding
============================================
"""

from typing import Dict, List, Mapping, Optional

import numpy as np

from src.utils.constants import Thresholds
from src.utils.exceptions import EmptyData, NonConvergence, SingleClass
from src.utils.math_helpers import sigmoid


def _check_xy(X, y, name: str):
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or X.shape[0] == 0 or X.shape[0] != y.shape[0]:
        raise EmptyData(f"{name} needs matching non-empty X, y (got {X.shape}, {y.shape})")
    return X, y


class LogisticRegressionModel:
    """
    Binary logistic regression maximizing
        (1/n) Σ [t log p + (1 - t) log(1 - p)] - (l2_penalty / 2) ||w||²
    The intercept is not penalized.
    """

    is_classifier = True

    def __init__(self, l2_penalty: float = 1.0, max_iter: int = 100,
                 tol: float = Thresholds.LOGISTIC_GRAD_TOL):
        if l2_penalty < 0:
            raise ValueError("l2_penalty must be >= 0")
        self.l2_penalty = float(l2_penalty)
        self.max_iter = int(max_iter)
        self.tol = float(tol)
        self.weights: Optional[np.ndarray] = None
        self.intercept: float = 0.0
        self.n_iter_: int = 0

    def _objective(self, Xa: np.ndarray, t: np.ndarray, beta: np.ndarray) -> float:
        z = Xa @ beta
        loglik = np.mean(t * z - np.logaddexp(0.0, z))
        return float(loglik - 0.5 * self.l2_penalty * np.dot(beta[1:], beta[1:]))

    def fit(self, X, t) -> "LogisticRegressionModel":
        X, t = _check_xy(X, t, "logistic regression")
        classes = np.unique(t)
        if classes.size < 2:
            raise SingleClass("logistic regression needs both classes")
        n, d = X.shape
        Xa = np.hstack([np.ones((n, 1)), X])
        penalty = np.full(d + 1, self.l2_penalty)
        penalty[0] = 0.0
        beta = np.zeros(d + 1)
        objective = self._objective(Xa, t, beta)

        for iteration in range(1, self.max_iter + 1):
            p = sigmoid(Xa @ beta)
            grad = Xa.T @ (t - p) / n - penalty * beta
            if np.linalg.norm(grad) <= self.tol:
                self.n_iter_ = iteration - 1
                break
            w = p * (1.0 - p)
            hess = (Xa.T * w) @ Xa / n + np.diag(penalty)
            try:
                step = np.linalg.solve(hess, grad)
            except np.linalg.LinAlgError:
                step = np.linalg.lstsq(hess, grad, rcond=None)[0]
            # step halving keeps the ascent monotone
            scale = 1.0
            while scale > 1e-10:
                candidate = beta + scale * step
                cand_obj = self._objective(Xa, t, candidate)
                if cand_obj >= objective - 1e-15:
                    break
                scale *= 0.5
            beta = candidate
            objective = cand_obj
        else:
            p = sigmoid(Xa @ beta)
            grad = Xa.T @ (t - p) / n - penalty * beta
            if np.linalg.norm(grad) > self.tol:
                raise NonConvergence(
                    f"logistic regression: gradient norm {np.linalg.norm(grad):.3e} "
                    f"after {self.max_iter} iterations")
            self.n_iter_ = self.max_iter

        self.intercept = float(beta[0])
        self.weights = beta[1:].copy()
        return self

    def decision_function(self, X) -> np.ndarray:
        if self.weights is None:
            raise RuntimeError("LogisticRegressionModel is not fitted")
        return np.asarray(X, dtype=float) @ self.weights + self.intercept

    def predict_proba(self, X) -> np.ndarray:
        return sigmoid(self.decision_function(X))

    def predict(self, X) -> np.ndarray:
        return (self.predict_proba(X) > 0.5).astype(int)

    def get_params(self) -> Dict:
        return {"l2_penalty": self.l2_penalty, "max_iter": self.max_iter, "tol": self.tol}

    def to_dict(self) -> Dict:
        return {"type": "LogisticRegressionModel", "params": self.get_params(),
                "weights": self.weights.tolist(), "intercept": self.intercept}

    @classmethod
    def from_dict(cls, data: Mapping) -> "LogisticRegressionModel":
        model = cls(**data["params"])
        model.weights = np.array(data["weights"], dtype=float)
        model.intercept = float(data["intercept"])
        return model


class LassoModel:
    """
    Lasso minimizing (1/2n) ||y - b - Xw||² + l1_penalty ||w||₁.
    The intercept is handled by centering.
    """

    is_classifier = False

    def __init__(self, l1_penalty: float = 1e-3, max_iter: int = 10000,
                 tol: float = Thresholds.LASSO_COEF_TOL):
        if l1_penalty < 0:
            raise ValueError("l1_penalty must be >= 0")
        self.l1_penalty = float(l1_penalty)
        self.max_iter = int(max_iter)
        self.tol = float(tol)
        self.weights: Optional[np.ndarray] = None
        self.intercept: float = 0.0
        self.objective_path_: List[float] = []
        self.n_iter_: int = 0

    def objective(self, X, y) -> float:
        X = np.asarray(X, dtype=float)
        resid = np.asarray(y, dtype=float) - self.intercept - X @ self.weights
        return float(0.5 * np.mean(resid ** 2) + self.l1_penalty * np.abs(self.weights).sum())

    def fit(self, X, y) -> "LassoModel":
        X, y = _check_xy(X, y, "lasso")
        n, d = X.shape
        x_mean = X.mean(axis=0)
        y_mean = float(y.mean())
        Xc = X - x_mean
        yc = y - y_mean
        col_sq = (Xc ** 2).sum(axis=0) / n

        w = np.zeros(d)
        resid = yc.copy()

        def _obj() -> float:
            return float(0.5 * np.mean(resid ** 2) + self.l1_penalty * np.abs(w).sum())

        self.objective_path_ = [_obj()]
        for sweep in range(1, self.max_iter + 1):
            max_change = 0.0
            for j in range(d):
                if col_sq[j] == 0.0:
                    continue
                old = w[j]
                rho = Xc[:, j] @ resid / n + col_sq[j] * old
                new = np.sign(rho) * max(abs(rho) - self.l1_penalty, 0.0) / col_sq[j]
                if new != old:
                    resid -= Xc[:, j] * (new - old)
                    w[j] = new
                    max_change = max(max_change, abs(new - old))
            self.objective_path_.append(_obj())
            if max_change <= self.tol:
                self.n_iter_ = sweep
                break
        else:
            raise NonConvergence(f"lasso: no convergence after {self.max_iter} sweeps")

        self.weights = w
        self.intercept = float(y_mean - x_mean @ w)
        return self

    def predict(self, X) -> np.ndarray:
        if self.weights is None:
            raise RuntimeError("LassoModel is not fitted")
        return np.asarray(X, dtype=float) @ self.weights + self.intercept

    def get_params(self) -> Dict:
        return {"l1_penalty": self.l1_penalty, "max_iter": self.max_iter, "tol": self.tol}

    def to_dict(self) -> Dict:
        return {"type": "LassoModel", "params": self.get_params(),
                "weights": self.weights.tolist(), "intercept": self.intercept}

    @classmethod
    def from_dict(cls, data: Mapping) -> "LassoModel":
        model = cls(**data["params"])
        model.weights = np.array(data["weights"], dtype=float)
        model.intercept = float(data["intercept"])
        return model


def fit_logistic(X, t, l2_penalty: float = 1.0) -> LogisticRegressionModel:
    return LogisticRegressionModel(l2_penalty=l2_penalty).fit(X, t)


def fit_lasso(X, y, l1_penalty: float = 1e-3) -> LassoModel:
    return LassoModel(l1_penalty=l1_penalty).fit(X, y)
