"""
============================================
📐 Preprocessing
Causal Land Suitability Pipeline
Max-abs feature scaling (first stage only)
============================================
"""

from typing import Any, Dict, Mapping, Optional

import numpy as np


class MaxAbsScaler:
    """
    Divide every feature by its maximum absolute value on the fit data.
    Features whose max-abs is 0 pass through unchanged.
    """

    def __init__(self):
        self.max_abs_: Optional[np.ndarray] = None

    def _scale(self) -> np.ndarray:
        if self.max_abs_ is None:
            raise RuntimeError("MaxAbsScaler is not fitted")
        return np.where(self.max_abs_ == 0.0, 1.0, self.max_abs_)

    def fit(self, X) -> "MaxAbsScaler":
        X = np.asarray(X, dtype=float)
        self.max_abs_ = np.abs(X).max(axis=0) if X.shape[0] else np.zeros(X.shape[1])
        return self

    def transform(self, X) -> np.ndarray:
        return np.asarray(X, dtype=float) / self._scale()

    def fit_transform(self, X) -> np.ndarray:
        return self.fit(X).transform(X)

    def inverse_transform(self, X) -> np.ndarray:
        return np.asarray(X, dtype=float) * self._scale()

    def to_dict(self) -> Dict[str, Any]:
        return {"type": "MaxAbsScaler", "max_abs": self.max_abs_.tolist()}

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "MaxAbsScaler":
        scaler = cls()
        scaler.max_abs_ = np.array(data["max_abs"], dtype=float)
        return scaler


class ScaledEstimator:
    """
    Learner wrapped with its own MaxAbsScaler, fit on the training rows only,
    so every cross-validation or cross-fitting fold scales independently.
    """

    def __init__(self, estimator):
        self.estimator = estimator
        self.scaler = MaxAbsScaler()

    @property
    def is_classifier(self) -> bool:
        return bool(getattr(self.estimator, "is_classifier", False))

    def fit(self, X, y) -> "ScaledEstimator":
        self.estimator.fit(self.scaler.fit_transform(X), y)
        return self

    def predict(self, X) -> np.ndarray:
        return self.estimator.predict(self.scaler.transform(X))

    def predict_proba(self, X) -> np.ndarray:
        return self.estimator.predict_proba(self.scaler.transform(X))

    def get_params(self) -> Dict[str, Any]:
        return self.estimator.get_params()

    def to_dict(self) -> Dict[str, Any]:
        return {"type": "ScaledEstimator", "scaler": self.scaler.to_dict(),
                "estimator": self.estimator.to_dict()}

    @classmethod
    def from_dict(cls, data: Mapping[str, Any], estimator) -> "ScaledEstimator":
        """Rewrap an already restored inner `estimator` with the saved scaler"""
        wrapped = cls(estimator)
        wrapped.scaler = MaxAbsScaler.from_dict(data["scaler"])
        return wrapped
