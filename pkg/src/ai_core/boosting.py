"""
============================================
📈 Gradient Boosting
Causal Land Suitability Pipeline
Stagewise regression trees on residuals (squared loss) or on the
negative gradient of the binomial deviance (logistic loss)
============================================
"""

from typing import Dict, Iterator, List, Mapping, Optional

import numpy as np

from src.ai_core.tree import MaxFeatures, RegressionTree
from src.utils.constants import BoostingLoss
from src.utils.exceptions import EmptyData, SingleClass
from src.utils.math_helpers import sigmoid


class GradientBoostingModel:
    """
    Gradient boosted regression trees.

    Args:
        n_stages: number of boosting stages (>= 1)
        learning_rate: shrinkage applied to each stage
        max_depth: depth of each base tree
        loss: squared (regression) or logistic (binary classification)
    """

    def __init__(self, n_stages: int = 100, learning_rate: float = 0.1, max_depth: Optional[int] = 3,
                 min_samples_leaf: int = 1, max_features: MaxFeatures = None,
                 loss: BoostingLoss = BoostingLoss.SQUARED, seed: int = 0):
        if n_stages < 1:
            raise ValueError("n_stages must be >= 1")
        if learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        self.n_stages = int(n_stages)
        self.learning_rate = float(learning_rate)
        self.max_depth = max_depth
        self.min_samples_leaf = int(min_samples_leaf)
        self.max_features = max_features
        self.loss = BoostingLoss(loss)
        self.seed = int(seed)
        self.init_: float = 0.0
        self.base_trees_: List[RegressionTree] = []
        self.train_loss_: List[float] = []

    @property
    def is_classifier(self) -> bool:
        return self.loss is BoostingLoss.LOGISTIC

    def _loss_value(self, y: np.ndarray, raw: np.ndarray) -> float:
        if self.loss is BoostingLoss.SQUARED:
            return float(np.mean((y - raw) ** 2))
        # binomial deviance, log(1 + e^raw) - y·raw
        return float(np.mean(np.logaddexp(0.0, raw) - y * raw))

    def fit(self, X, y) -> "GradientBoostingModel":
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float)
        if X.ndim != 2 or X.shape[0] == 0 or X.shape[0] != y.shape[0]:
            raise EmptyData(f"gradient boosting needs matching non-empty X, y (got {X.shape}, {y.shape})")
        rng = np.random.default_rng(self.seed)

        # === PHASE 1: INITIAL PREDICTION ===
        if self.loss is BoostingLoss.SQUARED:
            self.init_ = float(y.mean())
        else:
            if np.unique(y).size < 2:
                raise SingleClass("logistic boosting needs both classes")
            p = float(y.mean())
            self.init_ = float(np.log(p / (1.0 - p)))

        raw = np.full(y.shape[0], self.init_)
        self.base_trees_ = []
        self.train_loss_ = [self._loss_value(y, raw)]

        # === PHASE 2: STAGES ===
        for _ in range(self.n_stages):
            if self.loss is BoostingLoss.SQUARED:
                gradient = y - raw
            else:
                prob = sigmoid(raw)
                gradient = y - prob
            tree = RegressionTree(self.max_depth, self.min_samples_leaf, self.max_features)
            tree.fit(X, gradient, rng=rng)
            if self.loss is BoostingLoss.LOGISTIC:
                self._newton_leaf_values(tree, X, gradient, prob)
            raw = raw + self.learning_rate * tree.predict(X)
            self.base_trees_.append(tree)
            self.train_loss_.append(self._loss_value(y, raw))
        return self

    @staticmethod
    def _newton_leaf_values(tree: RegressionTree, X: np.ndarray, gradient: np.ndarray,
                            prob: np.ndarray) -> None:
        """One Newton step per leaf: Σ g / Σ p(1-p)"""
        leaves = tree.apply(X)
        hess = prob * (1.0 - prob)
        for leaf in np.unique(leaves):
            mask = leaves == leaf
            denom = float(hess[mask].sum())
            tree.tree_.value[leaf] = float(gradient[mask].sum()) / denom if denom > 1e-12 else 0.0

    def staged_decision_function(self, X) -> Iterator[np.ndarray]:
        """Raw score after each stage, the k-th using only the first k trees"""
        X = np.asarray(X, dtype=float)
        raw = np.full(X.shape[0], self.init_)
        for tree in self.base_trees_:
            raw = raw + self.learning_rate * tree.predict(X)
            yield raw

    def decision_function(self, X) -> np.ndarray:
        raw = np.full(np.asarray(X).shape[0], self.init_)
        for raw in self.staged_decision_function(X):
            pass
        return raw

    def predict_proba(self, X) -> np.ndarray:
        if self.loss is not BoostingLoss.LOGISTIC:
            raise AttributeError("predict_proba is only available with logistic loss")
        return sigmoid(self.decision_function(X))

    def predict(self, X) -> np.ndarray:
        raw = self.decision_function(X)
        if self.loss is BoostingLoss.SQUARED:
            return raw
        return (sigmoid(raw) > 0.5).astype(int)

    def get_params(self) -> Dict:
        return {"n_stages": self.n_stages, "learning_rate": self.learning_rate,
                "max_depth": self.max_depth, "min_samples_leaf": self.min_samples_leaf,
                "max_features": self.max_features, "loss": self.loss.value, "seed": self.seed}

    def to_dict(self) -> Dict:
        return {"type": type(self).__name__, "params": self.get_params(), "init": self.init_,
                "base_trees": [t.to_dict() for t in self.base_trees_]}

    @classmethod
    def from_dict(cls, data: Mapping) -> "GradientBoostingModel":
        params = dict(data["params"])
        params["loss"] = BoostingLoss(params["loss"])
        model = cls(**params)
        model.init_ = float(data["init"])
        model.base_trees_ = [RegressionTree.from_dict(t) for t in data["base_trees"]]
        return model


class GradientBoostingClassifier(GradientBoostingModel):
    """Logistic-loss boosting with a classifier-style API"""

    def __init__(self, n_stages: int = 100, learning_rate: float = 0.1, max_depth: Optional[int] = 3,
                 min_samples_leaf: int = 1, max_features: MaxFeatures = None, seed: int = 0,
                 loss: BoostingLoss = BoostingLoss.LOGISTIC):
        super().__init__(n_stages, learning_rate, max_depth, min_samples_leaf, max_features,
                         BoostingLoss.LOGISTIC, seed)


def fit_gradient_boosting(X, y, spec: Optional[Mapping] = None) -> GradientBoostingModel:
    """Fit boosting from a parameter mapping (`loss` may be a string)"""
    params = dict(spec or {})
    if "loss" in params:
        params["loss"] = BoostingLoss(params["loss"])
    return GradientBoostingModel(**params).fit(X, y)
