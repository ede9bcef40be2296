"""
============================================
🌲 Random Forest
Causal Land Suitability Pipeline
Bagged CART ensembles for outcome (regression) and treatment (classification)
============================================
"""

from typing import Dict, List, Mapping, Optional

import numpy as np
from joblib import Parallel, delayed

from src.ai_core.tree import MaxFeatures, RegressionTree
from src.utils.exceptions import EmptyData, SingleClass


def _fit_one_tree(X: np.ndarray, y: np.ndarray, params: Dict, seed_seq: np.random.SeedSequence,
                  bootstrap: bool) -> RegressionTree:
    rng = np.random.default_rng(seed_seq)
    n = X.shape[0]
    sample = rng.integers(0, n, size=n) if bootstrap else np.arange(n)
    return RegressionTree(**params).fit(X, y, rng=rng, sample_index=sample)


class RandomForestRegressor:
    """
    Random forest regressor; prediction is the mean of its trees.
    Deterministic given the seed, whatever the number of workers.
    """

    def __init__(self, n_trees: int = 100, max_depth: Optional[int] = None,
                 min_samples_leaf: int = 1, max_features: MaxFeatures = "sqrt",
                 bootstrap: bool = True, seed: int = 0, n_jobs: int = 1):
        if n_trees < 1:
            raise ValueError("n_trees must be >= 1")
        self.n_trees = int(n_trees)
        self.max_depth = max_depth
        self.min_samples_leaf = int(min_samples_leaf)
        self.max_features = max_features
        self.bootstrap = bool(bootstrap)
        self.seed = int(seed)
        self.n_jobs = n_jobs
        self.trees_: List[RegressionTree] = []

    is_classifier = False

    def _tree_params(self) -> Dict:
        return {"max_depth": self.max_depth, "min_samples_leaf": self.min_samples_leaf,
                "max_features": self.max_features}

    def _fit_trees(self, X: np.ndarray, y: np.ndarray) -> None:
        seeds = np.random.SeedSequence(self.seed).spawn(self.n_trees)
        params = self._tree_params()
        self.trees_ = Parallel(n_jobs=self.n_jobs)(
            delayed(_fit_one_tree)(X, y, params, ss, self.bootstrap) for ss in seeds
        )

    def fit(self, X, y) -> "RandomForestRegressor":
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float)
        if X.ndim != 2 or X.shape[0] == 0 or X.shape[0] != y.shape[0]:
            raise EmptyData(f"random forest needs matching non-empty X, y (got {X.shape}, {y.shape})")
        self._fit_trees(X, y)
        return self

    def tree_predictions(self, X) -> np.ndarray:
        """(n_trees, n_samples) matrix of per-tree predictions"""
        if not self.trees_:
            raise RuntimeError("forest is not fitted")
        X = np.asarray(X, dtype=float)
        return np.stack([tree.predict(X) for tree in self.trees_])

    def predict(self, X) -> np.ndarray:
        return self.tree_predictions(X).mean(axis=0)

    def get_params(self) -> Dict:
        return {"n_trees": self.n_trees, "max_depth": self.max_depth,
                "min_samples_leaf": self.min_samples_leaf, "max_features": self.max_features,
                "bootstrap": self.bootstrap, "seed": self.seed}

    def to_dict(self) -> Dict:
        return {"type": type(self).__name__, "params": self.get_params(),
                "trees": [t.to_dict() for t in self.trees_]}

    @classmethod
    def from_dict(cls, data: Mapping) -> "RandomForestRegressor":
        model = cls(**data["params"])
        model.trees_ = [RegressionTree.from_dict(t) for t in data["trees"]]
        return model


class RandomForestClassifier(RandomForestRegressor):
    """
    Binary classifier: regression trees on the 0/1 label, so the forest
    mean is the predicted probability of class 1.
    """

    is_classifier = True

    def fit(self, X, y) -> "RandomForestClassifier":
        t = np.asarray(y, dtype=float)
        if np.unique(t).size < 2:
            raise SingleClass("random forest classifier needs both classes")
        super().fit(X, t)
        return self

    def predict_proba(self, X) -> np.ndarray:
        return np.clip(super().predict(X), 0.0, 1.0)

    def predict(self, X) -> np.ndarray:
        return (self.predict_proba(X) > 0.5).astype(int)


def fit_random_forest(X, y, spec: Optional[Mapping] = None) -> RandomForestRegressor:
    """Fit a random forest regressor from a parameter mapping"""
    return RandomForestRegressor(**dict(spec or {})).fit(X, y)


def predict(model, X) -> np.ndarray:
    """Predictions of any fitted learner (probabilities for classifiers)"""
    if getattr(model, "is_classifier", False):
        return model.predict_proba(X)
    return model.predict(X)
