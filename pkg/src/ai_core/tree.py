"""
============================================
🌳 Regression Tree (CART)
Causal Land Suitability Pipeline
- Array-backed binary tree shared by CART, boosting and causal trees
- Greedy variance-reduction splitting with an exhaustive threshold scan
============================================
"""

from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from src.utils.exceptions import EmptyData

MaxFeatures = Union[None, int, float, str]

# Node state = tuple of index arrays routed together (CART: (idx,), honest trees: (struct, est))
NodeState = Tuple[np.ndarray, ...]
SplitFn = Callable[[NodeState, int], Optional[Tuple[int, float]]]
LeafFn = Callable[[NodeState], Tuple[float, int]]


@dataclass
class TreeArrays:
    """
    Flat node storage. Internal nodes have feature >= 0 and two children;
    a sample goes left when x[feature] <= threshold. Leaves have feature = -1.
    """
    feature: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=int))
    threshold: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=float))
    left: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=int))
    right: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=int))
    value: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=float))
    n_samples: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=int))

    @property
    def node_count(self) -> int:
        return int(self.feature.shape[0])

    @property
    def leaves(self) -> np.ndarray:
        return np.nonzero(self.feature < 0)[0]

    def apply(self, X: np.ndarray) -> np.ndarray:
        """Leaf id reached by every row of X"""
        X = np.asarray(X, dtype=float)
        node = np.zeros(X.shape[0], dtype=int)
        active = self.feature[node] >= 0
        while active.any():
            rows = np.nonzero(active)[0]
            nd = node[rows]
            go_left = X[rows, self.feature[nd]] <= self.threshold[nd]
            node[rows] = np.where(go_left, self.left[nd], self.right[nd])
            active[rows] = self.feature[node[rows]] >= 0
        return node

    def predict(self, X: np.ndarray) -> np.ndarray:
        return self.value[self.apply(X)]

    def depth(self) -> int:
        if self.node_count == 0:
            return 0
        depths = np.zeros(self.node_count, dtype=int)
        for node in range(self.node_count):
            if self.feature[node] >= 0:
                depths[self.left[node]] = depths[node] + 1
                depths[self.right[node]] = depths[node] + 1
        return int(depths.max())

    def to_dict(self) -> Dict[str, list]:
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": self.value.tolist(),
            "n_samples": self.n_samples.tolist(),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, list]) -> "TreeArrays":
        return cls(
            feature=np.array(data["feature"], dtype=int),
            threshold=np.array(data["threshold"], dtype=float),
            left=np.array(data["left"], dtype=int),
            right=np.array(data["right"], dtype=int),
            value=np.array(data["value"], dtype=float),
            n_samples=np.array(data["n_samples"], dtype=int),
        )


def grow_tree(X: np.ndarray, root: NodeState, split_fn: SplitFn, leaf_fn: LeafFn,
              max_depth: Optional[int] = None,
              leaf_states: Optional[Dict[int, NodeState]] = None) -> TreeArrays:
    """
    Grow a binary tree depth-first. Every index array of a node state is
    partitioned by the chosen split; leaves get their value from `leaf_fn`.
    When `leaf_states` is given, the state of every leaf is recorded there.
    """
    feature: List[int] = []
    threshold: List[float] = []
    left: List[int] = []
    right: List[int] = []
    value: List[float] = []
    n_samples: List[int] = []

    def _new_node() -> int:
        feature.append(-1)
        threshold.append(np.nan)
        left.append(-1)
        right.append(-1)
        value.append(np.nan)
        n_samples.append(0)
        return len(feature) - 1

    stack = [(_new_node(), root, 0)]
    while stack:
        node, state, depth = stack.pop()
        split = None
        if max_depth is None or depth < max_depth:
            split = split_fn(state, depth)
        if split is None:
            value[node], n_samples[node] = leaf_fn(state)
            if leaf_states is not None:
                leaf_states[node] = state
            continue
        f, thr = split
        go_left = [X[idx, f] <= thr for idx in state]
        left_state = tuple(idx[m] for idx, m in zip(state, go_left))
        right_state = tuple(idx[~m] for idx, m in zip(state, go_left))
        feature[node], threshold[node] = int(f), float(thr)
        n_samples[node] = int(len(state[-1]))
        left[node] = _new_node()
        right[node] = _new_node()
        # push right first so the left subtree gets the lower node ids
        stack.append((right[node], right_state, depth + 1))
        stack.append((left[node], left_state, depth + 1))

    return TreeArrays(
        feature=np.array(feature, dtype=int),
        threshold=np.array(threshold, dtype=float),
        left=np.array(left, dtype=int),
        right=np.array(right, dtype=int),
        value=np.array(value, dtype=float),
        n_samples=np.array(n_samples, dtype=int),
    )


def resolve_max_features(max_features: MaxFeatures, n_features: int) -> int:
    """Number of features examined per split"""
    if max_features is None or max_features == "all":
        return n_features
    if max_features == "sqrt":
        return max(1, int(np.sqrt(n_features)))
    if max_features == "log2":
        return max(1, int(np.log2(n_features)))
    if isinstance(max_features, float):
        if not 0.0 < max_features <= 1.0:
            raise ValueError(f"max_features fraction must be in (0, 1], got {max_features}")
        return max(1, int(round(max_features * n_features)))
    count = int(max_features)
    if count < 1:
        raise ValueError(f"max_features must be >= 1, got {count}")
    return min(count, n_features)


def candidate_features(n_features: int, m: int, rng: Optional[np.random.Generator]) -> np.ndarray:
    """Sorted feature subset of size m (all features when m == n_features)"""
    if m >= n_features or rng is None:
        return np.arange(n_features)
    return np.sort(rng.choice(n_features, size=m, replace=False))


def best_variance_split(X: np.ndarray, y: np.ndarray, idx: np.ndarray,
                        features: Sequence[int], min_samples_leaf: int
                        ) -> Optional[Tuple[int, float, float]]:
    """
    Best variance-reduction split of the samples `idx`.

    Scans midpoints between consecutive sorted unique values of every feature.
    Ties go to the lowest feature index, then the lowest threshold.

    Returns:
        (feature, threshold, sse_reduction) or None when no admissible split exists
    """
    n = idx.shape[0]
    if n < 2 * min_samples_leaf or n < 2:
        return None
    ys = y[idx]
    total = ys.sum()
    n_left = np.arange(1, n)
    n_right = n - n_left
    size_ok = (n_left >= min_samples_leaf) & (n_right >= min_samples_leaf)

    best_score = -np.inf
    best: Optional[Tuple[int, float]] = None
    for f in features:
        xs = X[idx, f]
        order = np.argsort(xs, kind="mergesort")
        xs_sorted = xs[order]
        valid = size_ok & (xs_sorted[:-1] < xs_sorted[1:])
        if not valid.any():
            continue
        csum = np.cumsum(ys[order])[:-1]
        score = csum * csum / n_left + (total - csum) ** 2 / n_right
        score = np.where(valid, score, -np.inf)
        k = int(np.argmax(score))
        if score[k] > best_score:
            best_score = float(score[k])
            best = (int(f), float(0.5 * (xs_sorted[k] + xs_sorted[k + 1])))
    if best is None:
        return None
    return best[0], best[1], best_score - total * total / n


class RegressionTree:
    """
    CART regression tree.

    Args:
        max_depth: None grows until leaves are pure or too small
        min_samples_leaf: minimum samples on each side of a split
        max_features: features examined per split (None = all)
    """

    def __init__(self, max_depth: Optional[int] = None, min_samples_leaf: int = 1,
                 max_features: MaxFeatures = None):
        if max_depth is not None and max_depth < 0:
            raise ValueError("max_depth must be >= 0")
        if min_samples_leaf < 1:
            raise ValueError("min_samples_leaf must be >= 1")
        self.max_depth = max_depth
        self.min_samples_leaf = int(min_samples_leaf)
        self.max_features = max_features
        self.tree_: Optional[TreeArrays] = None
        self.n_features_: int = 0

    def fit(self, X, y, rng: Optional[np.random.Generator] = None,
            sample_index: Optional[np.ndarray] = None) -> "RegressionTree":
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float)
        if X.ndim != 2 or X.shape[0] == 0 or X.shape[0] != y.shape[0]:
            raise EmptyData(f"regression tree needs matching non-empty X, y (got {X.shape}, {y.shape})")
        self.n_features_ = X.shape[1]
        m = resolve_max_features(self.max_features, self.n_features_)
        root = np.arange(X.shape[0]) if sample_index is None else np.asarray(sample_index, dtype=int)

        def split_fn(state: NodeState, depth: int):
            idx = state[0]
            ys = y[idx]
            sse = float(np.sum((ys - ys.mean()) ** 2))
            if sse <= 1e-14 * max(1.0, float(np.sum(ys * ys))):
                return None
            found = best_variance_split(
                X, y, idx, candidate_features(self.n_features_, m, rng), self.min_samples_leaf)
            if found is None or found[2] <= 1e-10 * sse:
                return None
            return found[0], found[1]

        def leaf_fn(state: NodeState):
            idx = state[0]
            return float(y[idx].mean()), int(idx.shape[0])

        self.tree_ = grow_tree(X, (root,), split_fn, leaf_fn, self.max_depth)
        return self

    def _check_fitted(self):
        if self.tree_ is None:
            raise RuntimeError("RegressionTree is not fitted")

    def predict(self, X) -> np.ndarray:
        self._check_fitted()
        return self.tree_.predict(np.asarray(X, dtype=float))

    def apply(self, X) -> np.ndarray:
        self._check_fitted()
        return self.tree_.apply(np.asarray(X, dtype=float))

    def get_params(self) -> Dict:
        return {"max_depth": self.max_depth, "min_samples_leaf": self.min_samples_leaf,
                "max_features": self.max_features}

    def to_dict(self) -> Dict:
        self._check_fitted()
        return {"type": "RegressionTree", "params": self.get_params(),
                "n_features": self.n_features_, "tree": self.tree_.to_dict()}

    @classmethod
    def from_dict(cls, data: Dict) -> "RegressionTree":
        model = cls(**data["params"])
        model.n_features_ = int(data["n_features"])
        model.tree_ = TreeArrays.from_dict(data["tree"])
        return model


def fit_regression_tree(X, y, max_depth: Optional[int] = None, min_samples_leaf: int = 1,
                        max_features: MaxFeatures = None,
                        rng: Optional[np.random.Generator] = None) -> RegressionTree:
    """Greedy CART with variance-reduction splitting"""
    return RegressionTree(max_depth, min_samples_leaf, max_features).fit(X, y, rng=rng)
