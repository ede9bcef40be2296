"""
============================================
🔎 Interpretation Tree
Causal Land Suitability Pipeline
Shallow CART fit on predicted CATEs, with per-node CATE statistics
rendered as indented text (left branch = condition true) and JSON
============================================
"""

from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from config import config
from src.ai_core.tree import RegressionTree
from src.utils.constants import Thresholds
from src.utils.exceptions import DimensionMismatch, EmptyData
from src.utils.math_helpers import normal_ci, sample_std


@dataclass(frozen=True)
class NodeStats:
    n: int
    cate_mean: float
    cate_std: float
    ci_low: float
    ci_high: float

    def to_dict(self) -> Dict[str, Any]:
        return {"n": self.n, "cate_mean": self.cate_mean, "cate_std": self.cate_std,
                "ci": [self.ci_low, self.ci_high]}


def _node_stats(values: np.ndarray) -> NodeStats:
    mean = float(values.mean())
    std = sample_std(values)
    low, high = normal_ci(mean, std, int(values.shape[0]), Thresholds.Z_95)
    return NodeStats(int(values.shape[0]), mean, std, low, high)


class InterpretationTree:
    """Depth-limited regression tree over CATEs plus the statistics of every node"""

    def __init__(self, tree: RegressionTree, feature_names: Sequence[str],
                 node_stats: Dict[int, NodeStats], max_depth: int):
        self.tree = tree
        self.feature_names = list(feature_names)
        self.node_stats = node_stats
        self.max_depth = max_depth

    @property
    def arrays(self):
        return self.tree.tree_

    def leaves(self) -> List[int]:
        return [int(leaf) for leaf in self.arrays.leaves]

    def leaf_stats(self) -> Dict[int, NodeStats]:
        return {leaf: self.node_stats[leaf] for leaf in self.leaves()}

    def depth(self) -> int:
        return self.arrays.depth()

    def condition(self, node: int) -> str:
        a = self.arrays
        return f"{self.feature_names[a.feature[node]]} <= {a.threshold[node]:.4f}"

    def render_text(self) -> str:
        """Indented listing; the first child of a split is where the condition holds"""
        a = self.arrays
        lines: List[str] = []

        def _walk(node: int, indent: str, label: str) -> None:
            s = self.node_stats[node]
            stats = (f"n={s.n}, CATE mean={s.cate_mean:.4f}, std={s.cate_std:.4f}, "
                     f"95% CI=[{s.ci_low:.4f}, {s.ci_high:.4f}]")
            if a.feature[node] < 0:
                lines.append(f"{indent}{label}leaf {node}: {stats}")
                return
            lines.append(f"{indent}{label}node {node}: if {self.condition(node)} ({stats})")
            _walk(int(a.left[node]), indent + "    ", "True  -> ")
            _walk(int(a.right[node]), indent + "    ", "False -> ")

        _walk(0, "", "")
        return "\n".join(lines) + "\n"

    def to_dict(self) -> Dict[str, Any]:
        a = self.arrays

        def _node(node: int) -> Dict[str, Any]:
            entry: Dict[str, Any] = {"id": node, **self.node_stats[node].to_dict()}
            if a.feature[node] >= 0:
                entry["feature"] = self.feature_names[a.feature[node]]
                entry["threshold"] = float(a.threshold[node])
                entry["condition"] = self.condition(node)
                entry["true"] = _node(int(a.left[node]))
                entry["false"] = _node(int(a.right[node]))
            return entry

        return {"max_depth": self.max_depth, "feature_names": self.feature_names, "root": _node(0)}


def interpret_tree(X, cate, max_depth: int = config.INTERPRET_DEPTH,
                   feature_names: Optional[Sequence[str]] = None,
                   min_samples_leaf: int = 1) -> InterpretationTree:
    """
    Fit a CART of depth <= max_depth on the CATEs and summarise every node
    (n, mean, std, mean ± 1.96·std/√n).

    Raises:
        EmptyData: no rows
    """
    X = np.asarray(X, dtype=float)
    cate = np.asarray(cate, dtype=float)
    if X.ndim != 2 or X.shape[0] == 0:
        raise EmptyData("interpretation tree needs at least one row")
    if X.shape[0] != cate.shape[0]:
        raise DimensionMismatch(f"X has {X.shape[0]} rows, cate {cate.shape[0]}")
    names = list(feature_names) if feature_names is not None else [f"x{j}" for j in range(X.shape[1])]

    tree = RegressionTree(max_depth=max_depth, min_samples_leaf=min_samples_leaf).fit(X, cate)
    a = tree.tree_
    stats: Dict[int, NodeStats] = {}
    stack = [(0, np.arange(X.shape[0]))]
    while stack:
        node, idx = stack.pop()
        stats[node] = _node_stats(cate[idx])
        if a.feature[node] >= 0:
            go_left = X[idx, a.feature[node]] <= a.threshold[node]
            stack.append((int(a.left[node]), idx[go_left]))
            stack.append((int(a.right[node]), idx[~go_left]))
    return InterpretationTree(tree, names, stats, max_depth)
