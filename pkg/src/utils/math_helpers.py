"""
============================================
🧮 Math Helpers
Causal Land Suitability Pipeline
Small numerical utilities shared by the estimators
============================================
"""

import numpy as np
from scipy.special import expit
from typing import Sequence, Tuple

from src.utils.constants import Thresholds


def sigmoid(z):
    """Logistic function, overflow-safe"""
    return expit(z)


def clip_probabilities(p, eps: float = Thresholds.PROBABILITY_CLIP):
    """Clip probabilities into [eps, 1 - eps]"""
    return np.clip(np.asarray(p, dtype=float), eps, 1.0 - eps)


def polygon_signed_area(vertices: Sequence[Tuple[float, float]]) -> float:
    """Shoelace area of a ring (positive when counter-clockwise)"""
    pts = np.asarray(vertices, dtype=float)
    if len(pts) < 3:
        return 0.0
    x, y = pts[:, 0], pts[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def sample_std(values) -> float:
    """Sample standard deviation (ddof=1), 0 for fewer than 2 values"""
    arr = np.asarray(values, dtype=float)
    if arr.size < 2:
        return 0.0
    return float(np.std(arr, ddof=1))


def normal_ci(mean: float, std: float, n: int, z: float = Thresholds.Z_95) -> Tuple[float, float]:
    """Normal-approximation interval mean ± z·std/√n"""
    if n <= 0:
        return (float("nan"), float("nan"))
    half = z * std / np.sqrt(n)
    return (float(mean - half), float(mean + half))
