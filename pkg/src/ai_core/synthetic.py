"""
============================================
🧪 Synthetic Data
Causal Land Suitability Pipeline
Partially linear data Y = θ(X)·T + g(X) + ε with a known effect function,
used as ground truth for the whole pipeline
============================================
"""

from dataclasses import asdict, dataclass, field, replace
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from src.models.panel_model import CrossSection
from src.utils.constants import AssignmentKind, ThetaKind
from src.utils.exceptions import DimensionMismatch, InvalidSpec
from src.utils.math_helpers import sample_std, sigmoid

_UNIFORM_MEAN, _UNIFORM_STD = 0.5, float(np.sqrt(1.0 / 12.0))


@dataclass(frozen=True)
class SyntheticSpec:
    """
    Data-generating process. Features x0..x{n_uniform-1} are U(0, 1), the
    remaining ones N(0, 1).

    theta_kind:
        constant   θ = theta_value
        linear     θ = theta_intercept + Σ theta_coef[j]·x_j
        step       θ = theta_value·1{x_f > theta_threshold}, f = theta_feature
        quadratic  θ = q2·x_f² + q1·x_f + q0, (q2, q1, q0) = theta_quadratic
    """
    n: int = 5000
    d: int = 6
    n_uniform: Optional[int] = None
    theta_kind: ThetaKind = ThetaKind.CONSTANT
    theta_value: float = 2.0
    theta_coef: Tuple[float, ...] = ()
    theta_intercept: float = 0.0
    theta_feature: int = 0
    theta_threshold: float = 0.0
    theta_quadratic: Tuple[float, float, float] = (1.0, 0.0, 0.0)
    confounding: float = 1.0
    confounders: Optional[Tuple[int, ...]] = None
    outcome_noise: float = 1.0
    temperature: float = 1.0
    assignment: AssignmentKind = AssignmentKind.LOGISTIC
    assignment_feature: int = 0
    seed: int = 0

    def __post_init__(self):
        if self.n < 10:
            raise InvalidSpec(f"n must be >= 10, got {self.n}")
        if self.d < 1:
            raise InvalidSpec(f"d must be >= 1, got {self.d}")
        if not 0 <= self.uniform_count <= self.d:
            raise InvalidSpec(f"n_uniform must be in [0, d], got {self.n_uniform}")
        if self.confounding < 0:
            raise InvalidSpec("confounding strength must be >= 0")
        if self.temperature <= 0:
            raise InvalidSpec("temperature must be > 0")
        if self.outcome_noise < 0:
            raise InvalidSpec("outcome noise must be >= 0")
        if len(self.theta_coef) > self.d:
            raise InvalidSpec(f"theta_coef has {len(self.theta_coef)} entries for d={self.d}")
        for idx in (self.theta_feature, self.assignment_feature, *self.confounder_index):
            if not 0 <= idx < self.d:
                raise InvalidSpec(f"feature index {idx} outside [0, {self.d})")

    @property
    def uniform_count(self) -> int:
        return self.d // 2 if self.n_uniform is None else int(self.n_uniform)

    @property
    def confounder_index(self) -> Tuple[int, ...]:
        return tuple(range(self.d)) if self.confounders is None else tuple(self.confounders)

    @property
    def feature_names(self) -> List[str]:
        return [f"x{j}" for j in range(self.d)]

    def is_uniform(self, j: int) -> bool:
        return j < self.uniform_count

    def centre(self, j: int) -> float:
        return _UNIFORM_MEAN if self.is_uniform(j) else 0.0

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["theta_kind"] = self.theta_kind.value
        data["assignment"] = self.assignment.value
        data["theta_coef"] = list(self.theta_coef)
        data["theta_quadratic"] = list(self.theta_quadratic)
        data["confounders"] = None if self.confounders is None else list(self.confounders)
        return data

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "SyntheticSpec":
        values = dict(data)
        if "theta_kind" in values:
            values["theta_kind"] = ThetaKind(values["theta_kind"])
        if "assignment" in values:
            values["assignment"] = AssignmentKind(values["assignment"])
        for key in ("theta_coef", "theta_quadratic"):
            if key in values:
                values[key] = tuple(float(v) for v in values[key])
        if values.get("confounders") is not None:
            values["confounders"] = tuple(int(v) for v in values["confounders"])
        try:
            return cls(**values)
        except TypeError as e:
            raise InvalidSpec(f"bad synthetic spec: {e}")


def _as_matrix(spec: SyntheticSpec, x) -> np.ndarray:
    if isinstance(x, Mapping):
        return np.array([[float(x[name]) for name in spec.feature_names]])
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.shape[1] != spec.d:
        raise DimensionMismatch(f"expected {spec.d} features, got {arr.shape[1]}")
    return arr


def oracle_cate(spec: SyntheticSpec, x) -> np.ndarray:
    """
    Exact θ(x) for one point or every row of a matrix.

    Raises:
        DimensionMismatch: x does not have d features
    """
    X = _as_matrix(spec, x)
    kind = spec.theta_kind
    if kind is ThetaKind.CONSTANT:
        theta = np.full(X.shape[0], float(spec.theta_value))
    elif kind is ThetaKind.LINEAR:
        coef = np.zeros(spec.d)
        coef[:len(spec.theta_coef)] = spec.theta_coef
        theta = spec.theta_intercept + X @ coef
    elif kind is ThetaKind.STEP:
        theta = spec.theta_value * (X[:, spec.theta_feature] > spec.theta_threshold).astype(float)
    else:
        q2, q1, q0 = spec.theta_quadratic
        xf = X[:, spec.theta_feature]
        theta = q2 * xf ** 2 + q1 * xf + q0
    return theta


def confounder_effect(spec: SyntheticSpec, X: np.ndarray) -> np.ndarray:
    """g(X) = Σ_j [2x_j + sin(πx_j) + 0.5x_j²] over the confounding features"""
    cols = X[:, list(spec.confounder_index)]
    return np.sum(2.0 * cols + np.sin(np.pi * cols) + 0.5 * cols ** 2, axis=1)


def assignment_score(spec: SyntheticSpec, X: np.ndarray) -> np.ndarray:
    """γ·wᵀz with z the confounders standardized by their population moments, w = 1/√k"""
    idx = list(spec.confounder_index)
    z = np.empty((X.shape[0], len(idx)))
    for c, j in enumerate(idx):
        if spec.is_uniform(j):
            z[:, c] = (X[:, j] - _UNIFORM_MEAN) / _UNIFORM_STD
        else:
            z[:, c] = X[:, j]
    return spec.confounding * z.sum(axis=1) / np.sqrt(len(idx))


def propensity(spec: SyntheticSpec, X: np.ndarray) -> np.ndarray:
    """True P(T=1 | X); 0/1 for deterministic assignment"""
    if spec.assignment is AssignmentKind.DETERMINISTIC:
        j = spec.assignment_feature
        return (X[:, j] > spec.centre(j)).astype(float)
    return sigmoid(assignment_score(spec, X) / spec.temperature)


@dataclass
class SyntheticOracle:
    """Ground truth of one generated dataset"""
    spec: SyntheticSpec
    true_cate: np.ndarray
    propensity: np.ndarray
    baseline: np.ndarray
    X: np.ndarray = field(repr=False, default=None)

    @property
    def ate(self) -> float:
        return float(self.true_cate.mean())

    def cate(self, x) -> np.ndarray:
        return oracle_cate(self.spec, x)


def _draw_features(spec: SyntheticSpec, rng: np.random.Generator) -> np.ndarray:
    k = spec.uniform_count
    X = np.empty((spec.n, spec.d))
    X[:, :k] = rng.uniform(0.0, 1.0, size=(spec.n, k))
    X[:, k:] = rng.standard_normal(size=(spec.n, spec.d - k))
    return X


def _rows(spec: SyntheticSpec, X, t_raw, T, Y, theta, e) -> List[CrossSection]:
    side = int(np.ceil(np.sqrt(spec.n)))
    width = len(str(spec.n - 1))
    names = spec.feature_names
    rows = []
    for i in range(spec.n):
        rows.append(CrossSection(
            cell_id=f"s{i:0{width}d}",
            features={name: float(X[i, j]) for j, name in enumerate(names)},
            treatment_raw=float(t_raw[i]),
            outcome=float(Y[i]),
            treatment=None if T is None else int(T[i]),
            centroid_lon=float((i % side) * 500.0),
            centroid_lat=float((i // side) * 500.0),
            extras={"true_cate": float(theta[i]), "propensity": float(e[i])},
        ))
    return rows


def generate_plm(spec: SyntheticSpec) -> Tuple[List[CrossSection], SyntheticOracle]:
    """
    Draw n units: X, T ~ Bernoulli(e(X)) (or the deterministic rule),
    Y = θ(X)·T + g(X) + ε. Reproducible bit for bit from spec.seed.
    """
    rng = np.random.default_rng(spec.seed)
    X = _draw_features(spec, rng)
    e = propensity(spec, X)
    if spec.assignment is AssignmentKind.DETERMINISTIC:
        T = e.astype(int)
    else:
        T = (rng.uniform(size=spec.n) < e).astype(int)
    theta = oracle_cate(spec, X)
    g = confounder_effect(spec, X)
    Y = theta * T + g + spec.outcome_noise * rng.standard_normal(spec.n)
    oracle = SyntheticOracle(spec, theta, e, g, X)
    return _rows(spec, X, T.astype(float), T, Y, theta, e), oracle


def generate_plm_continuous(spec: SyntheticSpec) -> Tuple[List[CrossSection], SyntheticOracle]:
    """
    Continuous raw treatment (latent score plus logistic noise); the binary
    treatment entering Y is 1{raw > median(raw)}. Rows leave `treatment`
    unset so the pipeline binarizes it.
    """
    rng = np.random.default_rng(spec.seed)
    X = _draw_features(spec, rng)
    raw = assignment_score(spec, X) + spec.temperature * rng.logistic(size=spec.n)
    T = (raw > np.median(raw)).astype(int)
    theta = oracle_cate(spec, X)
    g = confounder_effect(spec, X)
    Y = theta * T + g + spec.outcome_noise * rng.standard_normal(spec.n)
    e = propensity(replace(spec, assignment=AssignmentKind.LOGISTIC), X)
    oracle = SyntheticOracle(spec, theta, e, g, X)
    return _rows(spec, X, raw, None, Y, theta, e), oracle


def difference_in_means(Y, T) -> Tuple[float, float]:
    """Naive mean(Y | T=1) - mean(Y | T=0) and its standard error"""
    Y = np.asarray(Y, dtype=float)
    T = np.asarray(T).astype(int)
    treated, control = Y[T == 1], Y[T == 0]
    if treated.size < 2 or control.size < 2:
        raise InvalidSpec("difference in means needs >= 2 treated and >= 2 control units")
    estimate = float(treated.mean() - control.mean())
    stderr = float(np.sqrt(sample_std(treated) ** 2 / treated.size
                           + sample_std(control) ** 2 / control.size))
    return estimate, stderr
