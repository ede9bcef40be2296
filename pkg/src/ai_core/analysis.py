"""
============================================
📊 Heterogeneity Analysis
Causal Land Suitability Pipeline
- CATE distribution, CATE-vs-feature pairs and Spearman table
- Suitability map rows
- Counterfactual feature shifts with extrapolation flags
- Run summary
============================================
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.stats import rankdata

from config import config
from src.models.estimation_model import CateModel, PropensityReport
from src.models.panel_model import CrossSection
from src.utils.constants import Defaults
from src.utils.exceptions import (
    ConstantInput, DimensionMismatch, EmptyData, InvalidSpec, UnknownFeature,
)
from src.utils.logger import logger


# ============================================
# 📈 RANK CORRELATION
# ============================================
def spearman(a, b) -> float:
    """
    Pearson correlation of mid-ranks (ties get their average rank).

    Raises:
        ConstantInput: either input is constant
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise DimensionMismatch(f"spearman inputs differ in length ({a.size} vs {b.size})")
    if a.size < 3:
        raise EmptyData("spearman needs at least 3 pairs")
    ra, rb = rankdata(a), rankdata(b)
    ra -= ra.mean()
    rb -= rb.mean()
    denom = float(np.sqrt(np.dot(ra, ra) * np.dot(rb, rb)))
    if denom == 0.0:
        raise ConstantInput("spearman is undefined for a constant input")
    return float(np.clip(np.dot(ra, rb) / denom, -1.0, 1.0))


def spearman_table(features: pd.DataFrame, cates) -> pd.DataFrame:
    """Spearman ρ between every feature and the CATEs (NaN for constant features)"""
    rows = []
    for name in features.columns:
        try:
            rho = spearman(features[name].to_numpy(dtype=float), cates)
        except ConstantInput:
            logger.warning(f"⚠️  Feature '{name}' is constant; Spearman reported as NaN")
            rho = float("nan")
        rows.append({"feature": name, "spearman": rho})
    return pd.DataFrame(rows, columns=["feature", "spearman"])


# ============================================
# 📊 DISTRIBUTIONS
# ============================================
def cate_histogram(cates, bins: int = config.HISTOGRAM_BINS) -> Tuple[np.ndarray, np.ndarray]:
    """Equal-width bins over [min, max]; counts sum to n"""
    cates = np.asarray(cates, dtype=float)
    if cates.size == 0:
        raise EmptyData("no CATEs to bin")
    if bins < 1:
        raise InvalidSpec(f"bins must be >= 1, got {bins}")
    counts, edges = np.histogram(cates, bins=bins, range=(float(cates.min()), float(cates.max())))
    return edges, counts


def histogram_frame(edges: np.ndarray, counts: np.ndarray) -> pd.DataFrame:
    return pd.DataFrame({"bin_low": edges[:-1], "bin_high": edges[1:], "count": counts})


def cate_quantiles(cates, quantiles: Sequence[float] = Defaults.CATE_QUANTILES) -> Dict[str, float]:
    cates = np.asarray(cates, dtype=float)
    return {f"q{int(round(q * 100)):02d}": float(np.quantile(cates, q)) for q in quantiles}


def cate_feature_pairs(features: pd.DataFrame, cates,
                       names: Optional[Sequence[str]] = None) -> pd.DataFrame:
    """Long (feature, value, cate) table for CATE-vs-feature plots"""
    cates = np.asarray(cates, dtype=float)
    names = list(names) if names is not None else list(features.columns)
    unknown = [n for n in names if n not in features.columns]
    if unknown:
        raise UnknownFeature(f"unknown features {unknown}")
    parts = [pd.DataFrame({"feature": name, "value": features[name].to_numpy(dtype=float),
                           "cate": cates}) for name in names]
    return pd.concat(parts, ignore_index=True)


# ============================================
# 🗺️ SUITABILITY MAP
# ============================================
MAP_COLUMNS = ["cell_id", "centroid_lon", "centroid_lat", "cate", "treated", "treatment_raw"]


@dataclass
class SuitabilityMap:
    """One row per estimated cell, sorted by cell_id"""
    frame: pd.DataFrame

    def __len__(self) -> int:
        return len(self.frame)


def build_suitability_map(rows: Sequence[CrossSection], cates) -> SuitabilityMap:
    cates = np.asarray(cates, dtype=float)
    if len(rows) != cates.shape[0]:
        raise DimensionMismatch(f"{len(rows)} cells but {cates.shape[0]} CATEs")
    if not np.isfinite(cates).all():
        raise InvalidSpec("suitability map requires finite CATEs")
    frame = pd.DataFrame({
        "cell_id": [r.cell_id for r in rows],
        "centroid_lon": [r.centroid_lon for r in rows],
        "centroid_lat": [r.centroid_lat for r in rows],
        "cate": cates,
        "treated": [-1 if r.treatment is None else int(r.treatment) for r in rows],
        "treatment_raw": [r.treatment_raw for r in rows],
    }, columns=MAP_COLUMNS)
    frame = frame.sort_values("cell_id", kind="mergesort").reset_index(drop=True)
    return SuitabilityMap(frame)


def export_map(suitability: SuitabilityMap, path_stem: str) -> Tuple[str, str]:
    """Write `<stem>.csv` and `<stem>.geojson`; returns both paths"""
    from src.database.geojson_store import write_point_collection
    from src.database.panel_store import write_frame

    csv_path = f"{path_stem}.csv"
    geojson_path = f"{path_stem}.geojson"
    write_frame(suitability.frame, csv_path)
    write_point_collection(suitability.frame, geojson_path)
    logger.info(f"🗺️  Suitability map: {len(suitability)} cells -> {csv_path}, {geojson_path}")
    return csv_path, geojson_path


# ============================================
# 🌡️ COUNTERFACTUAL SHIFT
# ============================================
@dataclass(frozen=True)
class ShiftSpec:
    """Additive per-feature deltas, e.g. {"tmax": 1.5}"""
    deltas: Mapping[str, float]
    flag_fraction: float = config.EXTRAPOLATION_FLAG_FRACTION


@dataclass
class ShiftResult:
    base_cate: np.ndarray
    shifted_cate: np.ndarray
    flagged: np.ndarray
    flagged_fraction: float
    extrapolation_warning: bool
    out_of_range: Dict[str, float] = field(default_factory=dict)

    @property
    def mean_change(self) -> float:
        return float(np.mean(self.shifted_cate - self.base_cate))

    def to_frame(self, cell_ids: Optional[Sequence[str]] = None) -> pd.DataFrame:
        frame = pd.DataFrame({"cate": self.base_cate, "shifted_cate": self.shifted_cate,
                              "extrapolated": self.flagged.astype(int)})
        if cell_ids is not None:
            frame.insert(0, "cell_id", list(cell_ids))
        return frame


def counterfactual_shift(model: CateModel, X, shift: ShiftSpec) -> ShiftResult:
    """
    θ̂(x + δ) per unit. A shifted point is flagged when any shifted feature
    leaves the [min, max] seen during fitting.

    Raises:
        UnknownFeature: a delta names a feature the model does not use
    """
    unknown = [k for k in shift.deltas if k not in model.feature_names]
    if unknown:
        raise UnknownFeature(f"shift names unknown features {unknown}")
    Xm = model._as_matrix(X).copy()
    base = model.predict_cate(Xm)

    flagged = np.zeros(Xm.shape[0], dtype=bool)
    out_of_range: Dict[str, float] = {}
    for name, delta in shift.deltas.items():
        j = model.feature_names.index(name)
        Xm[:, j] = Xm[:, j] + float(delta)
        low, high = model.feature_ranges.get(name, (float(Xm[:, j].min() - delta),
                                                    float(Xm[:, j].max() - delta)))
        outside = (Xm[:, j] < low) | (Xm[:, j] > high)
        out_of_range[name] = float(outside.mean())
        flagged |= outside

    shifted = model.predict_cate(Xm)
    fraction = float(flagged.mean()) if flagged.size else 0.0
    warn = fraction > shift.flag_fraction
    if warn:
        logger.warning(f"⚠️  Counterfactual shift extrapolates for {fraction:.1%} of units")
    return ShiftResult(base, shifted, flagged, fraction, warn, out_of_range)


# ============================================
# 🧾 SUMMARY
# ============================================
def build_summary(model: CateModel, cates, spearman_df: Optional[pd.DataFrame] = None,
                  propensity: Optional[PropensityReport] = None,
                  treatment: Optional[str] = None) -> Dict[str, Any]:
    """Run-level summary: ATE, CI, CATE quantiles, first stage, Spearman table, trim counts"""
    cates = np.asarray(cates, dtype=float)
    summary: Dict[str, Any] = {
        "treatment": treatment,
        "final_stage": model.kind.value,
        "n_units": int(cates.shape[0]),
        "ate": model.ate,
        "ate_ci": list(model.ate_ci),
        "ate_stderr": model.ate_stderr,
        "cate_mean": float(cates.mean()) if cates.size else float("nan"),
        "cate_quantiles": cate_quantiles(cates) if cates.size else {},
        "first_stage": None if model.first_stage is None else {
            k: v for k, v in model.first_stage.to_dict().items() if not k.endswith("_cv")
        },
    }
    if spearman_df is not None:
        summary["spearman"] = {
            row.feature: (None if np.isnan(row.spearman) else float(row.spearman))
            for row in spearman_df.itertuples(index=False)
        }
    if propensity is not None:
        summary["trim"] = {"n_in": int(propensity.scores.shape[0]), "n_kept": propensity.n_kept,
                           "low": propensity.low, "high": propensity.high}
    return summary
