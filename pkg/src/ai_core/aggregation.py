"""
============================================
🧮 Panel Aggregation
Causal Land Suitability Pipeline
- Cropland filter on the period-mean total abundance
- Major-crop selection
- Temporal aggregation into the estimation cross-section
============================================
"""

import math
from typing import Dict, List, Mapping, Optional, Sequence

import numpy as np

from config import config
from src.models.panel_model import CrossSection, PanelDataset
from src.utils.constants import AggregationKind
from src.utils.exceptions import Diagnostic, EmptyResult, InconsistentYears, InvalidSpec
from src.utils.logger import logger


def _period_mean(values: Sequence[float]) -> float:
    """Mean that returns the value itself when every year is identical"""
    if all(v == values[0] for v in values):
        return float(values[0])
    return math.fsum(values) / len(values)


def filter_cropland(panel: PanelDataset, threshold: float = config.CROPLAND_THRESHOLD) -> PanelDataset:
    """
    Keep cells whose period-mean total crop abundance is >= threshold
    (all years of a kept cell stay).

    Raises:
        EmptyResult: no cell survives
    """
    if not 0.0 <= threshold <= 1.0:
        raise InvalidSpec(f"cropland threshold must be in [0, 1], got {threshold}")
    keep = []
    for cell_id, recs in panel.records_by_cell().items():
        if recs and _period_mean([r.total_abundance for r in recs]) >= threshold:
            keep.append(cell_id)
    if not keep:
        raise EmptyResult(f"no cell reaches the cropland threshold {threshold}")
    logger.info(f"🌾 Cropland filter >= {threshold:.2f}: kept {len(keep)}/{len(panel.cells)} cells")
    return panel.subset(keep)


def select_major_crops(panel: PanelDataset,
                       min_median: float = config.MAJOR_CROP_MIN_MEDIAN) -> List[str]:
    """Crops whose median (over cells) period-mean abundance is >= min_median, sorted"""
    crops = panel.crop_names()
    by_cell = panel.records_by_cell()
    means = {crop: [] for crop in crops}
    for recs in by_cell.values():
        if not recs:
            continue
        for crop in crops:
            means[crop].append(_period_mean([r.abundances.get(crop, 0.0) for r in recs]))
    major = sorted(c for c in crops if means[c] and float(np.median(means[c])) >= min_median)
    logger.info(f"🌱 Major crops (median abundance >= {min_median:.0%}): {major}")
    return major


def aggregate_temporal(panel: PanelDataset, treatment_series: Mapping[str, Mapping[int, float]],
                       treatment_kind: AggregationKind,
                       major_crops: Optional[Sequence[str]] = None,
                       diagnostics: Optional[List[Diagnostic]] = None) -> List[CrossSection]:
    """
    One CrossSection per cell: environment means, major-crop abundance means,
    outcome mean, and the treatment series summed or averaged.

    Cells missing the outcome in some year are dropped (a diagnostic is
    appended to `diagnostics` when given).

    Raises:
        InconsistentYears: a cell has fewer than 2 years, or no treatment series
    """
    kind = AggregationKind(treatment_kind)
    crops = list(major_crops) if major_crops is not None else select_major_crops(panel)
    env_names = panel.environment_names()
    lookup = panel.cell_lookup()

    rows: List[CrossSection] = []
    for position, (cell_id, recs) in enumerate(panel.records_by_cell().items(), start=1):
        if len(recs) < 2:
            raise InconsistentYears(f"cell '{cell_id}' has {len(recs)} year(s), need >= 2")
        if not all(r.has_outcome for r in recs):
            missing = [r.year for r in recs if not r.has_outcome]
            logger.warning(f"⚠️  Cell {cell_id} dropped: outcome missing in {missing}")
            if diagnostics is not None:
                diagnostics.append(Diagnostic(position, "MISSING_OUTCOME",
                                              f"cell {cell_id} years {missing}"))
            continue
        series = treatment_series.get(cell_id)
        if not series:
            raise InconsistentYears(f"no treatment series for cell '{cell_id}'")
        values = [float(series[y]) for y in sorted(series)]

        features: Dict[str, float] = {}
        for name in env_names:
            features[name] = _period_mean([float(r.environment.get(name, np.nan)) for r in recs])
        for crop in crops:
            features[crop] = _period_mean([float(r.abundances.get(crop, 0.0)) for r in recs])

        raw = math.fsum(values) if kind is AggregationKind.SUM else _period_mean(values)
        cell = lookup[cell_id]
        rows.append(CrossSection(
            cell_id=cell_id,
            features=features,
            treatment_raw=float(raw),
            outcome=_period_mean([float(r.outcome) for r in recs]),
            centroid_lon=cell.centroid_lon,
            centroid_lat=cell.centroid_lat,
        ))
    if not rows:
        raise EmptyResult("temporal aggregation produced no rows")
    logger.info(f"🧮 Aggregated {len(rows)} cells: {len(env_names)} environment + {len(crops)} crop features")
    return rows
