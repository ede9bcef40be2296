"""
============================================
🌾 Agricultural Practices
Causal Land Suitability Pipeline
- Per-cell crop abundances from parcel declarations
- Landscape crop diversity (Shannon H') and crop rotation
- Median binarization of the treatment
============================================
"""

from typing import Dict, List, Mapping, Optional, Sequence

import numpy as np
from scipy.stats import entropy

from src.ai_core.geometry import boxes_overlap, parcel_rectangle_area, ring_bounds, validate_parcel
from src.models.panel_model import GridCell, PanelDataset
from src.models.practice_model import Parcel, PracticeRecord, TreatmentAssignment
from src.utils.constants import AggregationKind, Thresholds, TreatmentKind
from src.utils.exceptions import (
    AllZero, ConstantTreatment, EmptyData, MalformedNumber, TooFewYears,
)
from src.utils.logger import logger


# ============================================
# 🗺️ GRIDDING
# ============================================
def grid_abundances(parcels: Sequence[Parcel], grid: Sequence[GridCell],
                    year: int) -> Dict[str, Dict[str, float]]:
    """
    Fraction of every cell covered by each crop in `year`.

    Returns:
        cell_id -> {crop: fraction}; cells without parcels map to {}
    """
    year_parcels = [p for p in parcels if p.year == year]
    for parcel in year_parcels:
        validate_parcel(parcel)
    boxes = [ring_bounds(p.polygon) for p in year_parcels]

    result: Dict[str, Dict[str, float]] = {}
    for cell in grid:
        bounds = cell.bounds
        covered: Dict[str, float] = {}
        for parcel, box in zip(year_parcels, boxes):
            if not boxes_overlap(box, bounds):
                continue
            area = parcel_rectangle_area(parcel, bounds)
            if area > 0.0:
                covered[parcel.crop] = covered.get(parcel.crop, 0.0) + area / cell.area
        total = sum(covered.values())
        if total > 1.0 + Thresholds.ABUNDANCE_SUM_TOL:
            logger.warning(f"⚠️  Overlapping parcels in cell {cell.cell_id} ({year}): "
                           f"abundance sum {total:.4f} rescaled to 1")
            covered = {crop: v / total for crop, v in covered.items()}
        result[cell.cell_id] = dict(sorted(covered.items()))
    return result


# ============================================
# 🌼 DIVERSITY & ROTATION
# ============================================
def shannon_diversity(abundances: Mapping[str, float]) -> float:
    """
    Shannon index H' (nats) of the crop proportions. Abundances are
    renormalized first, so only their ratios matter.

    Raises:
        AllZero: every abundance is 0
    """
    values = np.array(list(abundances.values()), dtype=float)
    if (values < 0).any():
        raise MalformedNumber("abundances must be >= 0")
    if values.size == 0 or values.sum() == 0.0:
        raise AllZero("shannon diversity of an empty landscape")
    positive = values[values > 0]
    if positive.size <= 1:
        return 0.0
    return float(entropy(positive))


def rotation_delta(previous: Mapping[str, float], current: Mapping[str, float]) -> float:
    """Σ_crop |current - previous| over the union of crops (absent = 0)"""
    crops = set(previous) | set(current)
    return float(sum(abs(current.get(c, 0.0) - previous.get(c, 0.0)) for c in sorted(crops)))


def crop_rotation(series: Sequence[Mapping[str, float]]) -> float:
    """
    Total crop rotation of a cell: summed per-crop abundance changes over
    consecutive years.

    Raises:
        TooFewYears: fewer than 2 years
    """
    if len(series) < 2:
        raise TooFewYears(f"crop rotation needs >= 2 years, got {len(series)}")
    return float(sum(rotation_delta(a, b) for a, b in zip(series[:-1], series[1:])))


# ============================================
# 🎚️ BINARIZATION
# ============================================
def binarize_treatment(values: Sequence[float],
                       cell_ids: Optional[Sequence[str]] = None) -> List[TreatmentAssignment]:
    """
    treated = 1 iff value > median (mean of the two central values for even n).
    Ties at the median stay in the control group.

    Raises:
        ConstantTreatment: all values equal
    """
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        raise EmptyData("no treatment values to binarize")
    if np.unique(arr).size < 2:
        raise ConstantTreatment(f"all {arr.size} treatment values equal {arr[0]}")
    ids = list(cell_ids) if cell_ids is not None else [str(i) for i in range(arr.size)]
    if len(ids) != arr.size:
        raise EmptyData("cell_ids and values differ in length")
    median = float(np.median(arr))
    logger.debug(f"Treatment median threshold: {median:.6f}")
    return [TreatmentAssignment(cid, float(v), int(v > median)) for cid, v in zip(ids, arr)]


# ============================================
# 📅 PER-YEAR PRACTICE TABLE
# ============================================
def practice_records(panel: PanelDataset) -> List[PracticeRecord]:
    """Shannon H' and rotation change for every (cell, year) of the panel"""
    records: List[PracticeRecord] = []
    for cell_id, recs in panel.records_by_cell().items():
        previous = None
        for rec in recs:
            try:
                h = shannon_diversity(rec.abundances)
            except AllZero:
                logger.warning(f"⚠️  Cell {cell_id} has no crops in {rec.year}; H' set to 0")
                h = 0.0
            delta = None if previous is None else rotation_delta(previous, rec.abundances)
            records.append(PracticeRecord(cell_id, rec.year, h, delta))
            previous = rec.abundances
    return records


def aggregation_for(kind: TreatmentKind) -> AggregationKind:
    """Crop rotation is summed over the period, diversity is averaged"""
    return AggregationKind.SUM if kind is TreatmentKind.CROP_ROTATION else AggregationKind.MEAN


def treatment_series(records: Sequence[PracticeRecord],
                     kind: TreatmentKind) -> Dict[str, Dict[int, float]]:
    """cell_id -> {year: value} of the chosen practice"""
    series: Dict[str, Dict[int, float]] = {}
    for rec in records:
        cell = series.setdefault(rec.cell_id, {})
        if kind is TreatmentKind.CROP_ROTATION:
            if rec.rotation_delta is not None:
                cell[rec.year] = rec.rotation_delta
        else:
            cell[rec.year] = rec.shannon_H
    return series
