"""
======================================================
🗺️ Panel Data Model
Causal Land Suitability Pipeline
Grid cells, per-year panel records and the aggregated cross-section.
======================================================
"""
from dataclasses import dataclass, field, replace
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from config import config
from src.utils.exceptions import DataError


@dataclass(frozen=True)
class GridCell:
    """
    Square grid cell. Centroid coordinates are read in the planar CRS the
    cell size is expressed in (metres for the 500 m MODIS grid).
    """
    cell_id: str
    centroid_lon: float
    centroid_lat: float
    cell_size_m: float = config.CELL_SIZE_M

    def __post_init__(self):
        if not self.cell_size_m > 0:
            raise DataError(f"cell_size_m must be > 0 (cell {self.cell_id})")

    @property
    def bounds(self) -> Tuple[float, float, float, float]:
        """(xmin, ymin, xmax, ymax)"""
        half = self.cell_size_m / 2.0
        return (self.centroid_lon - half, self.centroid_lat - half,
                self.centroid_lon + half, self.centroid_lat + half)

    @property
    def area(self) -> float:
        return self.cell_size_m * self.cell_size_m


@dataclass(frozen=True)
class PanelRecord:
    """One cell in one year"""
    cell_id: str
    year: int
    abundances: Mapping[str, float]
    environment: Mapping[str, float]
    outcome: Optional[float] = None

    @property
    def total_abundance(self) -> float:
        return float(sum(self.abundances.values()))

    @property
    def has_outcome(self) -> bool:
        return self.outcome is not None and not np.isnan(self.outcome)


@dataclass(frozen=True)
class PanelDataset:
    """Validated panel; immutable, safe to share across threads"""
    cells: Tuple[GridCell, ...]
    records: Tuple[PanelRecord, ...]
    study_years: Tuple[int, ...]

    def __post_init__(self):
        ids = [c.cell_id for c in self.cells]
        if len(set(ids)) != len(ids):
            raise ValueError("cell_id must be unique within a dataset")
        known = set(ids)
        seen = set()
        for rec in self.records:
            if rec.cell_id not in known:
                raise ValueError(f"record references unknown cell '{rec.cell_id}'")
            key = (rec.cell_id, rec.year)
            if key in seen:
                raise ValueError(f"duplicate record for cell '{rec.cell_id}' year {rec.year}")
            seen.add(key)

    @property
    def cell_ids(self) -> List[str]:
        return [c.cell_id for c in self.cells]

    def cell_lookup(self) -> Dict[str, GridCell]:
        return {c.cell_id: c for c in self.cells}

    def records_by_cell(self) -> Dict[str, List[PanelRecord]]:
        """Records grouped per cell, each list sorted by year"""
        grouped: Dict[str, List[PanelRecord]] = {c.cell_id: [] for c in self.cells}
        for rec in self.records:
            grouped[rec.cell_id].append(rec)
        for recs in grouped.values():
            recs.sort(key=lambda r: r.year)
        return grouped

    def crop_names(self) -> List[str]:
        names = []
        for rec in self.records:
            for crop in rec.abundances:
                if crop not in names:
                    names.append(crop)
        return names

    def environment_names(self) -> List[str]:
        names = []
        for rec in self.records:
            for feat in rec.environment:
                if feat not in names:
                    names.append(feat)
        return names

    def subset(self, cell_ids: Sequence[str]) -> "PanelDataset":
        """Dataset restricted to the given cells (all of their years)"""
        keep = set(cell_ids)
        return replace(
            self,
            cells=tuple(c for c in self.cells if c.cell_id in keep),
            records=tuple(r for r in self.records if r.cell_id in keep),
        )

    def to_frame(self) -> pd.DataFrame:
        """Long frame: one row per record, abundance columns prefixed `abund_`"""
        rows = []
        for rec in self.records:
            row = {"cell_id": rec.cell_id, "year": rec.year, "outcome": rec.outcome}
            row.update({f"abund_{k}": v for k, v in rec.abundances.items()})
            row.update(dict(rec.environment))
            rows.append(row)
        return pd.DataFrame(rows)


@dataclass
class CrossSection:
    """
    Temporally aggregated row of one cell: features X, treatment T, outcome Y.
    `treatment` stays None until the raw treatment is binarized.
    """
    cell_id: str
    features: Dict[str, float]
    treatment_raw: float
    outcome: float
    treatment: Optional[int] = None
    centroid_lon: float = float("nan")
    centroid_lat: float = float("nan")
    extras: Dict[str, float] = field(default_factory=dict)


def cross_section_arrays(rows: Sequence[CrossSection]):
    """
    Stack cross-section rows into arrays.

    Returns:
        (cell_ids, feature_names, X, treatment_raw, T, Y); T holds NaN where the
        treatment is still unset.

    Raises:
        ValueError: if feature names differ between rows or values are missing
    """
    if not rows:
        return [], [], np.empty((0, 0)), np.empty(0), np.empty(0), np.empty(0)
    names = list(rows[0].features.keys())
    if len(set(names)) != len(names):
        raise ValueError("feature names must be unique")
    X = np.empty((len(rows), len(names)), dtype=float)
    for i, row in enumerate(rows):
        if list(row.features.keys()) != names:
            raise ValueError(f"feature names of cell '{row.cell_id}' differ from the first row")
        X[i] = [row.features[n] for n in names]
    if np.isnan(X).any():
        raise ValueError("cross-section contains missing feature values")
    t_raw = np.array([r.treatment_raw for r in rows], dtype=float)
    T = np.array([np.nan if r.treatment is None else r.treatment for r in rows], dtype=float)
    Y = np.array([r.outcome for r in rows], dtype=float)
    return [r.cell_id for r in rows], names, X, t_raw, T, Y
