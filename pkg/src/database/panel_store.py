"""
======================================================
🗄️ Panel Store
Causal Land Suitability Pipeline
CSV ingestion of the gridded panel with row diagnostics, plus the
cross-section, abundance and practice tables.
======================================================
"""
import os
from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from config import config
from src.models.panel_model import CrossSection, GridCell, PanelDataset, PanelRecord
from src.models.practice_model import PracticeRecord
from src.utils.constants import Thresholds
from src.utils.exceptions import (
    Diagnostic, DuplicateRecord, EmptyResult, InvalidSpec, MalformedNumber, MissingArtifact,
    MissingColumn, emit_diagnostics,
)
from src.utils.logger import logger

ABUNDANCE_PREFIX = "abund_"
CSV_FLOAT_FORMAT = "%.17g"


# ============================================
# 📋 SCHEMA
# ============================================
@dataclass(frozen=True)
class PanelSchema:
    """Explicit binding of panel columns (logical name -> CSV column)"""
    cell_id: str = "cell_id"
    year: str = "year"
    outcome: str = "outcome"
    abundances: Mapping[str, str] = field(default_factory=dict)
    environment: Mapping[str, str] = field(default_factory=dict)
    centroid_lon: Optional[str] = "centroid_lon"
    centroid_lat: Optional[str] = "centroid_lat"
    cell_size_m: Optional[str] = "cell_size_m"

    def required_columns(self) -> List[str]:
        return [self.cell_id, self.year, self.outcome, *self.abundances.values(),
                *self.environment.values()]

    @classmethod
    def infer(cls, columns: Sequence[str]) -> "PanelSchema":
        """`abund_<crop>` columns become crops; known climate columns become environment"""
        abundances = {c[len(ABUNDANCE_PREFIX):]: c for c in columns if c.startswith(ABUNDANCE_PREFIX)}
        environment = {c: c for c in config.ENVIRONMENT_FEATURES if c in columns}
        return cls(abundances=abundances, environment=environment)

    @classmethod
    def from_dict(cls, data: Optional[Mapping[str, Any]], columns: Sequence[str] = ()) -> "PanelSchema":
        if not data:
            return cls.infer(columns)
        values = dict(data)
        if "abundances" not in values or "environment" not in values:
            inferred = cls.infer(columns)
            values.setdefault("abundances", dict(inferred.abundances))
            values.setdefault("environment", dict(inferred.environment))
        try:
            return cls(**values)
        except TypeError as e:
            raise InvalidSpec(f"bad panel schema: {e}")


def _parse_float(raw: Any) -> Optional[float]:
    if raw is None or (isinstance(raw, float) and np.isnan(raw)):
        return None
    text = str(raw).strip()
    if text == "":
        return None
    value = float(text)
    if not np.isfinite(value):
        raise ValueError(f"non-finite value '{text}'")
    return value


def _optional_float(row: Mapping[str, Any], column: Optional[str], default: float) -> float:
    if not column or column not in row:
        return default
    value = _parse_float(row[column])
    return default if value is None else value


def _read_raw(source: str) -> pd.DataFrame:
    if not os.path.exists(source):
        raise MissingArtifact(f"input file not found: {source}")
    return pd.read_csv(source, dtype=str, keep_default_na=False, encoding="utf-8")


# ============================================
# 📥 PANEL INGESTION
# ============================================
def load_panel(source: str, schema: Optional[PanelSchema] = None,
               study_period: Optional[Tuple[int, int]] = None,
               strict: bool = True) -> PanelDataset:
    """
    Read and validate the panel CSV.

    Rows are numbered from 1 (first data row after the header). Rejected rows
    are written to stderr as `row=<n> code=<CODE> detail=<text>`; in strict
    mode any rejection raises MalformedNumber.

    Raises:
        MissingColumn, MalformedNumber, DuplicateRecord
    """
    frame = _read_raw(source)
    schema = schema or PanelSchema.infer(list(frame.columns))
    missing = [c for c in schema.required_columns() if c not in frame.columns]
    if missing:
        raise MissingColumn(f"missing columns {missing} in {source}")

    diagnostics: List[Diagnostic] = []
    records: List[PanelRecord] = []
    cells: Dict[str, GridCell] = {}
    seen: Dict[Tuple[str, int], int] = {}
    skipped = 0

    for position, row in enumerate(frame.to_dict(orient="records"), start=1):
        cell_id = str(row[schema.cell_id]).strip()
        try:
            year = int(str(row[schema.year]).strip())
        except ValueError:
            diagnostics.append(Diagnostic(position, MalformedNumber.code, f"year '{row[schema.year]}'"))
            continue
        if study_period is not None and not study_period[0] <= year <= study_period[1]:
            skipped += 1
            continue

        try:
            abundances = {crop: _parse_float(row[col]) or 0.0 for crop, col in schema.abundances.items()}
            environment = {name: _parse_float(row[col]) for name, col in schema.environment.items()}
            outcome = _parse_float(row[schema.outcome])
            lon = _optional_float(row, schema.centroid_lon, float("nan"))
            lat = _optional_float(row, schema.centroid_lat, float("nan"))
            size = _optional_float(row, schema.cell_size_m, config.CELL_SIZE_M)
        except ValueError as e:
            diagnostics.append(Diagnostic(position, MalformedNumber.code, str(e)))
            continue
        bad_env = [name for name, v in environment.items() if v is None]
        if bad_env:
            diagnostics.append(Diagnostic(position, MalformedNumber.code, f"missing environment {bad_env}"))
            continue
        bad_abund = [crop for crop, v in abundances.items() if not 0.0 <= v <= 1.0]
        if bad_abund:
            diagnostics.append(Diagnostic(position, MalformedNumber.code,
                                          f"abundance outside [0,1] for {bad_abund}"))
            continue
        if sum(abundances.values()) > 1.0 + Thresholds.ABUNDANCE_SUM_TOL:
            diagnostics.append(Diagnostic(position, MalformedNumber.code,
                                          f"abundances sum to {sum(abundances.values()):.6f} > 1"))
            continue

        key = (cell_id, year)
        if key in seen:
            raise DuplicateRecord(f"cell '{cell_id}' year {year} on rows {seen[key]} and {position}")
        seen[key] = position

        if cell_id not in cells:
            cells[cell_id] = GridCell(cell_id, lon, lat, size)
        records.append(PanelRecord(cell_id, year, abundances, environment, outcome))

    if diagnostics:
        emit_diagnostics(diagnostics)
        logger.log_diagnostics(diagnostics)
        if strict:
            raise MalformedNumber(f"{len(diagnostics)} row(s) rejected in {source}", diagnostics)
    if not records:
        raise EmptyResult(f"no valid rows in {source}")

    if skipped:
        logger.info(f"📅 {skipped} row(s) outside the study period {study_period} skipped")
    years = tuple(sorted({r.year for r in records}))
    logger.info(f"📥 Panel loaded: {len(cells)} cells, {len(records)} records, years {years[0]}-{years[-1]}")
    return PanelDataset(tuple(cells.values()), tuple(records), years)


_PANEL_FIXED = ("cell_id", "year", "centroid_lon", "centroid_lat", "cell_size_m", "outcome")


def read_panel(path: str) -> PanelDataset:
    """Reload a panel written by `panel_frame`: every non-fixed, non-`abund_` column is environment"""
    if not os.path.exists(path):
        raise MissingArtifact(f"artifact not found: {path}")
    columns = list(pd.read_csv(path, nrows=0).columns)
    schema = PanelSchema(
        abundances={c[len(ABUNDANCE_PREFIX):]: c for c in columns if c.startswith(ABUNDANCE_PREFIX)},
        environment={c: c for c in columns
                     if c not in _PANEL_FIXED and not c.startswith(ABUNDANCE_PREFIX)},
    )
    return load_panel(path, schema)


def panel_frame(panel: PanelDataset) -> pd.DataFrame:
    """Panel as a CSV-ready frame with `abund_` prefixed crop columns"""
    lookup = panel.cell_lookup()
    crops = panel.crop_names()
    env = panel.environment_names()
    rows = []
    for rec in sorted(panel.records, key=lambda r: (r.cell_id, r.year)):
        cell = lookup[rec.cell_id]
        row = {"cell_id": rec.cell_id, "year": rec.year,
               "centroid_lon": cell.centroid_lon, "centroid_lat": cell.centroid_lat,
               "cell_size_m": cell.cell_size_m, "outcome": rec.outcome}
        row.update({f"{ABUNDANCE_PREFIX}{c}": rec.abundances.get(c, 0.0) for c in crops})
        row.update({name: rec.environment.get(name) for name in env})
        rows.append(row)
    return pd.DataFrame(rows)


# ============================================
# 💾 TABLE I/O
# ============================================
def write_frame(frame: pd.DataFrame, path: str) -> str:
    """Deterministic CSV (fixed float format, `\\n` line endings)"""
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    frame.to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n",
                 encoding="utf-8")
    return path


def read_frame(path: str) -> pd.DataFrame:
    if not os.path.exists(path):
        raise MissingArtifact(f"artifact not found: {path}")
    return pd.read_csv(path, encoding="utf-8", dtype={"cell_id": str})


def read_grid(path: str) -> List[GridCell]:
    """Grid CSV: cell_id, centroid_lon, centroid_lat[, cell_size_m]"""
    frame = read_frame(path)
    missing = [c for c in ("cell_id", "centroid_lon", "centroid_lat") if c not in frame.columns]
    if missing:
        raise MissingColumn(f"grid file lacks {missing}")
    sizes = frame["cell_size_m"] if "cell_size_m" in frame.columns else [config.CELL_SIZE_M] * len(frame)
    return [GridCell(str(cid), float(lon), float(lat), float(size))
            for cid, lon, lat, size in zip(frame["cell_id"], frame["centroid_lon"],
                                           frame["centroid_lat"], sizes)]


def abundance_frame(year_maps: Mapping[int, Mapping[str, Mapping[str, float]]]) -> pd.DataFrame:
    """Long table cell_id, year, crop, abundance (sorted)"""
    rows = [{"cell_id": cell_id, "year": year, "crop": crop, "abundance": value}
            for year, cells in year_maps.items()
            for cell_id, crops in cells.items()
            for crop, value in crops.items()]
    frame = pd.DataFrame(rows, columns=["cell_id", "year", "crop", "abundance"])
    return frame.sort_values(["cell_id", "year", "crop"], kind="mergesort").reset_index(drop=True)


def practices_frame(records: Sequence[PracticeRecord]) -> pd.DataFrame:
    frame = pd.DataFrame(
        [{"cell_id": r.cell_id, "year": r.year, "shannon_H": r.shannon_H,
          "rotation_delta": r.rotation_delta} for r in records],
        columns=["cell_id", "year", "shannon_H", "rotation_delta"],
    )
    return frame.sort_values(["cell_id", "year"], kind="mergesort").reset_index(drop=True)


def read_practices(path: str) -> List[PracticeRecord]:
    frame = read_frame(path)
    frame["cell_id"] = frame["cell_id"].astype(str)
    return [PracticeRecord(row.cell_id, int(row.year), float(row.shannon_H),
                           None if pd.isna(row.rotation_delta) else float(row.rotation_delta))
            for row in frame.itertuples(index=False)]


# ============================================
# 🧮 CROSS-SECTION
# ============================================
_CS_FIXED = ("cell_id", "centroid_lon", "centroid_lat", "treatment_raw", "treatment", "outcome")


def cross_section_frame(rows: Sequence[CrossSection]) -> pd.DataFrame:
    """cell_id, centroid_lon, centroid_lat, <features>, treatment_raw, treatment, outcome, <extras>"""
    records = []
    for r in rows:
        row: Dict[str, Any] = {"cell_id": r.cell_id, "centroid_lon": r.centroid_lon,
                               "centroid_lat": r.centroid_lat}
        row.update(r.features)
        row.update({"treatment_raw": r.treatment_raw,
                    "treatment": None if r.treatment is None else int(r.treatment),
                    "outcome": r.outcome})
        row.update(r.extras)
        records.append(row)
    frame = pd.DataFrame(records)
    if "treatment" in frame.columns:
        frame["treatment"] = frame["treatment"].astype("Int64")
    return frame


def write_cross_section(rows: Sequence[CrossSection], path: str) -> str:
    return write_frame(cross_section_frame(rows), path)


def read_cross_section(path: str, extra_columns: Sequence[str] = ("true_cate", "propensity")
                       ) -> List[CrossSection]:
    """Inverse of write_cross_section; every non-fixed, non-extra column is a feature"""
    frame = read_frame(path)
    missing = [c for c in ("cell_id", "treatment_raw", "outcome") if c not in frame.columns]
    if missing:
        raise MissingColumn(f"cross-section lacks {missing}")
    features = [c for c in frame.columns if c not in _CS_FIXED and c not in extra_columns]
    extras = [c for c in extra_columns if c in frame.columns]
    rows = []
    for rec in frame.to_dict(orient="records"):
        treatment = rec.get("treatment")
        rows.append(CrossSection(
            cell_id=str(rec["cell_id"]),
            features={name: float(rec[name]) for name in features},
            treatment_raw=float(rec["treatment_raw"]),
            outcome=float(rec["outcome"]),
            treatment=None if treatment is None or pd.isna(treatment) else int(treatment),
            centroid_lon=float(rec.get("centroid_lon", float("nan"))),
            centroid_lat=float(rec.get("centroid_lat", float("nan"))),
            extras={name: float(rec[name]) for name in extras},
        ))
    return rows
