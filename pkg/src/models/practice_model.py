"""
======================================================
🌾 Practice Data Model
Causal Land Suitability Pipeline
Parcel declarations, per-cell practice metrics and treatment assignments.
======================================================
"""
from dataclasses import dataclass, field
from typing import Optional, Tuple

Ring = Tuple[Tuple[float, float], ...]


@dataclass(frozen=True)
class Parcel:
    """
    Declared parcel. `polygon` is the exterior ring (closed implicitly),
    `holes` optional interior rings.
    """
    parcel_id: str
    polygon: Ring
    crop: str
    year: int
    holes: Tuple[Ring, ...] = field(default_factory=tuple)


@dataclass(frozen=True)
class PracticeRecord:
    """Practice metrics of one cell in one year"""
    cell_id: str
    year: int
    shannon_H: float                        # nats
    rotation_delta: Optional[float] = None  # change vs previous year; None for the first year


@dataclass(frozen=True)
class TreatmentAssignment:
    cell_id: str
    treatment_raw: float
    treated: int
