"""
============================================
📐 Polygon Geometry
Causal Land Suitability Pipeline
- Parcel validation (shapely validity checks)
- Exact area of a simple polygon clipped to an axis-aligned rectangle
============================================
"""

from typing import Sequence, Tuple

import numpy as np
from shapely.geometry import Polygon

from src.models.practice_model import Parcel
from src.utils.exceptions import DegeneratePolygon, NonSimplePolygon
from src.utils.math_helpers import polygon_signed_area

Bounds = Tuple[float, float, float, float]


def validate_parcel(parcel: Parcel) -> None:
    """
    Raises:
        DegeneratePolygon: fewer than 3 vertices or zero area
        NonSimplePolygon: self-intersecting ring or invalid holes
    """
    ring = parcel.polygon
    if len(ring) < 3:
        raise DegeneratePolygon(f"parcel '{parcel.parcel_id}' has {len(ring)} vertices")
    if abs(polygon_signed_area(ring)) == 0.0:
        raise DegeneratePolygon(f"parcel '{parcel.parcel_id}' has zero area")
    shape = Polygon(ring, [list(h) for h in parcel.holes])
    if not shape.exterior.is_simple or not shape.is_valid:
        raise NonSimplePolygon(f"parcel '{parcel.parcel_id}' is not a simple polygon")


def _clipped_edge_integral(x1: float, y1: float, x2: float, y2: float, bounds: Bounds) -> float:
    """
    ∫ (clamp(y(x), ymin, ymax) - ymin) dx along one edge, restricted to
    [xmin, xmax], signed by the edge's x direction.
    """
    xmin, ymin, xmax, ymax = bounds
    if x1 == x2:
        return 0.0
    lo = max(min(x1, x2), xmin)
    hi = min(max(x1, x2), xmax)
    if hi <= lo:
        return 0.0
    slope = (y2 - y1) / (x2 - x1)

    def height(x: float) -> float:
        return min(max(y1 + slope * (x - x1), ymin), ymax) - ymin

    # clamp(y) is linear between the points where y crosses ymin or ymax
    cuts = [lo, hi]
    if slope != 0.0:
        for level in (ymin, ymax):
            xc = x1 + (level - y1) / slope
            if lo < xc < hi:
                cuts.append(xc)
    cuts.sort()
    total = 0.0
    for a, b in zip(cuts[:-1], cuts[1:]):
        total += (b - a) * height(0.5 * (a + b))
    return total if x2 > x1 else -total


def ring_rectangle_area(ring: Sequence[Tuple[float, float]], bounds: Bounds) -> float:
    """Area of (simple ring) ∩ (rectangle); orientation-independent"""
    pts = np.asarray(ring, dtype=float)
    total = 0.0
    n = pts.shape[0]
    for i in range(n):
        x1, y1 = pts[i]
        x2, y2 = pts[(i + 1) % n]
        total += _clipped_edge_integral(x1, y1, x2, y2, bounds)
    return abs(total)


def parcel_rectangle_area(parcel: Parcel, bounds: Bounds) -> float:
    """Clipped exterior area minus clipped hole areas"""
    area = ring_rectangle_area(parcel.polygon, bounds)
    for hole in parcel.holes:
        area -= ring_rectangle_area(hole, bounds)
    return max(area, 0.0)


def ring_bounds(ring: Sequence[Tuple[float, float]]) -> Bounds:
    pts = np.asarray(ring, dtype=float)
    return (float(pts[:, 0].min()), float(pts[:, 1].min()),
            float(pts[:, 0].max()), float(pts[:, 1].max()))


def boxes_overlap(a: Bounds, b: Bounds) -> bool:
    return a[0] < b[2] and b[0] < a[2] and a[1] < b[3] and b[1] < a[3]
