"""
======================================================
🗺️ GeoJSON Store
Causal Land Suitability Pipeline
Parcel declarations in, suitability points out.
======================================================
"""
import json
import math
import os
from typing import Any, Dict, List, Optional

import pandas as pd
from shapely.geometry import MultiPolygon, Polygon, shape

from src.models.practice_model import Parcel
from src.utils.exceptions import DegeneratePolygon, InvalidSpec, MissingArtifact, MissingColumn
from src.utils.logger import logger


def _ring(coords) -> tuple:
    points = [(float(x), float(y)) for x, y, *_ in coords]
    if len(points) > 1 and points[0] == points[-1]:
        points = points[:-1]
    return tuple(points)


def _parts(geometry) -> List[Polygon]:
    if isinstance(geometry, Polygon):
        return [geometry]
    if isinstance(geometry, MultiPolygon):
        return list(geometry.geoms)
    raise DegeneratePolygon(f"unsupported geometry type {geometry.geom_type}")


def load_parcels(path: str, crop_field: str = "crop", year_field: str = "year",
                 id_field: str = "parcel_id", default_year: Optional[int] = None) -> List[Parcel]:
    """
    Read a FeatureCollection of declared parcels. MultiPolygon features are
    split into one Parcel per part (`<id>#<k>`).

    Raises:
        MissingArtifact, MissingColumn
    """
    if not os.path.exists(path):
        raise MissingArtifact(f"parcel file not found: {path}")
    with open(path, "r", encoding="utf-8") as f:
        collection = json.load(f)
    if collection.get("type") != "FeatureCollection":
        raise InvalidSpec(f"{path} is not a GeoJSON FeatureCollection")

    parcels: List[Parcel] = []
    for index, feature in enumerate(collection.get("features", []), start=1):
        props = feature.get("properties") or {}
        if crop_field not in props:
            raise MissingColumn(f"feature {index} has no '{crop_field}' property")
        year = props.get(year_field, default_year)
        if year is None:
            raise MissingColumn(f"feature {index} has no '{year_field}' property")
        parcel_id = str(props.get(id_field, feature.get("id", index)))
        parts = _parts(shape(feature["geometry"]))
        for k, part in enumerate(parts):
            pid = parcel_id if len(parts) == 1 else f"{parcel_id}#{k}"
            parcels.append(Parcel(
                parcel_id=pid,
                polygon=_ring(part.exterior.coords),
                crop=str(props[crop_field]),
                year=int(year),
                holes=tuple(_ring(h.coords) for h in part.interiors),
            ))
    logger.info(f"📥 Loaded {len(parcels)} parcels from {os.path.basename(path)}")
    return parcels


def _json_value(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if hasattr(value, "item"):
        return _json_value(value.item())
    return value


def write_point_collection(frame: pd.DataFrame, path: str,
                           lon: str = "centroid_lon", lat: str = "centroid_lat") -> str:
    """One Point feature per row; every other column becomes a property"""
    missing = [c for c in (lon, lat) if c not in frame.columns]
    if missing:
        raise MissingColumn(f"point export needs {missing}")
    features: List[Dict[str, Any]] = []
    for rec in frame.to_dict(orient="records"):
        features.append({
            "type": "Feature",
            "geometry": {"type": "Point",
                         "coordinates": [_json_value(rec[lon]), _json_value(rec[lat])]},
            "properties": {k: _json_value(v) for k, v in rec.items() if k not in (lon, lat)},
        })
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump({"type": "FeatureCollection", "features": features}, f,
                  sort_keys=True, indent=1, allow_nan=False)
        f.write("\n")
    return path
