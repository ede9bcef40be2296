"""
Utils package initialization
"""

from .constants import (
    TreatmentKind,
    AggregationKind,
    FinalStageKind,
    CateBasis,
    ModelFamily,
    Scoring,
    ExitCode,
    Thresholds,
    Defaults,
)

from .logger import logger as app_logger

__all__ = [
    'TreatmentKind',
    'AggregationKind',
    'FinalStageKind',
    'CateBasis',
    'ModelFamily',
    'Scoring',
    'ExitCode',
    'Thresholds',
    'Defaults',
    'app_logger',
]
