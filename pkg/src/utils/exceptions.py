"""
============================================
🚨 Error Hierarchy
Causal Land Suitability Pipeline
Every error carries a machine-readable code and the process exit code
============================================
"""

import sys
from dataclasses import dataclass
from typing import Iterable, List, Optional, TextIO

from src.utils.constants import ExitCode


@dataclass(frozen=True)
class Diagnostic:
    """Row-level ingestion diagnostic"""
    row: int
    code: str
    detail: str

    def format(self) -> str:
        return f"row={self.row} code={self.code} detail={self.detail}"


def emit_diagnostics(diagnostics: Iterable[Diagnostic], stream: Optional[TextIO] = None) -> None:
    """Write diagnostics to stderr, one `row=<n> code=<CODE> detail=<text>` line each."""
    stream = stream or sys.stderr
    for diag in diagnostics:
        stream.write(diag.format() + "\n")
    stream.flush()


class SuitabilityError(ValueError):
    """Base class of all pipeline errors"""
    code = "ERROR"
    exit_code = ExitCode.DATA_ERROR

    def __init__(self, message: str = "", diagnostics: Optional[List[Diagnostic]] = None):
        super().__init__(message or self.code)
        self.diagnostics: List[Diagnostic] = list(diagnostics or [])


# ----------------------------------
# Config errors (exit 2)
# ----------------------------------
class ConfigError(SuitabilityError):
    code = "CONFIG"
    exit_code = ExitCode.CONFIG_ERROR


# ----------------------------------
# Data errors (exit 3)
# ----------------------------------
class DataError(SuitabilityError):
    code = "DATA"
    exit_code = ExitCode.DATA_ERROR


class MissingColumn(DataError):
    code = "MISSING_COLUMN"


class MalformedNumber(DataError):
    code = "MALFORMED_NUMBER"


class DuplicateRecord(DataError):
    code = "DUPLICATE_RECORD"


class EmptyResult(DataError):
    code = "EMPTY_RESULT"


class InconsistentYears(DataError):
    code = "INCONSISTENT_YEARS"


class DegeneratePolygon(DataError):
    code = "DEGENERATE_POLYGON"


class NonSimplePolygon(DataError):
    code = "NON_SIMPLE_POLYGON"


class TooFewYears(DataError):
    code = "TOO_FEW_YEARS"


class AllZero(DataError):
    code = "ALL_ZERO"


class ConstantTreatment(DataError):
    code = "CONSTANT_TREATMENT"


class MissingArtifact(DataError):
    code = "MISSING_ARTIFACT"


class UnknownFeature(DataError):
    code = "UNKNOWN_FEATURE"


class DimensionMismatch(DataError):
    code = "DIMENSION_MISMATCH"


class ConstantInput(DataError):
    code = "CONSTANT_INPUT"


class EmptyData(DataError):
    code = "EMPTY_DATA"


class ZeroVariance(DataError):
    code = "ZERO_VARIANCE"


class UndefinedF1(DataError):
    code = "UNDEFINED_F1"


class InvalidSpec(DataError):
    code = "INVALID_SPEC"


# ----------------------------------
# Estimation errors (exit 4)
# ----------------------------------
class EstimationError(SuitabilityError):
    code = "ESTIMATION"
    exit_code = ExitCode.ESTIMATION_ERROR


class SingleClass(EstimationError):
    code = "SINGLE_CLASS"


class NonConvergence(EstimationError):
    code = "NON_CONVERGENCE"


class DegenerateResiduals(EstimationError):
    code = "DEGENERATE_RESIDUALS"
