"""
======================================================
⚙️ Run Configuration Model
Causal Land Suitability Pipeline
One JSON file per run; CLI flags override file values, and anything left
unset falls back to the global `config` defaults.
======================================================
"""
import json
import os
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

from config import config
from src.utils.constants import CateBasis, FinalStageKind, Stage, TreatmentKind
from src.utils.exceptions import ConfigError, SuitabilityError


@dataclass(frozen=True)
class RunConfig:
    # --- inputs ---
    panel_path: Optional[str] = None
    parcels_path: Optional[str] = None
    grid_path: Optional[str] = None
    schema: Optional[Dict[str, Any]] = None
    strict: bool = True

    # --- study design ---
    treatment: TreatmentKind = TreatmentKind.CROP_ROTATION
    study_period: Tuple[int, int] = config.STUDY_PERIOD
    cropland_threshold: float = config.CROPLAND_THRESHOLD
    major_crops: Optional[Tuple[str, ...]] = None

    # --- estimation ---
    trim_low: float = config.PROPENSITY_LOW
    trim_high: float = config.PROPENSITY_HIGH
    k_folds: int = config.K_FOLDS
    propensity: Optional[Dict[str, Any]] = None
    nuisance: Optional[Dict[str, Any]] = None
    final_stage: FinalStageKind = FinalStageKind.LINEAR
    cate_basis: CateBasis = CateBasis.INTERCEPT_ONLY
    forest: Optional[Dict[str, Any]] = None
    forest_grid: Optional[Dict[str, List[Any]]] = None
    min_units: int = config.MIN_UNITS

    # --- reporting ---
    interpret_depth: int = config.INTERPRET_DEPTH
    histogram_bins: int = config.HISTOGRAM_BINS
    pair_features: Optional[Tuple[str, ...]] = None
    shift: Optional[Dict[str, float]] = None

    # --- simulation ---
    synthetic: Optional[Dict[str, Any]] = None

    # --- run ---
    seed: Optional[int] = None
    out_dir: str = config.OUTPUT_DIR
    threads: int = config.N_JOBS

    def __post_init__(self):
        try:
            object.__setattr__(self, "treatment", TreatmentKind.parse(self.treatment))
            object.__setattr__(self, "final_stage", FinalStageKind(self.final_stage))
            object.__setattr__(self, "cate_basis", CateBasis(self.cate_basis))
            object.__setattr__(self, "study_period", tuple(int(y) for y in self.study_period))
        except (ValueError, TypeError) as e:
            raise ConfigError(str(e))
        if self.major_crops is not None:
            object.__setattr__(self, "major_crops", tuple(self.major_crops))
        if self.pair_features is not None:
            object.__setattr__(self, "pair_features", tuple(self.pair_features))

    # ============================================
    # 📥 LOADING
    # ============================================
    @classmethod
    def from_dict(cls, data: Mapping[str, Any], base_dir: str = "") -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown config keys {unknown}")
        values = dict(data)
        # relative input paths are resolved against the config file
        for key in ("panel_path", "parcels_path", "grid_path", "out_dir"):
            if values.get(key) and base_dir and not os.path.isabs(values[key]):
                values[key] = os.path.normpath(os.path.join(base_dir, values[key]))
        return cls(**values)

    @classmethod
    def from_file(cls, path: str) -> "RunConfig":
        if not os.path.exists(path):
            raise ConfigError(f"config file not found: {path}")
        try:
            with open(path, "r", encoding="utf-8") as f:
                data = json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigError(f"invalid JSON in {path}: {e}")
        if not isinstance(data, dict):
            raise ConfigError(f"{path} must hold a JSON object")
        return cls.from_dict(data, os.path.dirname(os.path.abspath(path)))

    def with_overrides(self, **flags: Any) -> "RunConfig":
        """Flags win over file values; None means 'not given'"""
        given = {k: v for k, v in flags.items() if v is not None}
        try:
            return replace(self, **given)
        except TypeError as e:
            raise ConfigError(f"bad override: {e}")

    # ============================================
    # ✅ VALIDATION
    # ============================================
    def validate(self, stage: Stage) -> "RunConfig":
        """
        Raises:
            ConfigError: missing seed, missing input file, or out-of-range value
        """
        if self.seed is None:
            raise ConfigError("a seed is mandatory (--seed or \"seed\" in the config file)")
        if int(self.seed) < 0:
            raise ConfigError(f"seed must be non-negative, got {self.seed}")
        if self.threads == 0:
            raise ConfigError("threads must be non-zero")
        if not 0.0 <= self.trim_low < self.trim_high <= 1.0:
            raise ConfigError(f"trim bounds must satisfy 0 <= low < high <= 1, "
                              f"got ({self.trim_low}, {self.trim_high})")
        if not 0.0 <= self.cropland_threshold <= 1.0:
            raise ConfigError(f"cropland_threshold must be in [0, 1], got {self.cropland_threshold}")
        if self.interpret_depth < 1:
            raise ConfigError(f"interpret_depth must be >= 1, got {self.interpret_depth}")
        if self.study_period[0] > self.study_period[1]:
            raise ConfigError(f"study period {self.study_period} is reversed")

        if stage is Stage.INGEST:
            if not self.panel_path:
                raise ConfigError("ingest needs panel_path")
            for key in ("panel_path", "parcels_path", "grid_path"):
                path = getattr(self, key)
                if path and not os.path.exists(path):
                    raise ConfigError(f"{key} does not exist: {path}")
            if self.grid_path and not self.parcels_path:
                raise ConfigError("grid_path given without parcels_path")
        return self

    # ============================================
    # 🧾 SERIALIZATION
    # ============================================
    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["treatment"] = self.treatment.value
        data["final_stage"] = self.final_stage.value
        data["cate_basis"] = self.cate_basis.value
        data["study_period"] = list(self.study_period)
        return data

    def stage_settings(self, keys: Sequence[str]) -> Dict[str, Any]:
        """The subset of settings a stage depends on (the manifest digest input)"""
        data = self.to_dict()
        return {k: data[k] for k in keys}

    def path(self, name: str) -> str:
        return os.path.join(self.out_dir, name)


@dataclass
class StageResult:
    stage: Stage
    artifacts: List[str] = field(default_factory=list)
    manifest: Optional[str] = None
    summary: Dict[str, Any] = field(default_factory=dict)


def stage_failure(stage: Stage, error: SuitabilityError) -> str:
    """`stage=<stage> code=<CODE> detail=<msg>` line for standard error"""
    detail = str(error).replace("\n", " ")
    return f"stage={stage.value} code={error.code} detail={detail}"
