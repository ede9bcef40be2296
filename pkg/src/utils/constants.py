"""
============================================
📋 Constants & Enums
Causal Land Suitability Pipeline
============================================
"""

from enum import Enum, IntEnum


class TreatmentKind(Enum):
    """Agricultural practice used as treatment"""
    CROP_ROTATION = "cr"
    LANDSCAPE_CROP_DIVERSITY = "lcd"

    @classmethod
    def parse(cls, value) -> "TreatmentKind":
        if isinstance(value, cls):
            return value
        aliases = {
            "cr": cls.CROP_ROTATION,
            "crop_rotation": cls.CROP_ROTATION,
            "lcd": cls.LANDSCAPE_CROP_DIVERSITY,
            "landscape_crop_diversity": cls.LANDSCAPE_CROP_DIVERSITY,
        }
        key = str(value).strip().lower()
        if key not in aliases:
            raise ValueError(f"Unknown treatment '{value}' (expected cr or lcd)")
        return aliases[key]


class AggregationKind(Enum):
    """How a per-year treatment series collapses over the study period"""
    SUM = "sum"      # crop rotation: total rotations
    MEAN = "mean"    # landscape crop diversity: mean of all years


class FinalStageKind(Enum):
    """Final-stage effect model"""
    LINEAR = "linear"
    CAUSAL_FOREST = "causal_forest"


class CateBasis(Enum):
    """Feature basis of the linear final stage"""
    INTERCEPT_ONLY = "intercept_only"
    LINEAR_IN_X = "linear_in_X"


class ModelFamily(Enum):
    """Learner families available to the first stage"""
    RANDOM_FOREST = "random_forest"
    RANDOM_FOREST_CLASSIFIER = "random_forest_classifier"
    GRADIENT_BOOSTING = "gradient_boosting"
    GRADIENT_BOOSTING_CLASSIFIER = "gradient_boosting_classifier"
    LASSO = "lasso"
    LOGISTIC = "logistic"
    REGRESSION_TREE = "regression_tree"

    @property
    def is_classifier(self) -> bool:
        return self in (
            ModelFamily.RANDOM_FOREST_CLASSIFIER,
            ModelFamily.GRADIENT_BOOSTING_CLASSIFIER,
            ModelFamily.LOGISTIC,
        )


class Scoring(Enum):
    """Cross-validation score"""
    R2 = "r2"
    F1 = "f1"


class BoostingLoss(Enum):
    SQUARED = "squared"
    LOGISTIC = "logistic"


class ThetaKind(Enum):
    """Shape of the synthetic treatment effect"""
    CONSTANT = "constant"
    LINEAR = "linear"
    STEP = "step"
    QUADRATIC = "quadratic"


class AssignmentKind(Enum):
    """Synthetic treatment assignment mechanism"""
    LOGISTIC = "logistic"
    DETERMINISTIC = "deterministic"


class Stage(Enum):
    """Pipeline stages (CLI subcommands)"""
    INGEST = "ingest"
    PRACTICES = "practices"
    FIT = "fit"
    INTERPRET = "interpret"
    REPORT = "report"
    SIMULATE = "simulate"


class ExitCode(IntEnum):
    """Process exit codes"""
    SUCCESS = 0
    CONFIG_ERROR = 2
    DATA_ERROR = 3
    ESTIMATION_ERROR = 4


# ============================================
# 📐 NUMERICAL CONSTANTS
# ============================================
class Thresholds:
    """Tolerances shared by the estimators"""

    ABUNDANCE_SUM_TOL = 1e-9      # per-cell abundance sum may exceed 1 by this
    RESIDUAL_VARIANCE_MIN = 1e-12  # var(T_res) below this is degenerate
    LEAF_WEIGHT_MIN = 1e-8         # min sum(T_res^2) in a causal-tree child
    PROBABILITY_CLIP = 1e-6        # propensities clipped to [eps, 1 - eps]
    LOGISTIC_GRAD_TOL = 1e-8
    LASSO_COEF_TOL = 1e-10
    Z_95 = 1.96                    # normal quantile for 95% intervals


class Defaults:
    """Default hyperparameter grids"""

    FOREST_GRID = {
        "n_trees": [100],
        "max_depth": [None, 10, 20],
        "min_samples_leaf": [1, 5, 20],
    }
    BOOSTING_GRID = {
        "n_stages": [100, 300],
        "learning_rate": [0.05, 0.1],
        "max_depth": [3],
    }
    LOGISTIC_GRID = {"l2_penalty": [0.01, 0.1, 1.0]}
    LASSO_GRID = {"l1_penalty": [1e-4, 1e-3, 1e-2, 1e-1, 1.0]}

    PROPENSITY_MODEL = {"n_stages": 100, "learning_rate": 0.1, "max_depth": 3}

    CATE_QUANTILES = (0.05, 0.25, 0.5, 0.75, 0.95)


# ============================================
# 📝 FILE NAMES
# ============================================
class ArtifactNames:
    """Output file names inside a run directory"""
    PANEL = "panel.csv"
    ABUNDANCES = "abundances.csv"
    PRACTICES = "practices.csv"
    CROSS_SECTION = "cross_section.csv"
    PROPENSITY = "propensity.csv"
    MODEL = "cate_model.json"
    FIRST_STAGE = "first_stage.json"
    CATES = "cates.csv"
    TREE_TEXT = "interpretation_tree.txt"
    TREE_JSON = "interpretation_tree.json"
    MAP_CSV = "suitability_map.csv"
    MAP_GEOJSON = "suitability_map.geojson"
    HISTOGRAM = "cate_histogram.csv"
    FEATURE_PAIRS = "cate_feature_pairs.csv"
    SPEARMAN = "spearman.csv"
    SHIFT = "counterfactual_shift.csv"
    SUMMARY = "summary.json"
    ORACLE = "oracle.json"
    MANIFEST_SUFFIX = "_manifest.json"
