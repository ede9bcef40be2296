"""
============================================
⚙️ CONFIGURATION FILE
Causal Land Suitability Pipeline
============================================
"""
import os
from dotenv import load_dotenv

# Load environment variables from .env file (if exists)
load_dotenv()


class Config:
    # ----------------------------------
    # 1. APPLICATION SETTINGS
    # ----------------------------------
    APP_NAME = "Causal Land Suitability"
    APP_VERSION = "1.0.0"
    DEBUG = os.getenv("CSL_DEBUG", "0").lower() in ("1", "true", "yes")

    # ----------------------------------
    # 2. PATHS & DIRECTORIES
    # ----------------------------------
    BASE_DIR = os.path.dirname(os.path.abspath(__file__))

    LOGS_DIR = os.getenv("CSL_LOGS_DIR", os.path.join(BASE_DIR, "logs"))
    OUTPUT_DIR = os.getenv("CSL_OUTPUT_DIR", os.path.join(BASE_DIR, "runs"))

    os.makedirs(LOGS_DIR, exist_ok=True)

    # ----------------------------------
    # 3. STUDY DESIGN
    # ----------------------------------
    STUDY_PERIOD = (
        int(os.getenv("CSL_STUDY_START", 2010)),
        int(os.getenv("CSL_STUDY_END", 2020)),
    )
    CELL_SIZE_M = float(os.getenv("CSL_CELL_SIZE_M", 500.0))

    # Only cells whose period-mean total crop abundance reaches this are kept
    CROPLAND_THRESHOLD = float(os.getenv("CSL_CROPLAND_THRESHOLD", 0.8))

    # Controls: dominant crops + climate variables
    MAJOR_CROPS = ("grassland", "maize", "potato", "wheat")
    MAJOR_CROP_MIN_MEDIAN = 0.02
    ENVIRONMENT_FEATURES = ("tmax", "tmin", "aet", "def", "ppt", "soil", "srad", "vap")

    # ----------------------------------
    # 4. OVERLAP (PROPENSITY TRIMMING)
    # ----------------------------------
    PROPENSITY_LOW = float(os.getenv("CSL_PROPENSITY_LOW", 0.2))
    PROPENSITY_HIGH = float(os.getenv("CSL_PROPENSITY_HIGH", 0.8))

    # ----------------------------------
    # 5. DOUBLE MACHINE LEARNING
    # ----------------------------------
    K_FOLDS = 3
    EVAL_SPLIT = 0.2        # 80-20 first-stage report split
    MIN_UNITS = int(os.getenv("CSL_MIN_UNITS", 200))

    # Final stage
    CAUSAL_FOREST_TREES = int(os.getenv("CSL_FOREST_TREES", 1000))
    CAUSAL_FOREST_SUBSAMPLE = 0.45
    CAUSAL_FOREST_MIN_LEAF = 5

    # ----------------------------------
    # 6. REPORTING
    # ----------------------------------
    INTERPRET_DEPTH = 2
    HISTOGRAM_BINS = 30
    EXTRAPOLATION_FLAG_FRACTION = 0.05

    # ----------------------------------
    # 7. PERFORMANCE
    # ----------------------------------
    # joblib workers for trees / folds / grid points (--threads overrides)
    N_JOBS = int(os.getenv("CSL_THREADS", 1))


# Global Config Instance
config = Config()
