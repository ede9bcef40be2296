"""
============================================
📝 Logger Utility
Causal Land Suitability Pipeline
One process-wide logger: a daily file under LOGS_DIR plus stderr
(stdout stays free for data). Stage helpers keep messages uniform.
============================================
"""

import logging
import os
import sys
from collections import Counter
from datetime import date
from typing import List, Optional, Sequence, Tuple

# Add parent directory to path
sys.path.append(os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__)))))

from config import config

LOGGER_NAME = "CausalSuitability"
FILE_FORMAT = "%(asctime)s | %(levelname)-8s | %(module)s:%(lineno)d | %(message)s"
CONSOLE_FORMAT = "%(asctime)s | %(levelname)-8s | %(message)s"


def _build_handlers(log_dir: str, debug: bool) -> List[logging.Handler]:
    os.makedirs(log_dir, exist_ok=True)
    log_path = os.path.join(log_dir, f"pipeline_{date.today():%Y-%m-%d}.log")

    file_handler = logging.FileHandler(log_path, encoding="utf-8")
    file_handler.setLevel(logging.DEBUG)
    file_handler.setFormatter(logging.Formatter(FILE_FORMAT, datefmt="%Y-%m-%d %H:%M:%S"))

    # warnings only on the console unless CSL_DEBUG is set
    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(logging.DEBUG if debug else logging.WARNING)
    console_handler.setFormatter(logging.Formatter(CONSOLE_FORMAT, datefmt="%H:%M:%S"))
    return [file_handler, console_handler]


class Logger:
    """Singleton wrapper around the `CausalSuitability` logging.Logger"""

    _instance: Optional["Logger"] = None

    def __new__(cls) -> "Logger":
        if cls._instance is None:
            instance = super().__new__(cls)
            instance._logger = logging.getLogger(LOGGER_NAME)
            instance._logger.setLevel(logging.DEBUG if config.DEBUG else logging.INFO)
            if not instance._logger.handlers:
                for handler in _build_handlers(config.LOGS_DIR, config.DEBUG):
                    instance._logger.addHandler(handler)
            cls._instance = instance
        return cls._instance

    # ============================================
    # 🔊 LEVELS
    # ============================================
    def debug(self, message: str) -> None:
        self._logger.debug(message)

    def info(self, message: str) -> None:
        self._logger.info(message)

    def warning(self, message: str) -> None:
        self._logger.warning(message)

    def error(self, message: str) -> None:
        self._logger.error(message)

    def exception(self, message: str) -> None:
        """Error with the active traceback"""
        self._logger.exception(message)

    # ============================================
    # 🚦 PIPELINE EVENTS
    # ============================================
    def log_stage_start(self, stage: str, seed: Optional[int]) -> None:
        """Log pipeline stage start"""
        self._logger.info("=" * 50)
        self._logger.info(f"▶️  Stage '{stage}' started - seed={seed}")

    def log_stage_end(self, stage: str, n_artifacts: int, seconds: float) -> None:
        """Log pipeline stage end"""
        self._logger.info(
            f"✅ Stage '{stage}' finished - artifacts={n_artifacts}, duration={seconds:.1f}s"
        )

    def log_trim(self, n_in: int, n_kept: int, low: float, high: float) -> None:
        """Log propensity trimming outcome"""
        self._logger.info(
            f"✂️  Overlap trim ({low:.2f}, {high:.2f}): kept {n_kept}/{n_in} units"
        )

    def log_first_stage(self, scores: dict) -> None:
        """
        Log first-stage generalization scores.

        Args:
            scores: dict with outcome_train_r2, outcome_test_r2,
                    treatment_train_f1, treatment_test_f1 and model families
        """
        self._logger.info(
            f"📊 First stage - Y~X ({scores.get('outcome_family')}): "
            f"R2 train={scores.get('outcome_train_r2', float('nan')):.3f} "
            f"test={scores.get('outcome_test_r2', float('nan')):.3f} | "
            f"T~X ({scores.get('treatment_family')}): "
            f"F1 train={scores.get('treatment_train_f1', float('nan')):.3f} "
            f"test={scores.get('treatment_test_f1', float('nan')):.3f}"
        )

    def log_ate(self, label: str, ate: float, ci: Tuple[float, float]) -> None:
        """Log ATE with its 95% interval"""
        self._logger.info(f"🎯 {label}: ATE={ate:.4f}, 95% CI=[{ci[0]:.4f}, {ci[1]:.4f}]")

    def log_diagnostics(self, diagnostics: Sequence) -> None:
        """Log a compact summary of row diagnostics (full list goes to stderr)"""
        if not diagnostics:
            return
        codes = Counter(diag.code for diag in diagnostics)
        summary = ", ".join(f"{code}={count}" for code, count in sorted(codes.items()))
        self._logger.warning(f"⚠️  {len(diagnostics)} row diagnostics ({summary})")


# Create singleton instance
logger = Logger()
