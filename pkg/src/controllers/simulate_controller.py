"""
======================================================
🧪 Simulate Controller
Causal Land Suitability Pipeline
Synthetic cross-section with a known effect, in the same format the
practices stage writes, plus the oracle.
======================================================
"""
from src.ai_core.synthetic import (
    SyntheticSpec, difference_in_means, generate_plm, generate_plm_continuous,
)
from src.database.model_store import save_json
from src.database.panel_store import write_cross_section
from src.models.run_config_model import RunConfig, StageResult
from src.controllers.stage_support import begin_stage, finish_stage
from src.utils.constants import ArtifactNames, Stage
from src.utils.logger import logger

SETTINGS = ("synthetic",)


def cmd_simulate(run: RunConfig) -> StageResult:
    """
    `synthetic` settings are SyntheticSpec fields plus an optional
    `"continuous": true` for the continuous raw-treatment variant. The run
    seed always wins over a seed in the settings.
    """
    run = run.validate(Stage.SIMULATE)
    started = begin_stage(run, Stage.SIMULATE)

    settings = dict(run.synthetic or {})
    continuous = bool(settings.pop("continuous", False))
    settings["seed"] = int(run.seed)
    spec = SyntheticSpec.from_dict(settings)

    rows, oracle = (generate_plm_continuous if continuous else generate_plm)(spec)
    cross_path = write_cross_section(rows, run.path(ArtifactNames.CROSS_SECTION))

    naive = None
    if not continuous:
        estimate, stderr = difference_in_means([r.outcome for r in rows], [r.treatment for r in rows])
        naive = {"estimate": estimate, "stderr": stderr}
    oracle_path = save_json({"spec": spec.to_dict(), "continuous": continuous, "ate": oracle.ate,
                             "difference_in_means": naive},
                            run.path(ArtifactNames.ORACLE))
    logger.info(f"🧪 Synthetic data: n={spec.n}, d={spec.d}, theta={spec.theta_kind.value}, "
                f"true ATE={oracle.ate:.4f}")

    return finish_stage(run, Stage.SIMULATE, started, SETTINGS, [], [cross_path, oracle_path],
                        {"n": spec.n, "ate": oracle.ate})
