"""
======================================================
🌳 Interpret Controller
Causal Land Suitability Pipeline
Shallow regression tree over the estimated CATEs.
======================================================
"""
from src.ai_core.interpretation import interpret_tree
from src.database.model_store import save_json
from src.models.run_config_model import RunConfig, StageResult
from src.controllers.stage_support import begin_stage, estimated_units, finish_stage
from src.utils.constants import ArtifactNames, Stage
from src.utils.logger import logger

SETTINGS = ("interpret_depth",)


def cmd_interpret(run: RunConfig) -> StageResult:
    run = run.validate(Stage.INTERPRET)
    started = begin_stage(run, Stage.INTERPRET)
    model, _, X, cates = estimated_units(run)

    tree = interpret_tree(X, cates, run.interpret_depth, model.feature_names)
    text_path = run.path(ArtifactNames.TREE_TEXT)
    with open(text_path, "w", encoding="utf-8", newline="\n") as f:
        f.write(tree.render_text())
    json_path = save_json(tree.to_dict(), run.path(ArtifactNames.TREE_JSON))
    logger.info(f"🌳 Interpretation tree: depth {tree.depth()}, {len(tree.leaves())} leaves")

    return finish_stage(run, Stage.INTERPRET, started, SETTINGS,
                        [run.path(ArtifactNames.MODEL), run.path(ArtifactNames.CATES)],
                        [text_path, json_path],
                        {"depth": tree.depth(), "n_leaves": len(tree.leaves())})
