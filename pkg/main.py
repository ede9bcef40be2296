"""
======================================================
🌾 CAUSAL LAND SUITABILITY PIPELINE
======================================================
Command-line entry point. One subcommand per pipeline stage:

    ingest -> practices -> fit -> interpret / report
    simulate (synthetic cross-section in place of ingest + practices)
"""

import argparse
import os
import sys
from typing import List, Optional

# Add project root to path
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from config import config
from src.controllers import (
    cmd_fit, cmd_ingest, cmd_interpret, cmd_practices, cmd_report, cmd_simulate,
)
from src.models.run_config_model import RunConfig, stage_failure
from src.utils.constants import ExitCode, Stage
from src.utils.exceptions import SuitabilityError
from src.utils.logger import logger

COMMANDS = {
    Stage.INGEST: cmd_ingest,
    Stage.PRACTICES: cmd_practices,
    Stage.FIT: cmd_fit,
    Stage.INTERPRET: cmd_interpret,
    Stage.REPORT: cmd_report,
    Stage.SIMULATE: cmd_simulate,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="suitability", description=config.APP_NAME)
    sub = parser.add_subparsers(dest="stage", required=True)
    for stage in COMMANDS:
        cmd = sub.add_parser(stage.value)
        cmd.add_argument("--config", help="run configuration (JSON)")
        cmd.add_argument("--seed", type=int)
        cmd.add_argument("--out", help="output directory")
        cmd.add_argument("--treatment", choices=["cr", "lcd"])
        cmd.add_argument("--threads", type=int)
    return parser


def load_run_config(args: argparse.Namespace) -> RunConfig:
    run = RunConfig.from_file(args.config) if args.config else RunConfig()
    return run.with_overrides(seed=args.seed, out_dir=args.out,
                              treatment=args.treatment, threads=args.threads)


def main(argv: Optional[List[str]] = None) -> int:
    """Returns the process exit code (0, 2 config, 3 data, 4 estimation)"""
    args = build_parser().parse_args(argv)
    stage = Stage(args.stage)
    try:
        run = load_run_config(args)
        result = COMMANDS[stage](run)
        print(f"✅ {stage.value}: {len(result.artifacts)} artifacts, manifest {result.manifest}")
        return int(ExitCode.SUCCESS)
    except SuitabilityError as e:
        sys.stderr.write(stage_failure(stage, e) + "\n")
        logger.error(f"❌ Stage '{stage.value}' failed: [{e.code}] {e}")
        return int(e.exit_code)
    except Exception as e:
        logger.exception(f"❌ Stage '{stage.value}' crashed: {e}")
        fatal = ExitCode.ESTIMATION_ERROR if stage in (Stage.FIT, Stage.INTERPRET) else ExitCode.DATA_ERROR
        sys.stderr.write(f"stage={stage.value} code=UNEXPECTED detail={e}\n")
        return int(fatal)


if __name__ == "__main__":
    sys.exit(main())
