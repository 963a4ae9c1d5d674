"""
FireWatch command-line interface
Adaptive wildfire-front monitoring: single episodes, paired Monte-Carlo
campaigns and scenario validation.

    python firewatch_cli.py validate --scenario scenarios/reference_scenario.json
    python firewatch_cli.py run --controller lcb:3 --seed 7 --out output/run
    python firewatch_cli.py montecarlo --trials 20 --controllers infinite_range,static,random,lcb:1,lcb:3
"""
import argparse
import logging
import sys
from typing import List, Optional

from app.models.errors import FirewatchError, ScenarioValidationError
from app.routes.simulation import (
    MonteCarloRequest,
    RunRequest,
    ValidateRequest,
    handle_montecarlo,
    handle_run,
    handle_validate,
    parse_request,
)
from config.config import Config

logger = logging.getLogger("firewatch")

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_INVALID = 2


def _u64(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError(f"seed must be an unsigned 64-bit integer, got {text}")
    return value


def _csv(text: str) -> List[str]:
    return [item.strip() for item in text.split(",") if item.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="firewatch", description="Adaptive wildfire-front monitoring")
    parser.add_argument("--log-level", default=Config.LOG_LEVEL, help="DEBUG, INFO, WARNING or ERROR")
    parser.add_argument("--quiet", action="store_true", help="do not print the summary table")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="simulate one episode")
    run.add_argument("--scenario", help="scenario JSON file")
    run.add_argument("--controller", help="lcb[:T], myopic, random, static or infinite_range")
    run.add_argument("--seed", type=_u64, help="episode seed (defaults to the scenario seed)")
    run.add_argument("--out", help="output directory for trace.jsonl and fronts.json")
    run.add_argument("--planner-debug", dest="planner_debug", help="JSON-lines planner diagnostics file")

    mc = sub.add_parser("montecarlo", help="paired Monte-Carlo comparison of controllers")
    mc.add_argument("--scenario", help="scenario JSON file")
    mc.add_argument("--controllers", type=_csv, help="comma-separated controller names")
    mc.add_argument("--trials", type=int, help="number of paired trials")
    mc.add_argument("--seed", type=_u64, help="base seed for the trial seeds")
    mc.add_argument("--out", help="output directory for report.csv")
    mc.add_argument("--workers", type=int, help="worker processes (1 = sequential)")
    mc.add_argument("--particles", dest="n_particles", type=int, help="override filter particle count")
    mc.add_argument("--rollout-particles", dest="rollout_particles", type=int,
                    help="override planner rollout particle count")
    mc.add_argument("--steps", type=int, help="override the number of simulated steps")
    mc.add_argument("--save-traces", dest="save_traces", action="store_true", default=None,
                    help="also write fronts.json for every trial")

    validate = sub.add_parser("validate", help="check a scenario file and exit")
    validate.add_argument("--scenario", help="scenario JSON file")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)

    logging.basicConfig(
        level=getattr(logging, str(args.log_level).upper(), logging.INFO),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    )

    options = {k: v for k, v in vars(args).items() if k not in ("command", "log_level")}
    try:
        if args.command == "run":
            result = handle_run(parse_request(RunRequest, options))
        elif args.command == "montecarlo":
            result = handle_montecarlo(parse_request(MonteCarloRequest, options))
        else:
            result = handle_validate(parse_request(ValidateRequest, options))
    except ScenarioValidationError as exc:
        logger.error("❌ Scenario validation failed")
        for path, message in exc.problems:
            logger.error(f"   {path}: {message}")
        return EXIT_INVALID
    except FirewatchError as exc:
        logger.error(f"❌ {type(exc).__name__}: {exc}")
        return EXIT_FAILURE

    logger.info(f"✅ {args.command} finished: {result}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
