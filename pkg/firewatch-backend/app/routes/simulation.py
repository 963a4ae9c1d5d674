"""
Simulation Routes
Handlers behind the run / montecarlo / validate commands. Each handler takes
a validated request model, does the work through the services and returns a
JSON-ready summary.
"""
import logging
from dataclasses import replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Type, TypeVar

from pydantic import BaseModel, Field, ValidationError

from app.models.errors import ScenarioValidationError
from app.models.harness import ControllerSpec
from app.models.scenario import Scenario
from app.models.scenario_schema import problems_from_validation_error
from app.services.environment_service import load_scenario, scenario_hash
from app.services.episode_service import run_episode
from app.services.monte_carlo_service import run_monte_carlo
from app.utils.report_formatter import ReportFormatter
from app.utils.trace_writer import (
    PlannerDiagnosticsWriter,
    write_fronts_json,
    write_report_csv,
    write_trace_jsonl,
)
from config.config import Config

logger = logging.getLogger(__name__)

DEFAULT_CONTROLLERS = ["infinite_range", "static", "random", "lcb:1", "lcb:3"]

RequestT = TypeVar("RequestT", bound=BaseModel)


class RunRequest(BaseModel):
    """Request model for a single episode"""
    scenario: str = Config.DEFAULT_SCENARIO
    controller: str = "lcb"
    seed: Optional[int] = Field(default=None, ge=0, lt=2 ** 64)
    out: str = Config.OUTPUT_DIR
    planner_debug: Optional[str] = Config.PLANNER_DEBUG_PATH
    quiet: bool = False


class MonteCarloRequest(BaseModel):
    """Request model for a paired Monte-Carlo campaign"""
    scenario: str = Config.DEFAULT_SCENARIO
    controllers: List[str] = Field(default_factory=lambda: list(DEFAULT_CONTROLLERS), min_length=1)
    trials: int = Field(default=20, ge=1)
    seed: Optional[int] = Field(default=None, ge=0, lt=2 ** 64)
    out: str = Config.OUTPUT_DIR
    workers: int = Field(default=Config.MC_WORKERS, ge=1)
    n_particles: Optional[int] = Field(default=None, ge=1)
    rollout_particles: Optional[int] = Field(default=None, ge=1)
    steps: Optional[int] = Field(default=None, ge=1)
    save_traces: bool = False
    quiet: bool = False


class ValidateRequest(BaseModel):
    scenario: str = Config.DEFAULT_SCENARIO
    quiet: bool = False


def parse_request(model: Type[RequestT], data: Dict[str, Any]) -> RequestT:
    """Build a request model, dropping unset values so model defaults apply."""
    try:
        return model(**{k: v for k, v in data.items() if v is not None})
    except ValidationError as exc:
        raise ScenarioValidationError(problems_from_validation_error(exc)) from exc


def apply_overrides(
    scenario: Scenario,
    n_particles: Optional[int] = None,
    rollout_particles: Optional[int] = None,
    steps: Optional[int] = None,
) -> Scenario:
    """Command-line overrides on top of the scenario file."""
    if n_particles is not None:
        scenario = replace(scenario, filter=replace(scenario.filter, n_particles=n_particles))
    if rollout_particles is not None:
        scenario = replace(scenario, planner=replace(scenario.planner, rollout_particles=rollout_particles))
    if steps is not None:
        scenario = replace(scenario, sim_steps=steps)
    return scenario


def handle_validate(request: ValidateRequest) -> Dict[str, Any]:
    scenario = load_scenario(request.scenario)
    digest = scenario_hash(scenario)
    ReportFormatter(quiet=request.quiet).format_scenario(scenario, digest)
    return {"success": True, "scenario": request.scenario, "scenario_hash": digest}


def handle_run(request: RunRequest) -> Dict[str, Any]:
    scenario = load_scenario(request.scenario)
    controller = ControllerSpec.parse(request.controller)
    seed = scenario.rng_seed if request.seed is None else request.seed
    out = Path(request.out)

    with PlannerDiagnosticsWriter(request.planner_debug) as diagnostics:
        trace = run_episode(scenario, controller, seed, diagnostics=diagnostics if diagnostics.enabled else None)

    trace_path = write_trace_jsonl(trace, out / "trace.jsonl")
    fronts_path = write_fronts_json([trace], out / "fronts.json")
    ReportFormatter(quiet=request.quiet).format_episode(trace)
    return {
        "success": True,
        "controller": trace.controller,
        "seed": trace.seed,
        "final_rmse": trace.records[-1].rmse,
        "trace": str(trace_path),
        "fronts": str(fronts_path),
    }


def handle_montecarlo(request: MonteCarloRequest) -> Dict[str, Any]:
    scenario = apply_overrides(
        load_scenario(request.scenario),
        n_particles=request.n_particles,
        rollout_particles=request.rollout_particles,
        steps=request.steps,
    )
    controllers = [ControllerSpec.parse(name) for name in request.controllers]
    seed = scenario.rng_seed if request.seed is None else request.seed
    out = Path(request.out)

    report = run_monte_carlo(
        scenario, controllers, request.trials, seed,
        workers=request.workers, keep_traces=request.save_traces,
    )
    report_path = write_report_csv(report, out / "report.csv")
    result = {
        "success": True,
        "trials": report.trials,
        "controllers": report.controllers,
        "report": str(report_path),
    }
    if report.traces is not None:
        traces = [trace for name in report.controllers for trace in report.traces[name]]
        result["fronts"] = str(write_fronts_json(traces, out / "fronts.json"))
    ReportFormatter(quiet=request.quiet).format_monte_carlo(report)
    return result
