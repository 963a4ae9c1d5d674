"""
Monte-Carlo Service
Paired Monte-Carlo campaigns: every trial draws one randomized instance
(ignition center and agent start) and runs all controllers on it with the
same seed, then log10 RMSE is aggregated per controller and step.
"""
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from typing import Dict, List, Sequence, Tuple

import numpy as np

from app.models.errors import ScenarioValidationError
from app.models.harness import ControllerSpec, EpisodeTrace, MonteCarloReport
from app.models.scenario import Scenario
from app.models.sensing import AgentState
from app.services.episode_service import resolve_controller, run_episode
from app.utils.rng_utils import INSTANCE_STREAM, derive_rng, spawn_seeds

logger = logging.getLogger(__name__)

MAX_PLACEMENT_ATTEMPTS = 10_000


def randomize_instance(scenario: Scenario, rng: np.random.Generator) -> Scenario:
    """Uniform ignition center (rejecting ellipses that leave the map) and uniform agent start."""
    grid = scenario.grid
    half = scenario.ignition.bounding_half_extents()
    if np.any(2.0 * half > grid.side_length):
        raise ScenarioValidationError.single("fire.ignition", "ignition ellipse does not fit inside the environment")

    for _ in range(MAX_PLACEMENT_ATTEMPTS):
        center = rng.uniform(grid.lower, grid.upper)
        if np.all(center - half >= grid.lower) and np.all(center + half <= grid.upper):
            break
    else:
        raise ScenarioValidationError.single("fire.ignition", "could not place the ignition ellipse")

    agent = AgentState(rng.uniform(grid.lower, grid.upper))
    ignition = replace(scenario.ignition, center=(float(center[0]), float(center[1])))
    return replace(scenario, ignition=ignition, agent=agent)


def _run_trial(args: Tuple[Scenario, Sequence[ControllerSpec], int]) -> Dict[str, EpisodeTrace]:
    scenario, controllers, seed = args
    instance = randomize_instance(scenario, derive_rng(seed, INSTANCE_STREAM))
    return {controller.name: run_episode(instance, controller, seed) for controller in controllers}


def run_monte_carlo(
    scenario: Scenario,
    controllers: Sequence[ControllerSpec],
    trials: int,
    base_seed: int,
    workers: int = 1,
    keep_traces: bool = False,
) -> MonteCarloReport:
    """Run `trials` paired trials; workers > 1 spreads trials over processes with identical results."""
    if trials < 1:
        raise ScenarioValidationError.single("trials", "must be >= 1")
    resolved: List[ControllerSpec] = []
    for controller in controllers:
        controller = resolve_controller(scenario, controller)
        if controller.name not in [c.name for c in resolved]:
            resolved.append(controller)
    if not resolved:
        raise ScenarioValidationError.single("controllers", "at least one controller is required")

    seeds = spawn_seeds(base_seed, trials)
    jobs = [(scenario, resolved, seed) for seed in seeds]
    logger.info(
        f"🎲 Monte-Carlo: {trials} trials x {len(resolved)} controllers "
        f"({', '.join(c.name for c in resolved)}), workers={workers}"
    )

    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_trial, jobs))
    else:
        results = [_run_trial(job) for job in jobs]

    names = [c.name for c in resolved]
    log10_rmse = {name: np.stack([trial[name].log10_rmse_series for trial in results]) for name in names}
    traces = {name: [trial[name] for trial in results] for name in names} if keep_traces else None

    report = MonteCarloReport(controllers=names, trials=trials, seeds=seeds, log10_rmse=log10_rmse, traces=traces)
    for name in names:
        logger.info(f"✅ {name}: mean log10 RMSE over steps = {float(report.mean(name).mean()):.4f}")
    return report
