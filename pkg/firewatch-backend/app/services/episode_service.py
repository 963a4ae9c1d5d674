"""
Episode Service
Closed-loop simulation of one monitoring episode: the true fire evolves, the
controller picks a control, the agent moves and senses, and the particle
filter tracks the front. Every step is logged into an EpisodeTrace.
"""
import logging
from dataclasses import dataclass, replace
from typing import Any, Callable, Dict, Optional

import numpy as np

from app.models.errors import ModelDomainError
from app.models.filter import Belief
from app.models.fire import FireFront
from app.models.harness import ControllerSpec, EpisodeTrace, StepRecord
from app.models.planner import PlannerConfig
from app.models.scenario import Scenario
from app.models.sensing import AgentState, ControlInput
from app.services.environment_service import sample_env, scenario_hash
from app.services.filter_service import (
    filter_step,
    init_belief,
    initial_front,
    mmse,
    predict,
    resample,
    vertex_std,
)
from app.services.fire_model_service import check_front, propagate
from app.services.planner_service import plan, rwd
from app.services.sensing_service import agent_step, generate_measurements
from app.utils.rng_utils import FILTER_STREAM, FIRE_STREAM, PLANNER_STREAM, SENSING_STREAM, derive_rng, stable_key
from config.config import Config

logger = logging.getLogger(__name__)


def rmse(estimate: FireFront, truth: FireFront) -> float:
    """Root of the mean squared error over all 2N vertex coordinates (m)."""
    if len(estimate) != len(truth):
        raise ModelDomainError(f"cannot compare a {len(estimate)}-vertex estimate with a {len(truth)}-vertex truth")
    return float(np.sqrt(np.mean((estimate.vertices - truth.vertices) ** 2)))


def resolve_controller(scenario: Scenario, controller: ControllerSpec) -> ControllerSpec:
    """Fill a missing horizon from the scenario and check the planner budget covers Pi_T."""
    controller = controller.with_horizon(scenario.planner.horizon)
    if controller.kind == "lcb":
        n_policies = len(scenario.action_set) ** controller.horizon
        replace(scenario.planner, horizon=controller.horizon).resolve_budget(n_policies, Config.BUDGET_FACTOR)
    return controller


@dataclass
class _Streams:
    fire: np.random.Generator
    belief_init: np.random.Generator
    sensing: np.random.Generator
    planner: np.random.Generator
    filter: np.random.Generator

    @classmethod
    def for_episode(cls, seed: int, controller: ControllerSpec) -> "_Streams":
        # fire dynamics and the initial belief are shared by every controller of a seed
        key = stable_key(controller.name)
        return cls(
            fire=derive_rng(seed, FIRE_STREAM),
            belief_init=derive_rng(seed, FILTER_STREAM),
            sensing=derive_rng(seed, SENSING_STREAM, key),
            planner=derive_rng(seed, PLANNER_STREAM, key),
            filter=derive_rng(seed, FILTER_STREAM, key),
        )


def run_episode(
    scenario: Scenario,
    controller: ControllerSpec,
    seed: int,
    diagnostics: Optional[Callable[[Dict[str, Any]], None]] = None,
) -> EpisodeTrace:
    """Simulate scenario.sim_steps steps under one controller; a pure function of its arguments."""
    controller = resolve_controller(scenario, controller)
    streams = _Streams.for_episode(seed, controller)

    sensor = scenario.sensor
    if controller.kind == "infinite_range":
        sensor = replace(sensor, range=float("inf"))
    planner_cfg = None
    if controller.kind == "lcb":
        planner_cfg = replace(scenario.planner, horizon=controller.horizon)

    truth = initial_front(scenario)
    belief = init_belief(scenario, streams.belief_init)
    agent = scenario.agent
    trace = EpisodeTrace(controller=controller.name, seed=int(seed), scenario_hash=scenario_hash(scenario))

    logger.info(f"🔥 Episode start: controller={controller.name}, seed={seed}, steps={scenario.sim_steps}")
    for step in range(1, scenario.sim_steps + 1):
        control = _choose_control(controller, scenario, belief, agent, planner_cfg, streams, diagnostics, step)
        if control is not None:
            agent = agent_step(agent, control, scenario.dt, scenario.grid, scenario.heading_convention)

        truth = propagate(truth, sample_env(truth, scenario.field, streams.fire), scenario.dt)
        warnings = check_front(truth)
        for warning in warnings:
            logger.warning(f"⚠ Step {step}: {warning}")

        z = generate_measurements(truth, agent, sensor, streams.sensing)
        predicted = predict(belief, scenario.field, scenario.dt, streams.filter)
        result = filter_step(predicted, z, agent, sensor, scenario.filter, streams.filter)
        belief = result.belief

        estimate = mmse(belief)
        scored = belief if result.resampled else resample(belief, streams.filter, offset=0.5)
        record = StepRecord(
            step=step,
            true_front=truth.to_list(),
            mmse_front=estimate.to_list(),
            agent_position=agent.position.tolist(),
            control=control.to_dict() if control is not None else None,
            n_measurements=len(z),
            ess=result.ess,
            vertex_std=vertex_std(belief).tolist(),
            rwd=rwd(scored, scenario.grid, scenario.risk, scenario.planner.rwd),
            rmse=rmse(estimate, truth),
            resampled=result.resampled,
            diverged=result.diverged,
            warnings=warnings,
        )
        trace.records.append(record)
        logger.info(
            f"Step {step}/{scenario.sim_steps} [{controller.name}]: rmse={record.rmse:.2f} m, "
            f"ess={record.ess:.1f}, detections={record.n_measurements}, rwd={record.rwd:.4f}"
        )

    logger.info(
        f"✅ Episode finished: controller={controller.name}, seed={seed}, "
        f"final rmse={trace.records[-1].rmse:.2f} m"
    )
    return trace


def _choose_control(
    controller: ControllerSpec,
    scenario: Scenario,
    belief: Belief,
    agent: AgentState,
    planner_cfg: Optional[PlannerConfig],
    streams: _Streams,
    diagnostics: Optional[Callable[[Dict[str, Any]], None]],
    step: int,
) -> Optional[ControlInput]:
    if controller.kind == "lcb":
        policy = plan(belief, agent, scenario, planner_cfg, streams.planner, diagnostics=diagnostics, step=step)
        return policy.first
    if controller.kind == "random":
        return scenario.action_set[int(streams.planner.integers(len(scenario.action_set)))]
    return None
