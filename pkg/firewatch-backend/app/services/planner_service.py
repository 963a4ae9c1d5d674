"""
Planner Service
Information-seeking receding-horizon controller: risk-weighted dispersion
cost, open-loop policy enumeration, belief-space rollouts and the
LCB-guided policy search.
"""
import itertools
import logging
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np

from app.models.environment import GridSpec, RiskMap
from app.models.errors import ScenarioValidationError
from app.models.filter import Belief
from app.models.fire import FireFront
from app.models.planner import PlannerConfig, Policy, PolicyStats, RWDConfig
from app.models.scenario import Scenario
from app.models.sensing import AgentState, ControlInput
from app.services.environment_service import cell_indices
from app.services.filter_service import predict, resample, update_and_resample
from app.services.sensing_service import agent_step, generate_measurements
from config.config import Config

logger = logging.getLogger(__name__)

RolloutFn = Callable[[Policy, Belief, AgentState, Scenario, np.random.Generator], float]
StageCostFn = Callable[[Belief], float]


# ---------------------------------------------------------------------------
# Risk-weighted dispersion
# ---------------------------------------------------------------------------

def default_omega(grid: GridSpec, risk_map: RiskMap) -> float:
    """Sum of risk * (L^2 / 4)^2: the largest RWD reachable by cell-supported points."""
    per_cell = (grid.cell_side ** 2 / 4.0) ** 2
    total = float(np.sum(risk_map.values)) * per_cell
    return total if total > 0 else per_cell


def _cell_dispersion(points: np.ndarray, cells: np.ndarray, groups: np.ndarray, n_cells: int) -> np.ndarray:
    """Pooled within-group covariance determinant per cell.

    Each group's scatter is taken about its own mean (deviations measured from the
    group's first point); a cell's covariance is its total scatter over its total
    degrees of freedom sum(n_g - 1). Cells without degrees of freedom give 0.
    """
    _, first, inverse, counts = np.unique(groups, return_index=True, return_inverse=True, return_counts=True)
    inverse = inverse.reshape(-1)
    deviation = points - points[first][inverse]
    n_groups = first.shape[0]

    sums = np.stack([np.bincount(inverse, weights=deviation[:, k], minlength=n_groups) for k in range(2)], axis=-1)
    sxx = np.bincount(inverse, weights=deviation[:, 0] * deviation[:, 0], minlength=n_groups)
    sxy = np.bincount(inverse, weights=deviation[:, 0] * deviation[:, 1], minlength=n_groups)
    syy = np.bincount(inverse, weights=deviation[:, 1] * deviation[:, 1], minlength=n_groups)
    sxx = sxx - sums[:, 0] * sums[:, 0] / counts
    sxy = sxy - sums[:, 0] * sums[:, 1] / counts
    syy = syy - sums[:, 1] * sums[:, 1] / counts

    group_cell = cells[first]
    dof = np.bincount(group_cell, weights=counts - 1, minlength=n_cells)
    cxx = np.bincount(group_cell, weights=sxx, minlength=n_cells)
    cxy = np.bincount(group_cell, weights=sxy, minlength=n_cells)
    cyy = np.bincount(group_cell, weights=syy, minlength=n_cells)

    det = np.zeros(n_cells)
    ok = dof > 0
    det[ok] = (cxx[ok] * cyy[ok] - cxy[ok] * cxy[ok]) / (dof[ok] * dof[ok])
    return np.maximum(det, 0.0)


def rwd(belief: Belief, grid: GridSpec, risk_map: RiskMap, cfg: Optional[RWDConfig] = None) -> float:
    """Risk-weighted dispersion of the belief's vertex points, scaled by 1/omega and clipped to [0, 1].

    Weights are ignored: pass a resampled belief when the weights matter.
    """
    cfg = cfg or RWDConfig()
    particles = belief.particles
    n_vertices = particles.shape[1]
    n = grid.cells_per_axis

    ix, iy = cell_indices(particles, grid)
    cells = (ix * n + iy).reshape(-1)
    points = particles.reshape(-1, 2)
    if cfg.pooling == "pooled":
        groups = cells
    else:
        vertex = np.broadcast_to(np.arange(n_vertices), ix.shape).reshape(-1)
        groups = cells * n_vertices + vertex

    det = _cell_dispersion(points, cells, groups, grid.n_cells)
    omega = cfg.omega if cfg.omega is not None else default_omega(grid, risk_map)
    cost = float(np.dot(risk_map.values.reshape(-1), det)) / omega
    return float(np.clip(cost, 0.0, 1.0))


# ---------------------------------------------------------------------------
# Policies and LCB search
# ---------------------------------------------------------------------------

def enumerate_policies(action_set: Sequence[ControlInput], horizon: int) -> List[Policy]:
    """All |U|^T control sequences, lexicographic in the action-set order."""
    if not action_set:
        raise ScenarioValidationError.single("agent", "action set must not be empty")
    if horizon < 1:
        raise ScenarioValidationError.single("planner.horizon", "must be >= 1")
    return [Policy(tuple(controls)) for controls in itertools.product(action_set, repeat=horizon)]


def default_lcb_min(budget: int) -> float:
    return -(np.sqrt(2.0 * np.log(budget)) + 1.0)


def lcb_score(stats: PolicyStats, n: int, lcb_min: float) -> float:
    """Q - sqrt(2 ln n / I) for visited policies, lcb_min otherwise."""
    if n < 1:
        raise ValueError(f"iteration index must be >= 1, got {n}")
    if stats.pull_count > 0:
        return stats.mean_cost - float(np.sqrt(2.0 * np.log(n) / stats.pull_count))
    return lcb_min


@dataclass
class SearchResult:
    """Final statistics of one LCB search."""
    best_index: int
    stats: List[PolicyStats]
    history: np.ndarray
    final_scores: np.ndarray

    @property
    def pull_counts(self) -> np.ndarray:
        return np.array([s.pull_count for s in self.stats], dtype=int)


@dataclass
class LCBPolicySearch:
    """Bandit search over a fixed arm set minimising expected cost.

    Every iteration pulls argmin LCB (lowest index on ties), so with
    budget >= n_arms each arm is pulled at least once before any repeats.
    """
    n_arms: int
    budget: int
    lcb_min: Optional[float] = None
    stats: List[PolicyStats] = field(init=False)

    def __post_init__(self):
        if self.n_arms < 1:
            raise ValueError("need at least one arm")
        if self.budget < self.n_arms:
            raise ScenarioValidationError.single(
                "planner.budget", f"budget {self.budget} is below the policy count {self.n_arms}"
            )
        if self.lcb_min is None:
            self.lcb_min = default_lcb_min(self.budget)
        self.stats = [PolicyStats() for _ in range(self.n_arms)]

    def scores(self, n: int) -> np.ndarray:
        return np.array([lcb_score(s, n, self.lcb_min) for s in self.stats], dtype=float)

    def select(self, n: int) -> int:
        return int(np.argmin(self.scores(n)))

    def run(
        self,
        evaluate: Callable[[int], float],
        on_iteration: Optional[Callable[[int, int, PolicyStats], None]] = None,
    ) -> SearchResult:
        history = np.empty(self.budget, dtype=int)
        for n in range(1, self.budget + 1):
            index = self.select(n)
            self.stats[index].record(float(evaluate(index)))
            history[n - 1] = index
            if on_iteration is not None:
                on_iteration(n, index, self.stats[index])

        final_scores = self.scores(self.budget)
        return SearchResult(
            best_index=int(np.argmin(final_scores)),
            stats=self.stats,
            history=history,
            final_scores=final_scores,
        )


# ---------------------------------------------------------------------------
# Rollouts and planning
# ---------------------------------------------------------------------------

def shrink_belief(belief: Belief, n_particles: int, rng: np.random.Generator) -> Belief:
    """Systematically draw `n_particles` equally weighted particles from a belief."""
    if n_particles >= belief.n_particles:
        return belief
    return resample(belief, rng, n_out=n_particles)


def rollout(
    policy: Policy,
    belief: Belief,
    agent: AgentState,
    scenario: Scenario,
    rng: np.random.Generator,
    stage_cost: Optional[StageCostFn] = None,
) -> float:
    """Discounted cost sum_tau nu^tau * C(posterior_tau) of one simulated policy execution.

    Each step: predict, move the agent, sample hypothetical detections from one
    particle drawn by weight, update, resample, then score the posterior.
    """
    if stage_cost is None:
        rwd_cfg = scenario.planner.rwd
        omega = rwd_cfg.omega if rwd_cfg.omega is not None else default_omega(scenario.grid, scenario.risk)
        cfg = RWDConfig(omega=omega, pooling=rwd_cfg.pooling)

        def stage_cost(b: Belief) -> float:
            return rwd(b, scenario.grid, scenario.risk, cfg)

    discount = scenario.planner.discount
    cost = 0.0
    for tau, control in enumerate(policy.controls, start=1):
        predicted = predict(belief, scenario.field, scenario.dt, rng)
        agent = agent_step(agent, control, scenario.dt, scenario.grid, scenario.heading_convention)
        surrogate = predicted.particles[rng.choice(predicted.n_particles, p=predicted.weights)]
        z = generate_measurements(FireFront(surrogate), agent, scenario.sensor, rng)
        belief = update_and_resample(predicted, z, agent, scenario.sensor, rng, scenario.filter.resampling)
        cost += discount ** tau * stage_cost(belief)
    return cost


def search_policies(
    belief: Belief,
    agent: AgentState,
    scenario: Scenario,
    cfg: Optional[PlannerConfig] = None,
    rng: Optional[np.random.Generator] = None,
    rollout_fn: Optional[RolloutFn] = None,
    diagnostics: Optional[Callable[[Dict[str, Any]], None]] = None,
    step: int = 0,
):
    """Run the LCB search; returns (policies, SearchResult)."""
    cfg = cfg or scenario.planner
    rng = rng if rng is not None else np.random.default_rng()
    policies = enumerate_policies(scenario.action_set, cfg.horizon)
    budget = cfg.resolve_budget(len(policies), Config.BUDGET_FACTOR)

    rollout_fn = rollout_fn or rollout
    rollout_scenario = scenario if cfg is scenario.planner else replace(scenario, planner=cfg)
    belief = shrink_belief(belief, cfg.rollout_particles, rng)

    def evaluate(index: int) -> float:
        return rollout_fn(policies[index], belief, agent, rollout_scenario, rng)

    debug = logger.isEnabledFor(logging.DEBUG)

    def on_iteration(n: int, index: int, stats: PolicyStats) -> None:
        if diagnostics is not None:
            diagnostics({
                "step": step,
                "iteration": n,
                "policy_index": index,
                "mean_cost": stats.mean_cost,
                "pulls": stats.pull_count,
            })
        if debug:
            logger.debug(f"[step {step}] iter {n}: policy {index} Q={stats.mean_cost:.6f} I={stats.pull_count}")

    search = LCBPolicySearch(n_arms=len(policies), budget=budget)
    result = search.run(evaluate, on_iteration)
    best = result.stats[result.best_index]
    logger.debug(
        f"Plan at step {step}: {len(policies)} policies, budget {budget}, "
        f"chose #{result.best_index} (Q={best.mean_cost:.6f}, I={best.pull_count})"
    )
    return policies, result


def plan(
    belief: Belief,
    agent: AgentState,
    scenario: Scenario,
    cfg: Optional[PlannerConfig] = None,
    rng: Optional[np.random.Generator] = None,
    rollout_fn: Optional[RolloutFn] = None,
    diagnostics: Optional[Callable[[Dict[str, Any]], None]] = None,
    step: int = 0,
) -> Policy:
    """Best open-loop policy by LCB search; the caller executes only its first control."""
    policies, result = search_policies(belief, agent, scenario, cfg, rng, rollout_fn, diagnostics, step)
    return policies[result.best_index]
