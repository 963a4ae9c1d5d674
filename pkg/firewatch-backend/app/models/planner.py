"""
Planner domain types: policies, bandit statistics and planner settings.
"""
from dataclasses import dataclass
from typing import Optional, Tuple

from app.models.errors import ScenarioValidationError
from app.models.sensing import ControlInput

POOLING_MODES = ("per_vertex", "pooled")


@dataclass(frozen=True)
class Policy:
    """Open-loop control sequence of length T (one bandit arm)."""
    controls: Tuple[ControlInput, ...]

    def __len__(self) -> int:
        return len(self.controls)

    @property
    def first(self) -> ControlInput:
        return self.controls[0]


@dataclass
class PolicyStats:
    """Running mean cost Q and pull count I of one policy."""
    mean_cost: float = 0.0
    pull_count: int = 0

    def record(self, cost: float) -> None:
        self.pull_count += 1
        self.mean_cost += (cost - self.mean_cost) / self.pull_count


@dataclass(frozen=True)
class RWDConfig:
    """Risk-weighted dispersion settings; omega=None means the analytic default."""
    omega: Optional[float] = None
    pooling: str = "per_vertex"

    def __post_init__(self):
        if self.omega is not None and not self.omega > 0:
            raise ScenarioValidationError.single("planner.omega", "must be > 0")
        if self.pooling not in POOLING_MODES:
            raise ScenarioValidationError.single(
                "planner.pooling", f"must be one of {POOLING_MODES}"
            )


@dataclass(frozen=True)
class PlannerConfig:
    """Horizon T, discount nu, budget n_max (None -> factor * |Pi_T|), rollout particles."""
    horizon: int = 1
    discount: float = 0.99
    budget: Optional[int] = None
    rollout_particles: int = 200
    rwd: RWDConfig = RWDConfig()

    def __post_init__(self):
        problems = []
        if self.horizon < 1:
            problems.append(("planner.horizon", "must be >= 1"))
        if not 0 < self.discount <= 1:
            problems.append(("planner.discount", "must lie in (0, 1]"))
        if self.budget is not None and self.budget < 1:
            problems.append(("planner.budget", "must be >= 1"))
        if self.rollout_particles < 1:
            problems.append(("planner.rollout_particles", "must be >= 1"))
        if problems:
            raise ScenarioValidationError(problems)

    def resolve_budget(self, n_policies: int, factor: int) -> int:
        """n_max for a policy set of the given size; must cover every policy once."""
        budget = self.budget if self.budget is not None else factor * n_policies
        if budget < n_policies:
            raise ScenarioValidationError.single(
                "planner.budget",
                f"budget {budget} is below the policy count {n_policies} for horizon {self.horizon}",
            )
        return budget
