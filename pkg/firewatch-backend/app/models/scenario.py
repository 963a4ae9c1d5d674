"""
Validated in-memory scenario.
"""
from dataclasses import dataclass, field as dataclass_field
from typing import Tuple

import numpy as np

from app.models.environment import EnvField, GridSpec, RiskMap
from app.models.errors import ScenarioValidationError
from app.models.filter import FilterConfig
from app.models.planner import PlannerConfig
from app.models.sensing import AgentState, ControlInput, SensorModel

HEADING_CONVENTIONS = ("math", "compass")


@dataclass(frozen=True)
class Ignition:
    """Initial ellipse: center (m), semi-axes (m), rotation of the major axis from +x (rad)."""
    center: Tuple[float, float]
    semi_major: float
    semi_minor: float
    orientation: float = 0.0

    def bounding_half_extents(self) -> np.ndarray:
        c, s = np.cos(self.orientation), np.sin(self.orientation)
        half_x = np.hypot(self.semi_major * c, self.semi_minor * s)
        half_y = np.hypot(self.semi_major * s, self.semi_minor * c)
        return np.array([half_x, half_y])

    def inside(self, grid: GridSpec) -> bool:
        center = np.asarray(self.center, dtype=float)
        half = self.bounding_half_extents()
        return bool(np.all(center - half >= grid.lower) and np.all(center + half <= grid.upper))


@dataclass(frozen=True, eq=False)
class Scenario:
    grid: GridSpec
    field: EnvField
    risk: RiskMap
    dt: float
    n_vertices: int
    ignition: Ignition
    sensor: SensorModel
    agent: AgentState
    action_set: Tuple[ControlInput, ...]
    planner: PlannerConfig = dataclass_field(default_factory=PlannerConfig)
    filter: FilterConfig = dataclass_field(default_factory=FilterConfig)
    sim_steps: int = 25
    rng_seed: int = 0
    heading_convention: str = "math"

    def __post_init__(self):
        problems = []
        if not (self.dt > 0 and np.isfinite(self.dt)):
            problems.append(("sim.dt", "must be finite and > 0"))
        if self.n_vertices < 3:
            problems.append(("fire.n_vertices", "must be >= 3"))
        if self.sim_steps < 1:
            problems.append(("sim.steps", "must be >= 1"))
        if not 0 <= self.rng_seed < 2 ** 64:
            problems.append(("seed", "must be an unsigned 64-bit integer"))
        if self.ignition.semi_major <= 0 or self.ignition.semi_minor <= 0:
            problems.append(("fire.ignition", "semi-axes must be > 0"))
        elif not self.ignition.inside(self.grid):
            problems.append(("fire.ignition", "ellipse must lie inside the environment"))
        if self.risk.values.shape != (self.grid.cells_per_axis, self.grid.cells_per_axis):
            problems.append(("risk", "shape must match grid.cells_per_axis"))
        if self.field.grid is not self.grid and (
            self.field.grid.cells_per_axis != self.grid.cells_per_axis
            or self.field.grid.side_length != self.grid.side_length
            or self.field.grid.origin != self.grid.origin
        ):
            problems.append(("cells", "field grid differs from scenario grid"))
        if not self.action_set:
            problems.append(("agent", "action set must not be empty"))
        if self.heading_convention not in HEADING_CONVENTIONS:
            problems.append(("agent.heading_convention", f"must be one of {HEADING_CONVENTIONS}"))
        if not bool(self.grid.contains(self.agent.position)):
            problems.append(("agent.position", "must lie inside the environment"))
        if problems:
            raise ScenarioValidationError(problems)
