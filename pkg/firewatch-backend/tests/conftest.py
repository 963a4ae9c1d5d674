"""
Shared fixtures: small scenarios built in code and seeded generators.
"""
import os
from pathlib import Path

import numpy as np
import pytest

from app.models.environment import CellDistribution, EnvField, GridSpec, RiskMap
from app.models.filter import FilterConfig
from app.models.planner import PlannerConfig
from app.models.scenario import Ignition, Scenario
from app.models.sensing import AgentState, ControlInput, SensorModel

BACKEND_DIR = Path(__file__).resolve().parent.parent
SCENARIO_DIR = BACKEND_DIR / "scenarios"

REFERENCE_SPEEDS = (3.0, 6.0)
REFERENCE_HEADINGS = (0.0, 90.0, 180.0, 270.0)


def pytest_collection_modifyitems(config, items):
    if os.getenv("FIREWATCH_RUN_SLOW") == "1":
        return
    skip_slow = pytest.mark.skip(reason="set FIREWATCH_RUN_SLOW=1 to run full-scale campaigns")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def grid():
    return GridSpec(origin=(0.0, 0.0), side_length=3000.0, cells_per_axis=10)


@pytest.fixture
def reference_path():
    return SCENARIO_DIR / "reference_scenario.json"


@pytest.fixture
def hotspot_path():
    return SCENARIO_DIR / "risk_hotspot_scenario.json"


def action_set(speeds=REFERENCE_SPEEDS, headings=REFERENCE_HEADINGS):
    return tuple(ControlInput(speed=s, heading=h) for s in speeds for h in headings)


def build_scenario(
    cell: CellDistribution = None,
    side_length: float = 3000.0,
    cells_per_axis: int = 10,
    n_vertices: int = 20,
    center=(1500.0, 1500.0),
    axes=(120.0, 60.0),
    agent=(1400.0, 1400.0),
    sensor: SensorModel = None,
    steps: int = 5,
    dt: float = 60.0,
    n_particles: int = 200,
    init_std: float = 20.0,
    roughening_std: float = 1.0,
    resampling: str = "per_vertex",
    planner: PlannerConfig = None,
    risk: float = 1.0,
    seed: int = 7,
    actions=None,
) -> Scenario:
    grid = GridSpec(origin=(0.0, 0.0), side_length=side_length, cells_per_axis=cells_per_axis)
    cell = cell or CellDistribution(
        wind_dir_mean=0.0, wind_dir_concentration=500.0,
        wind_speed_mean=3.0, wind_speed_std=1.0,
        spread_rate_mean=0.2, spread_rate_std=0.05,
    )
    return Scenario(
        grid=grid,
        field=EnvField.uniform(grid, cell),
        risk=RiskMap.uniform(grid, risk),
        dt=dt,
        n_vertices=n_vertices,
        ignition=Ignition(center=center, semi_major=axes[0], semi_minor=axes[1]),
        sensor=sensor or SensorModel(range=433.0, noise_std=3.5, intensity=5.0),
        agent=AgentState(agent),
        action_set=actions or action_set(),
        planner=planner or PlannerConfig(horizon=1, rollout_particles=40),
        filter=FilterConfig(
            n_particles=n_particles, init_std=init_std,
            roughening_std=roughening_std, resampling=resampling,
        ),
        sim_steps=steps,
        rng_seed=seed,
    )


@pytest.fixture
def small_scenario():
    return build_scenario()


@pytest.fixture
def scenario_factory():
    return build_scenario
