"""
Environment Service
Grid lookup, stochastic environmental draws, risk lookup and scenario I/O.
"""
import hashlib
import json
import logging
from pathlib import Path
from typing import Any, Dict, Tuple, Union

import numpy as np
from pydantic import ValidationError

from app.models.environment import CELL_FIELDS, EnvField, EnvSample, GridSpec, RiskMap
from app.models.errors import ScenarioValidationError
from app.models.filter import FilterConfig
from app.models.fire import FireFront
from app.models.planner import PlannerConfig, RWDConfig
from app.models.scenario import Ignition, Scenario
from app.models.scenario_schema import ScenarioDocument, problems_from_validation_error
from app.models.sensing import AgentState, ControlInput, SensorModel
from app.services.sensing_service import sensing_range_from_camera

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * np.pi


# ---------------------------------------------------------------------------
# Grid lookup
# ---------------------------------------------------------------------------

def cell_indices(points: np.ndarray, grid: GridSpec) -> Tuple[np.ndarray, np.ndarray]:
    """Vectorized cell lookup: (ix, iy) integer arrays for points of shape (..., 2).

    Index = floor((coord - origin) / cell_side) clamped to [0, n-1]; a point on an
    interior edge belongs to the higher-index cell.
    """
    points = np.asarray(points, dtype=float)
    scaled = np.floor((points - grid.lower) / grid.cell_side)
    idx = np.clip(scaled, 0, grid.cells_per_axis - 1).astype(np.int64)
    return idx[..., 0], idx[..., 1]


def cell_of(position, grid: GridSpec) -> Tuple[int, int]:
    """Cell index (ix, iy) containing `position`; outside points clamp to the border."""
    ix, iy = cell_indices(np.asarray(position, dtype=float).reshape(2), grid)
    return int(ix), int(iy)


def clamp_to_grid(position, grid: GridSpec) -> np.ndarray:
    return np.clip(np.asarray(position, dtype=float), grid.lower, grid.upper)


# ---------------------------------------------------------------------------
# Environmental draws
# ---------------------------------------------------------------------------

def sample_env_batch(vertices: np.ndarray, field: EnvField, rng: np.random.Generator) -> EnvSample:
    """Independent draws for every vertex of a stack of fronts, shape (..., N, 2).

    Draw order is fixed (all wind directions, then speeds, then spread rates) so
    a one-front stack consumes the generator exactly like sample_env.
    """
    vertices = np.asarray(vertices, dtype=float)
    ix, iy = cell_indices(vertices, field.grid)

    wind_dir = rng.vonmises(field.wind_dir_mean[ix, iy], field.wind_dir_concentration[ix, iy])
    wind_dir = np.mod(wind_dir, TWO_PI)
    wind_dir[wind_dir >= TWO_PI] = 0.0

    wind_speed = np.maximum(rng.normal(field.wind_speed_mean[ix, iy], field.wind_speed_std[ix, iy]), 0.0)
    spread_rate = np.maximum(rng.normal(field.spread_rate_mean[ix, iy], field.spread_rate_std[ix, iy]), 0.0)
    return EnvSample(wind_dir=wind_dir, wind_speed=wind_speed, spread_rate=spread_rate)


def sample_env(front: FireFront, field: EnvField, rng: np.random.Generator) -> EnvSample:
    """One environmental realisation E_t for the vertices of `front`."""
    return sample_env_batch(front.vertices, field, rng)


def risk(cell: Tuple[int, int], risk_map: RiskMap) -> float:
    ix, iy = cell
    n = risk_map.values.shape[0]
    if not (0 <= ix < n and 0 <= iy < n):
        raise ScenarioValidationError.single(f"risk.{ix}.{iy}", f"cell index outside the {n}x{n} grid")
    return float(risk_map.values[ix, iy])


def build_gradient_field(
    grid: GridSpec,
    wind_dir_range_deg: Tuple[float, float] = (0.0, 90.0),
    concentration: float = 500.0,
    wind_speed_range: Tuple[float, float] = (2.0, 6.0),
    wind_speed_std: float = 1.0,
    spread_rate_range: Tuple[float, float] = (0.15, 0.30),
    spread_rate_std: float = 0.05,
) -> EnvField:
    """Linear-gradient field: wind direction and spread rate vary along x, wind speed along y.

    The default wind turns from North (0 deg) to East (90 deg) across the map.
    """
    n = grid.cells_per_axis
    ramp = np.linspace(0.0, 1.0, n) if n > 1 else np.zeros(1)
    along_x = np.repeat(ramp[:, None], n, axis=1)
    along_y = np.repeat(ramp[None, :], n, axis=0)

    def lerp(bounds, t):
        return bounds[0] + (bounds[1] - bounds[0]) * t

    return EnvField(
        grid=grid,
        wind_dir_mean=np.deg2rad(lerp(wind_dir_range_deg, along_x)),
        wind_dir_concentration=np.full((n, n), concentration),
        wind_speed_mean=lerp(wind_speed_range, along_y),
        wind_speed_std=np.full((n, n), wind_speed_std),
        spread_rate_mean=lerp(spread_rate_range, along_x),
        spread_rate_std=np.full((n, n), spread_rate_std),
    )


# ---------------------------------------------------------------------------
# Scenario I/O
# ---------------------------------------------------------------------------

def scenario_from_document(doc: ScenarioDocument) -> Scenario:
    """Convert a parsed scenario document into a validated Scenario (degrees -> radians)."""
    grid = GridSpec(origin=doc.grid.origin, side_length=doc.grid.side_length,
                    cells_per_axis=doc.grid.cells_per_axis)
    n = grid.cells_per_axis

    if len(doc.cells) != n or any(len(row) != n for row in doc.cells):
        raise ScenarioValidationError.single("cells", f"expected a {n}x{n} nested array")
    if len(doc.risk) != n or any(len(row) != n for row in doc.risk):
        raise ScenarioValidationError.single("risk", f"expected a {n}x{n} nested array")

    arrays = {
        name: np.array([[getattr(cell, name) for cell in row] for row in doc.cells], dtype=float)
        for name in CELL_FIELDS
    }
    arrays["wind_dir_mean"] = np.deg2rad(arrays["wind_dir_mean"])
    field = EnvField(grid=grid, **arrays)

    sensor_range = doc.sensor.range
    if sensor_range is None:
        sensor_range = sensing_range_from_camera(doc.sensor.altitude, doc.sensor.fov)

    ignition = doc.fire.ignition
    return Scenario(
        grid=grid,
        field=field,
        risk=RiskMap(np.array(doc.risk, dtype=float)),
        dt=doc.sim.dt,
        n_vertices=doc.fire.n_vertices,
        ignition=Ignition(center=tuple(ignition.center), semi_major=ignition.semi_major,
                          semi_minor=ignition.semi_minor,
                          orientation=float(np.deg2rad(ignition.orientation))),
        sensor=SensorModel(range=float(sensor_range), noise_std=doc.sensor.noise_std,
                           intensity=doc.sensor.intensity),
        agent=AgentState(doc.agent.position),
        action_set=tuple(ControlInput(speed=float(s), heading=float(h))
                         for s in doc.agent.speeds for h in doc.agent.headings),
        planner=PlannerConfig(
            horizon=doc.planner.horizon,
            discount=doc.planner.discount,
            budget=doc.planner.budget,
            rollout_particles=doc.planner.rollout_particles,
            rwd=RWDConfig(omega=doc.planner.omega, pooling=doc.planner.pooling),
        ),
        filter=FilterConfig(
            n_particles=doc.sim.n_particles,
            resample_threshold=doc.sim.resample_threshold,
            init_std=doc.fire.init_std,
            roughening_std=doc.sim.roughening_std,
            resampling=doc.sim.resampling,
        ),
        sim_steps=doc.sim.steps,
        rng_seed=doc.seed,
        heading_convention=doc.agent.heading_convention,
    )


def parse_scenario(data: Dict[str, Any]) -> Scenario:
    try:
        doc = ScenarioDocument.model_validate(data)
    except ValidationError as exc:
        raise ScenarioValidationError(problems_from_validation_error(exc)) from exc
    return scenario_from_document(doc)


def load_scenario(path: Union[str, Path]) -> Scenario:
    """Load and fully validate a scenario JSON file."""
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise ScenarioValidationError.single("<file>", f"scenario file not found: {path}") from exc
    except UnicodeDecodeError as exc:
        raise ScenarioValidationError.single(
            "<file>", f"scenario file is not UTF-8 text (byte {exc.start}): {exc.reason}"
        ) from exc
    except OSError as exc:
        raise ScenarioValidationError.single("<file>", f"cannot read scenario file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ScenarioValidationError.single(
            "<file>", f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}"
        ) from exc

    scenario = parse_scenario(data)
    logger.info(
        f"✅ Scenario loaded: {path.name} "
        f"({scenario.grid.cells_per_axis}x{scenario.grid.cells_per_axis} grid, "
        f"N={scenario.n_vertices}, dt={scenario.dt}s, steps={scenario.sim_steps})"
    )
    return scenario


def _ordered_unique(values):
    seen = []
    for value in values:
        if value not in seen:
            seen.append(value)
    return seen


def scenario_to_dict(scenario: Scenario) -> Dict[str, Any]:
    """Scenario as a JSON-ready document in file units (degrees)."""
    speeds = _ordered_unique([c.speed for c in scenario.action_set])
    headings = _ordered_unique([c.heading for c in scenario.action_set])
    product = tuple(ControlInput(speed=s, heading=h) for s in speeds for h in headings)
    if product != tuple(scenario.action_set):
        raise ValueError("action set is not a speeds x headings product and cannot be saved")

    field = scenario.field
    n = scenario.grid.cells_per_axis
    cells = [[{
        "wind_dir_mean": float(np.rad2deg(field.wind_dir_mean[ix, iy])),
        "wind_dir_concentration": float(field.wind_dir_concentration[ix, iy]),
        "wind_speed_mean": float(field.wind_speed_mean[ix, iy]),
        "wind_speed_std": float(field.wind_speed_std[ix, iy]),
        "spread_rate_mean": float(field.spread_rate_mean[ix, iy]),
        "spread_rate_std": float(field.spread_rate_std[ix, iy]),
    } for iy in range(n)] for ix in range(n)]

    planner = scenario.planner
    return {
        "grid": {
            "origin": list(scenario.grid.origin),
            "side_length": scenario.grid.side_length,
            "cells_per_axis": n,
        },
        "cells": cells,
        "risk": scenario.risk.values.tolist(),
        "fire": {
            "n_vertices": scenario.n_vertices,
            "ignition": {
                "center": [float(c) for c in scenario.ignition.center],
                "semi_major": scenario.ignition.semi_major,
                "semi_minor": scenario.ignition.semi_minor,
                "orientation": float(np.rad2deg(scenario.ignition.orientation)),
            },
            "init_std": scenario.filter.init_std,
        },
        "sensor": {
            "range": scenario.sensor.range,
            "noise_std": scenario.sensor.noise_std,
            "intensity": scenario.sensor.intensity,
        },
        "agent": {
            "position": scenario.agent.position.tolist(),
            "speeds": speeds,
            "headings": headings,
            "heading_convention": scenario.heading_convention,
        },
        "planner": {
            "horizon": planner.horizon,
            "discount": planner.discount,
            "budget": planner.budget,
            "rollout_particles": planner.rollout_particles,
            "omega": planner.rwd.omega,
            "pooling": planner.rwd.pooling,
        },
        "sim": {
            "steps": scenario.sim_steps,
            "dt": scenario.dt,
            "n_particles": scenario.filter.n_particles,
            "resample_threshold": scenario.filter.resample_threshold,
            "roughening_std": scenario.filter.roughening_std,
            "resampling": scenario.filter.resampling,
        },
        "seed": scenario.rng_seed,
    }


def save_scenario(scenario: Scenario, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(scenario_to_dict(scenario), indent=2), encoding="utf-8")
    logger.info(f"Scenario saved to: {path}")
    return path


def scenario_hash(scenario: Scenario) -> str:
    """SHA-256 of the canonical scenario document."""
    canonical = json.dumps(scenario_to_dict(scenario), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()
