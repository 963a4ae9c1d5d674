"""
Environment domain types: the square world, its grid, per-cell
environmental distributions, the risk map and per-vertex draws.
"""
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from app.models.errors import ScenarioValidationError


def _frozen_array(values, dtype=float) -> np.ndarray:
    array = np.array(values, dtype=dtype)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class GridSpec:
    """Square environment of side `side_length` split into cells_per_axis^2 cells."""
    origin: Tuple[float, float]
    side_length: float
    cells_per_axis: int

    def __post_init__(self):
        problems = []
        if len(self.origin) != 2 or not np.all(np.isfinite(self.origin)):
            problems.append(("grid.origin", "must be a finite 2-D point"))
        if not self.side_length > 0:
            problems.append(("grid.side_length", "must be > 0"))
        if int(self.cells_per_axis) != self.cells_per_axis or self.cells_per_axis < 1:
            problems.append(("grid.cells_per_axis", "must be an integer >= 1"))
        if problems:
            raise ScenarioValidationError(problems)
        object.__setattr__(self, "origin", (float(self.origin[0]), float(self.origin[1])))
        object.__setattr__(self, "side_length", float(self.side_length))
        object.__setattr__(self, "cells_per_axis", int(self.cells_per_axis))

    @property
    def cell_side(self) -> float:
        return self.side_length / self.cells_per_axis

    @property
    def n_cells(self) -> int:
        return self.cells_per_axis * self.cells_per_axis

    @property
    def lower(self) -> np.ndarray:
        return np.array(self.origin, dtype=float)

    @property
    def upper(self) -> np.ndarray:
        return self.lower + self.side_length

    def contains(self, points: np.ndarray) -> np.ndarray:
        """Boolean mask of points inside the closed environment square."""
        points = np.asarray(points, dtype=float)
        return np.all((points >= self.lower) & (points <= self.upper), axis=-1)


@dataclass(frozen=True)
class CellDistribution:
    """Environmental distribution parameters of one grid cell (angles in radians)."""
    wind_dir_mean: float
    wind_dir_concentration: float
    wind_speed_mean: float
    wind_speed_std: float
    spread_rate_mean: float
    spread_rate_std: float

    def problems(self, path: str) -> List[Tuple[str, str]]:
        found = []
        for name in ("wind_dir_concentration", "wind_speed_std", "spread_rate_std",
                     "wind_speed_mean", "spread_rate_mean"):
            value = getattr(self, name)
            if not np.isfinite(value) or value < 0:
                found.append((f"{path}.{name}", "must be finite and >= 0"))
        if not np.isfinite(self.wind_dir_mean):
            found.append((f"{path}.wind_dir_mean", "must be finite"))
        return found


# Field names shared by CellDistribution and EnvField
CELL_FIELDS = (
    "wind_dir_mean",
    "wind_dir_concentration",
    "wind_speed_mean",
    "wind_speed_std",
    "spread_rate_mean",
    "spread_rate_std",
)


@dataclass(frozen=True, eq=False)
class EnvField:
    """Per-cell distributions stored as (n, n) arrays indexed [ix, iy]."""
    grid: GridSpec
    wind_dir_mean: np.ndarray
    wind_dir_concentration: np.ndarray
    wind_speed_mean: np.ndarray
    wind_speed_std: np.ndarray
    spread_rate_mean: np.ndarray
    spread_rate_std: np.ndarray

    def __post_init__(self):
        shape = (self.grid.cells_per_axis, self.grid.cells_per_axis)
        problems = []
        for name in CELL_FIELDS:
            array = _frozen_array(getattr(self, name))
            if array.shape != shape:
                problems.append((f"cells.{name}", f"expected shape {shape}, got {array.shape}"))
            object.__setattr__(self, name, array)
        if problems:
            raise ScenarioValidationError(problems)
        for ix in range(shape[0]):
            for iy in range(shape[1]):
                problems.extend(self.cell(ix, iy).problems(f"cells.{ix}.{iy}"))
        if problems:
            raise ScenarioValidationError(problems)

    @classmethod
    def uniform(cls, grid: GridSpec, cell: CellDistribution) -> "EnvField":
        n = grid.cells_per_axis
        return cls(grid=grid, **{
            name: np.full((n, n), getattr(cell, name), dtype=float) for name in CELL_FIELDS
        })

    def cell(self, ix: int, iy: int) -> CellDistribution:
        return CellDistribution(**{
            name: float(getattr(self, name)[ix, iy]) for name in CELL_FIELDS
        })


@dataclass(frozen=True, eq=False)
class RiskMap:
    """Per-cell risk in [0, 1], indexed [ix, iy]."""
    values: np.ndarray

    def __post_init__(self):
        values = _frozen_array(self.values)
        if values.ndim != 2 or values.shape[0] != values.shape[1]:
            raise ScenarioValidationError.single("risk", "must be a square nested array")
        bad = np.argwhere(~((values >= 0.0) & (values <= 1.0)))
        if bad.size:
            raise ScenarioValidationError([
                (f"risk.{ix}.{iy}", f"risk {values[ix, iy]} outside [0, 1]") for ix, iy in bad
            ])
        object.__setattr__(self, "values", values)

    @classmethod
    def uniform(cls, grid: GridSpec, value: float = 1.0) -> "RiskMap":
        n = grid.cells_per_axis
        return cls(np.full((n, n), value, dtype=float))


@dataclass(frozen=True, eq=False)
class EnvSample:
    """Per-vertex environmental realisation; arrays share shape (..., N)."""
    wind_dir: np.ndarray
    wind_speed: np.ndarray
    spread_rate: np.ndarray

    def __post_init__(self):
        for name in ("wind_dir", "wind_speed", "spread_rate"):
            object.__setattr__(self, name, _frozen_array(getattr(self, name)))
        if not (self.wind_dir.shape == self.wind_speed.shape == self.spread_rate.shape):
            raise ValueError("EnvSample arrays must share one shape")

    def __len__(self) -> int:
        return self.wind_dir.shape[-1]
