"""
Harness domain types: controller specifications, episode traces and
Monte-Carlo reports.
"""
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from app.models.errors import ScenarioValidationError

CONTROLLER_KINDS = ("lcb", "random", "static", "infinite_range")


@dataclass(frozen=True)
class ControllerSpec:
    """Controller used by the harness.

    kind "lcb" runs the LCB policy search with horizon T (myopic is T = 1);
    the baselines are "random" (uniform over the action set), "static"
    (agent never moves) and "infinite_range" (static agent, unlimited sensor).
    A horizon of None on an "lcb" spec means "take it from the scenario".
    """
    kind: str
    horizon: Optional[int] = None

    def __post_init__(self):
        if self.kind not in CONTROLLER_KINDS:
            raise ScenarioValidationError.single("controller", f"unknown controller kind '{self.kind}'")
        if self.kind == "lcb":
            if self.horizon is not None and self.horizon < 1:
                raise ScenarioValidationError.single("controller", "horizon T must be >= 1")
        elif self.horizon is not None:
            raise ScenarioValidationError.single("controller", f"'{self.kind}' takes no horizon")

    @classmethod
    def parse(cls, text: str) -> "ControllerSpec":
        """Parse "lcb:3", "lcb", "myopic", "random", "static" or "infinite_range"."""
        name, _, horizon = text.strip().lower().partition(":")
        name = name.replace("-", "_")
        if name == "myopic":
            if horizon and horizon != "1":
                raise ScenarioValidationError.single("controller", "myopic is fixed to T = 1")
            return cls("lcb", 1)
        if name in ("inf", "inf_sr"):
            name = "infinite_range"
        if horizon:
            try:
                value = int(horizon)
            except ValueError:
                raise ScenarioValidationError.single("controller", f"horizon '{horizon}' is not an integer") from None
            return cls(name, value)
        return cls(name)

    @property
    def name(self) -> str:
        if self.kind == "lcb":
            return "lcb" if self.horizon is None else f"lcb:{self.horizon}"
        return self.kind

    def with_horizon(self, horizon: int) -> "ControllerSpec":
        if self.kind != "lcb" or self.horizon is not None:
            return self
        return ControllerSpec("lcb", horizon)

    def __str__(self) -> str:
        return self.name


@dataclass
class StepRecord:
    """Everything logged for one simulated time step."""
    step: int
    true_front: List[List[float]]
    mmse_front: List[List[float]]
    agent_position: List[float]
    control: Optional[Dict[str, float]]
    n_measurements: int
    ess: float
    vertex_std: List[float]
    rwd: float
    rmse: float
    resampled: bool = False
    diverged: bool = False
    warnings: List[str] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class EpisodeTrace:
    controller: str
    seed: int
    scenario_hash: str
    records: List[StepRecord] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.records)

    @property
    def rmse_series(self) -> np.ndarray:
        return np.array([record.rmse for record in self.records], dtype=float)

    @property
    def log10_rmse_series(self) -> np.ndarray:
        return np.log10(np.maximum(self.rmse_series, 1e-12))


@dataclass
class MonteCarloReport:
    """Per-controller, per-step statistics of log10 RMSE across paired trials.

    `log10_rmse[name]` keeps the raw (trials, steps) matrix so aggregates can be
    recomputed from it.
    """
    controllers: List[str]
    trials: int
    seeds: List[int]
    log10_rmse: Dict[str, np.ndarray]
    traces: Optional[Dict[str, List[EpisodeTrace]]] = None

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("MonteCarloReport needs at least one trial")

    def mean(self, controller: str) -> np.ndarray:
        return self.log10_rmse[controller].mean(axis=0)

    def std(self, controller: str) -> np.ndarray:
        return self.log10_rmse[controller].std(axis=0)

    @property
    def n_steps(self) -> int:
        return next(iter(self.log10_rmse.values())).shape[1]

    def rows(self) -> List[Dict[str, Any]]:
        """report.csv rows: controller, step, mean_log10_rmse, std_log10_rmse, trials."""
        rows = []
        for name in self.controllers:
            mean, std = self.mean(name), self.std(name)
            for step in range(self.n_steps):
                rows.append({
                    "controller": name,
                    "step": step + 1,
                    "mean_log10_rmse": float(mean[step]),
                    "std_log10_rmse": float(std[step]),
                    "trials": self.trials,
                })
        return rows
