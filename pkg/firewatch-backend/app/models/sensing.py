"""
Agent and sensor domain types.
"""
from dataclasses import dataclass

import numpy as np

from app.models.errors import ModelDomainError, ScenarioValidationError


@dataclass(frozen=True, eq=False)
class AgentState:
    position: np.ndarray

    def __post_init__(self):
        position = np.array(self.position, dtype=float).reshape(2)
        if not np.all(np.isfinite(position)):
            raise ModelDomainError(f"Agent position must be finite, got {position}")
        position.setflags(write=False)
        object.__setattr__(self, "position", position)


@dataclass(frozen=True)
class ControlInput:
    """One element of the discrete action set: speed (m/s) and heading (deg)."""
    speed: float
    heading: float

    def to_dict(self):
        return {"speed": self.speed, "heading": self.heading}


@dataclass(frozen=True)
class SensorModel:
    """Circular-footprint PPP sensor: range R_a (m, may be inf), noise sigma_z (m), intensity lambda."""
    range: float
    noise_std: float
    intensity: float

    def __post_init__(self):
        problems = []
        if not self.range > 0:
            problems.append(("sensor.range", "must be > 0"))
        if not (self.noise_std > 0 and np.isfinite(self.noise_std)):
            problems.append(("sensor.noise_std", "must be finite and > 0"))
        if not (self.intensity > 0 and np.isfinite(self.intensity)):
            problems.append(("sensor.intensity", "must be finite and > 0"))
        if problems:
            raise ScenarioValidationError(problems)


@dataclass(frozen=True, eq=False)
class MeasurementSet:
    """Unordered set of detections, shape (m, 2)."""
    detections: np.ndarray

    def __post_init__(self):
        detections = np.array(self.detections, dtype=float).reshape(-1, 2)
        detections.setflags(write=False)
        object.__setattr__(self, "detections", detections)

    def __len__(self) -> int:
        return self.detections.shape[0]

    @classmethod
    def empty(cls) -> "MeasurementSet":
        return cls(np.empty((0, 2)))
