"""
Scenario file schema (pydantic).

The JSON document keeps lengths in meters, times in seconds and angles in
degrees; conversion to radians happens when the schema is turned into a
Scenario by the environment service.
"""
from typing import Annotated, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from config.config import Config

NonNegative = Annotated[float, Field(ge=0)]
RiskValue = Annotated[float, Field(ge=0, le=1)]
Point = Tuple[float, float]


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class GridSection(_Section):
    origin: Point = (0.0, 0.0)
    side_length: float = Field(gt=0)
    cells_per_axis: int = Field(ge=1)


class CellSection(_Section):
    wind_dir_mean: float  # degrees, 0 = toward +y (North), 90 = toward +x (East)
    wind_dir_concentration: NonNegative
    wind_speed_mean: NonNegative
    wind_speed_std: NonNegative
    spread_rate_mean: NonNegative
    spread_rate_std: NonNegative


class IgnitionSection(_Section):
    center: Point
    semi_major: float = Field(gt=0)
    semi_minor: float = Field(gt=0)
    orientation: float = 0.0  # degrees


class FireSection(_Section):
    n_vertices: int = Field(ge=3)
    ignition: IgnitionSection
    init_std: NonNegative = Config.INIT_STD


class SensorSection(_Section):
    range: Optional[float] = Field(default=None, gt=0)
    altitude: Optional[float] = Field(default=None, gt=0)
    fov: Optional[float] = Field(default=None, gt=0, lt=180)  # degrees
    noise_std: float = Field(gt=0)
    intensity: float = Field(gt=0)

    @model_validator(mode="after")
    def _range_or_camera(self):
        if self.range is None and (self.altitude is None or self.fov is None):
            raise ValueError("give either range or both altitude and fov")
        return self


class AgentSection(_Section):
    position: Point
    speeds: List[NonNegative] = Field(min_length=1)
    headings: List[float] = Field(min_length=1)  # degrees
    heading_convention: Literal["math", "compass"] = "math"


class PlannerSection(_Section):
    horizon: int = Field(default=1, ge=1)
    discount: float = Field(default=0.99, gt=0, le=1)
    budget: Optional[int] = Field(default=None, ge=1)
    rollout_particles: int = Field(default=Config.ROLLOUT_PARTICLES, ge=1)
    omega: Optional[float] = Field(default=None, gt=0)
    pooling: Literal["per_vertex", "pooled"] = "per_vertex"


class SimSection(_Section):
    steps: int = Field(ge=1)
    dt: float = Field(gt=0)
    n_particles: int = Field(default=2000, ge=1)
    resample_threshold: float = Field(default=Config.RESAMPLE_THRESHOLD, gt=0, le=1)
    roughening_std: NonNegative = Config.ROUGHENING_STD
    resampling: Literal["per_vertex", "global"] = Config.RESAMPLING


class ScenarioDocument(_Section):
    grid: GridSection
    cells: List[List[CellSection]]
    risk: List[List[RiskValue]]
    fire: FireSection
    sensor: SensorSection
    agent: AgentSection
    planner: PlannerSection = PlannerSection()
    sim: SimSection
    seed: int = Field(ge=0, lt=2 ** 64)


def problems_from_validation_error(exc: ValidationError) -> List[Tuple[str, str]]:
    """Flatten pydantic errors into (dotted field path, message) pairs."""
    problems = []
    for error in exc.errors():
        path = ".".join(str(part) for part in error.get("loc", ())) or "<root>"
        problems.append((path, error.get("msg", "invalid value")))
    return problems
