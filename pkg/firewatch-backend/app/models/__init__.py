"""
Domain models
"""
from .environment import CellDistribution, EnvField, EnvSample, GridSpec, RiskMap
from .errors import DegenerateFrontError, FirewatchError, ModelDomainError, ScenarioValidationError
from .filter import Belief, FilterConfig
from .fire import FireFront, ShapeParams, TangentField
from .harness import ControllerSpec, EpisodeTrace, MonteCarloReport, StepRecord
from .planner import PlannerConfig, Policy, PolicyStats, RWDConfig
from .scenario import Ignition, Scenario
from .sensing import AgentState, ControlInput, MeasurementSet, SensorModel

__all__ = [
    'CellDistribution',
    'EnvField',
    'EnvSample',
    'GridSpec',
    'RiskMap',
    'DegenerateFrontError',
    'FirewatchError',
    'ModelDomainError',
    'ScenarioValidationError',
    'Belief',
    'FilterConfig',
    'FireFront',
    'ShapeParams',
    'TangentField',
    'ControllerSpec',
    'EpisodeTrace',
    'MonteCarloReport',
    'StepRecord',
    'PlannerConfig',
    'Policy',
    'PolicyStats',
    'RWDConfig',
    'Ignition',
    'Scenario',
    'AgentState',
    'ControlInput',
    'MeasurementSet',
    'SensorModel',
]
