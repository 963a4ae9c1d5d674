"""
Error types shared by the FireWatch services.
"""
from typing import Iterable, List, Tuple


class FirewatchError(Exception):
    """Base class for all FireWatch errors."""


class ScenarioValidationError(FirewatchError, ValueError):
    """A scenario (file or in-memory) violates its schema or an invariant.

    Every problem is reported with the dotted path of the offending field,
    e.g. ``sim.dt`` or ``risk.0.9``.
    """

    def __init__(self, problems: Iterable[Tuple[str, str]]):
        self.problems: List[Tuple[str, str]] = list(problems)
        lines = [f"{path}: {message}" for path, message in self.problems]
        super().__init__("Invalid scenario:\n  " + "\n  ".join(lines))

    @property
    def field_paths(self) -> List[str]:
        return [path for path, _ in self.problems]

    @classmethod
    def single(cls, path: str, message: str) -> "ScenarioValidationError":
        return cls([(path, message)])


class DegenerateFrontError(FirewatchError, ValueError):
    """Two ring neighbours of a vertex coincide, so no tangent exists."""


class ModelDomainError(FirewatchError, ValueError):
    """An input lies outside the domain of a model formula."""
