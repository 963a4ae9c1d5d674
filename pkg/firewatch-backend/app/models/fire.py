"""
Fire front domain types.
"""
from dataclasses import dataclass

import numpy as np

from app.models.errors import ModelDomainError


@dataclass(frozen=True, eq=False)
class FireFront:
    """Closed ring of N >= 3 vertices in counter-clockwise order, shape (N, 2).

    Orientation is not enforced here: a propagated front that loses its CCW
    order is still a valid value and gets flagged by check_front.
    """
    vertices: np.ndarray

    def __post_init__(self):
        vertices = np.array(self.vertices, dtype=float)
        if vertices.ndim != 2 or vertices.shape[1] != 2:
            raise ModelDomainError(f"FireFront vertices must have shape (N, 2), got {vertices.shape}")
        if vertices.shape[0] < 3:
            raise ModelDomainError(f"FireFront needs at least 3 vertices, got {vertices.shape[0]}")
        vertices.setflags(write=False)
        object.__setattr__(self, "vertices", vertices)

    def __len__(self) -> int:
        return self.vertices.shape[0]

    def to_list(self):
        return self.vertices.tolist()


@dataclass(frozen=True)
class ShapeParams:
    """Elliptical growth shape at one vertex (a1, a2, a3 in m/s)."""
    a1: float
    a2: float
    a3: float
    lb: float
    hb: float


@dataclass(frozen=True, eq=False)
class TangentField:
    """Unit tangents of a front, shape (N, 2), oriented along CCW traversal."""
    tangents: np.ndarray

    def __len__(self) -> int:
        return self.tangents.shape[0]
