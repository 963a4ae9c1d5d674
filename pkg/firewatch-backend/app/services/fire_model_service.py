"""
Fire Model Service
Stochastic elliptical fire-front propagation: shape parameters, ring tangents,
per-vertex growth velocity and the discrete-time vertex update.

All array functions accept a leading particle axis, so the filter propagates a
whole (N_s, N, 2) particle stack with one call; the single-front functions are
thin wrappers around the batched ones.
"""
import logging
from typing import List, Tuple, Union

import numpy as np

from app.models.environment import EnvSample
from app.models.errors import DegenerateFrontError, ModelDomainError
from app.models.fire import FireFront, ShapeParams, TangentField

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]

# Below this the tangent/ellipse interaction term is treated as zero
VELOCITY_DENOMINATOR_EPS = 1e-12


def _scalar_or_array(values: np.ndarray) -> ArrayLike:
    return float(values) if values.ndim == 0 else values


# ---------------------------------------------------------------------------
# Shape parameters
# ---------------------------------------------------------------------------

def length_breadth_ratio(wind_speed: ArrayLike) -> ArrayLike:
    """LB(w) = 0.936 e^(0.2566 w) + 0.461 e^(-0.1548 w) - 0.397, floored at 1."""
    w = np.asarray(wind_speed, dtype=float)
    if np.any(w < 0):
        raise ModelDomainError(f"wind_speed must be >= 0, got {wind_speed}")
    lb = 0.936 * np.exp(0.2566 * w) + 0.461 * np.exp(-0.1548 * w) - 0.397
    return _scalar_or_array(np.maximum(lb, 1.0))


def head_back_ratio(lb: ArrayLike) -> ArrayLike:
    """HB = (LB + sqrt(LB^2 - 1)) / (LB - sqrt(LB^2 - 1))."""
    lb = np.asarray(lb, dtype=float)
    if np.any(lb < 1):
        raise ModelDomainError(f"length-to-breadth ratio must be >= 1, got {lb}")
    root = np.sqrt(lb * lb - 1.0)
    return _scalar_or_array((lb + root) / (lb - root))


def _shape_arrays(spread_rate: np.ndarray, wind_speed: np.ndarray) -> Tuple[np.ndarray, ...]:
    spread_rate = np.asarray(spread_rate, dtype=float)
    if np.any(spread_rate < 0):
        raise ModelDomainError("spread_rate must be >= 0")
    lb = np.asarray(length_breadth_ratio(wind_speed))
    hb = np.asarray(head_back_ratio(lb))
    head_plus_back = spread_rate + spread_rate / hb
    a1 = head_plus_back / (2.0 * lb)
    a2 = head_plus_back / 2.0
    a3 = a2 - spread_rate / hb
    return a1, a2, a3, lb, hb


def shape_params(spread_rate: float, wind_speed: float) -> ShapeParams:
    """Elliptical growth parameters (a1 semi-minor, a2 semi-major, a3 center offset)."""
    a1, a2, a3, lb, hb = _shape_arrays(np.asarray(spread_rate), np.asarray(wind_speed))
    return ShapeParams(a1=float(a1), a2=float(a2), a3=float(a3), lb=float(lb), hb=float(hb))


# ---------------------------------------------------------------------------
# Geometry
# ---------------------------------------------------------------------------

def tangents_batch(vertices: np.ndarray) -> np.ndarray:
    """Unit central-difference tangents of closed rings, shape (..., N, 2)."""
    vertices = np.asarray(vertices, dtype=float)
    diff = np.roll(vertices, -1, axis=-2) - np.roll(vertices, 1, axis=-2)
    norms = np.linalg.norm(diff, axis=-1, keepdims=True)
    if np.any(norms == 0.0):
        bad = np.argwhere(norms[..., 0] == 0.0)[0]
        raise DegenerateFrontError(f"ring neighbours of vertex {tuple(int(i) for i in bad)} coincide")
    return diff / norms


def tangents(front: FireFront) -> TangentField:
    return TangentField(tangents_batch(front.vertices))


def _velocity(tx, ty, theta, a1, a2, a3) -> np.ndarray:
    sin_t, cos_t = np.sin(theta), np.cos(theta)
    sc = tx * sin_t + ty * cos_t
    cs = tx * cos_t - ty * sin_t
    denom = np.sqrt(a2 * a2 * cs * cs + a1 * a1 * sc * sc)
    degenerate = denom < VELOCITY_DENOMINATOR_EPS
    safe = np.where(degenerate, 1.0, denom)

    vx = (a1 * a1 * cos_t * sc - a2 * a2 * sin_t * cs) / safe
    vy = (-a1 * a1 * sin_t * sc - a2 * a2 * cos_t * cs) / safe
    vx = np.where(degenerate, 0.0, vx) + a3 * sin_t
    vy = np.where(degenerate, 0.0, vy) + a3 * cos_t
    return np.stack([vx, vy], axis=-1)


def vertex_velocity(tangent, wind_dir: float, shape: ShapeParams) -> np.ndarray:
    """Growth velocity (m/s) of one vertex; theta = 0 pushes the head toward +y."""
    tx, ty = np.asarray(tangent, dtype=float).reshape(2)
    return _velocity(tx, ty, float(wind_dir), shape.a1, shape.a2, shape.a3)


# ---------------------------------------------------------------------------
# Propagation
# ---------------------------------------------------------------------------

def propagate_batch(vertices: np.ndarray, env: EnvSample, dt: float) -> np.ndarray:
    """Advance a stack of fronts (..., N, 2) by one step of length dt.

    Tangents come from the pre-update fronts; env arrays have shape (..., N).
    """
    vertices = np.asarray(vertices, dtype=float)
    if env.wind_dir.shape != vertices.shape[:-1]:
        raise ModelDomainError(
            f"environment sample shape {env.wind_dir.shape} does not match fronts {vertices.shape[:-1]}"
        )
    tangent = tangents_batch(vertices)
    a1, a2, a3, _, _ = _shape_arrays(env.spread_rate, env.wind_speed)
    velocity = _velocity(tangent[..., 0], tangent[..., 1], env.wind_dir, a1, a2, a3)
    return vertices + dt * velocity


def propagate(front: FireFront, env: EnvSample, dt: float) -> FireFront:
    if len(env) != len(front) or env.wind_dir.ndim != 1:
        raise ModelDomainError(f"environment sample has {len(env)} entries for a {len(front)}-vertex front")
    return FireFront(propagate_batch(front.vertices, env, dt))


# ---------------------------------------------------------------------------
# Construction and health checks
# ---------------------------------------------------------------------------

def ellipse_front(center, semi_major: float, semi_minor: float, n: int, orientation: float = 0.0) -> FireFront:
    """N vertices on an ellipse at equal parameter-angle spacing, counter-clockwise.

    `orientation` rotates the semi-major axis away from +x (radians).
    """
    if n < 3:
        raise ModelDomainError(f"a front needs at least 3 vertices, got {n}")
    angles = 2.0 * np.pi * np.arange(n) / n
    local = np.stack([semi_major * np.cos(angles), semi_minor * np.sin(angles)], axis=-1)
    c, s = np.cos(orientation), np.sin(orientation)
    rotation = np.array([[c, -s], [s, c]])
    logger.debug(f"Ellipse front: n={n}, axes={semi_major}/{semi_minor} m, center={tuple(center)}")
    return FireFront(np.asarray(center, dtype=float) + local @ rotation.T)


def signed_area(front: Union[FireFront, np.ndarray]) -> ArrayLike:
    """Shoelace area; positive for counter-clockwise rings. Accepts (..., N, 2)."""
    vertices = front.vertices if isinstance(front, FireFront) else np.asarray(front, dtype=float)
    x, y = vertices[..., 0], vertices[..., 1]
    area = 0.5 * np.sum(x * np.roll(y, -1, axis=-1) - np.roll(x, -1, axis=-1) * y, axis=-1)
    return _scalar_or_array(np.asarray(area))


def _cross(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


def self_intersections(front: FireFront) -> List[Tuple[int, int]]:
    """Pairs of non-adjacent edges (i, j) that cross properly."""
    v = front.vertices
    n = len(front)
    start, end = v, np.roll(v, -1, axis=0)
    i, j = np.triu_indices(n, k=2)
    keep = ~((i == 0) & (j == n - 1))
    i, j = i[keep], j[keep]
    if i.size == 0:
        return []

    edge_i = end[i] - start[i]
    edge_j = end[j] - start[j]
    d1 = _cross(edge_i, start[j] - start[i])
    d2 = _cross(edge_i, end[j] - start[i])
    d3 = _cross(edge_j, start[i] - start[j])
    d4 = _cross(edge_j, end[i] - start[j])
    crossing = (d1 * d2 < 0) & (d3 * d4 < 0)
    return [(int(a), int(b)) for a, b in zip(i[crossing], j[crossing])]


def check_front(front: FireFront) -> List[str]:
    """Health warnings for a front: lost CCW orientation and self-intersection.

    Fronts are never repaired; callers record the warnings and keep going.
    """
    warnings = []
    area = signed_area(front)
    if area <= 0:
        warnings.append(f"front is not counter-clockwise (signed area {area:.3f} m^2)")
    crossings = self_intersections(front)
    if crossings:
        shown = ", ".join(f"{a}-{b}" for a, b in crossings[:5])
        more = f" (+{len(crossings) - 5} more)" if len(crossings) > 5 else ""
        warnings.append(f"front self-intersects at edge pairs {shown}{more}")
    return warnings
