"""
Sensing Service
Agent kinematics, the circular sensing footprint, Poisson point process
measurement generation and the set-valued measurement log-likelihood.
"""
import logging
from typing import Optional

import numpy as np
from scipy.special import gammaln, logsumexp

from app.models.environment import GridSpec
from app.models.fire import FireFront
from app.models.sensing import AgentState, ControlInput, MeasurementSet, SensorModel

logger = logging.getLogger(__name__)

# Upper bound on (particles x detections x vertices) entries evaluated at once
_LIKELIHOOD_CHUNK_ENTRIES = 2_000_000


def sensing_range_from_camera(altitude: float, fov_deg: float) -> float:
    """Footprint radius of a nadir camera: altitude * tan(fov / 2)."""
    if not altitude > 0 or not 0 < fov_deg < 180:
        raise ValueError(f"need altitude > 0 and 0 < fov < 180 deg, got {altitude}, {fov_deg}")
    return float(altitude * np.tan(np.deg2rad(fov_deg) / 2.0))


def heading_vector(heading_deg: float, convention: str = "math") -> np.ndarray:
    """Unit direction of a heading: math = (cos, sin) from +x, compass = (sin, cos) from +y."""
    rad = np.deg2rad(heading_deg)
    if convention == "compass":
        return np.array([np.sin(rad), np.cos(rad)])
    return np.array([np.cos(rad), np.sin(rad)])


def agent_step(
    state: AgentState,
    control: ControlInput,
    dt: float,
    grid: Optional[GridSpec] = None,
    convention: str = "math",
) -> AgentState:
    """Move the agent speed * dt along its heading; clamp to the environment when a grid is given."""
    position = state.position + control.speed * dt * heading_vector(control.heading, convention)
    if grid is not None:
        position = np.clip(position, grid.lower, grid.upper)
    return AgentState(position)


def in_range_mask(agent_position: np.ndarray, points: np.ndarray, sensor_range: float) -> np.ndarray:
    """Boolean mask over points (..., 2) inside the closed sensing disc."""
    distance = np.linalg.norm(np.asarray(points, dtype=float) - agent_position, axis=-1)
    return distance <= sensor_range


def in_range(agent: AgentState, point, sensor: SensorModel) -> bool:
    return bool(in_range_mask(agent.position, np.asarray(point, dtype=float), sensor.range))


def generate_measurements(
    front: FireFront,
    agent: AgentState,
    sensor: SensorModel,
    rng: np.random.Generator,
) -> MeasurementSet:
    """Each in-range vertex emits Poisson(lambda) detections with N(0, sigma_z^2 I) noise."""
    visible = front.vertices[in_range_mask(agent.position, front.vertices, sensor.range)]
    if visible.shape[0] == 0:
        return MeasurementSet.empty()

    counts = rng.poisson(sensor.intensity, size=visible.shape[0])
    centers = np.repeat(visible, counts, axis=0)
    noise = rng.normal(0.0, sensor.noise_std, size=centers.shape)
    logger.debug(f"🔍 {visible.shape[0]} vertices in range, {int(counts.sum())} detections")
    return MeasurementSet(centers + noise)


def _log_intensity_chunks(z: MeasurementSet, particles: np.ndarray, mask: np.ndarray, sensor: SensorModel):
    """Yield (lo, hi, log_gamma) with log_gamma[p, k, i] = log gamma_i(z_k) for fronts lo..hi."""
    variance = sensor.noise_std ** 2
    log_norm = np.log(sensor.intensity) - np.log(2.0 * np.pi * variance)
    detections = z.detections
    n_particles, n_vertices = particles.shape[:2]
    chunk = max(1, _LIKELIHOOD_CHUNK_ENTRIES // max(1, len(z) * n_vertices))
    for lo in range(0, n_particles, chunk):
        hi = min(lo + chunk, n_particles)
        delta = detections[None, :, None, :] - particles[lo:hi, None, :, :]
        sq_dist = np.einsum("pmnk,pmnk->pmn", delta, delta)
        yield lo, hi, np.where(mask[lo:hi, None, :], log_norm - sq_dist / (2.0 * variance), -np.inf)


def log_set_likelihood_batch(
    z: MeasurementSet,
    particles: np.ndarray,
    agent: AgentState,
    sensor: SensorModel,
) -> np.ndarray:
    """log p(Z | X, y) for every front in a (P, N, 2) stack.

    -sum_i lambda_i + sum_k log(sum_i gamma_i(z_k)) - log(m!), with
    gamma_i(z) = lambda * N(z; x_i, sigma_z^2 I) for in-range vertices and 0 otherwise.
    The per-detection terms are sorted before summation, so the result does not
    depend on the order of the detections.
    """
    particles = np.asarray(particles, dtype=float)
    mask = in_range_mask(agent.position, particles, sensor.range)
    m = len(z)
    log_lik = -sensor.intensity * mask.sum(axis=-1) - gammaln(m + 1)
    if m == 0:
        return log_lik.astype(float)

    per_detection = np.empty((particles.shape[0], m))
    with np.errstate(divide="ignore", invalid="ignore"):
        for lo, hi, log_gamma in _log_intensity_chunks(z, particles, mask, sensor):
            per_detection[lo:hi] = logsumexp(log_gamma, axis=-1)

    per_detection.sort(axis=1)
    return log_lik + per_detection.sum(axis=1)


def log_vertex_likelihood_batch(
    z: MeasurementSet,
    particles: np.ndarray,
    agent: AgentState,
    sensor: SensorModel,
) -> np.ndarray:
    """Per-vertex shares of the set log-likelihood, shape (P, N).

    Each detection term log(sum_j gamma_j(z_k)) is split over the vertices by
    their responsibilities gamma_i(z_k) / sum_j gamma_j(z_k); log(m!) is split
    evenly. Rows sum to `log_set_likelihood_batch`. A front with a
    zero-intensity detection gets -inf at every vertex.
    """
    particles = np.asarray(particles, dtype=float)
    mask = in_range_mask(agent.position, particles, sensor.range)
    n_vertices = particles.shape[1]
    m = len(z)
    shares = -sensor.intensity * mask - gammaln(m + 1) / n_vertices
    if m == 0:
        return shares.astype(float)

    with np.errstate(divide="ignore", invalid="ignore"):
        for lo, hi, log_gamma in _log_intensity_chunks(z, particles, mask, sensor):
            total = logsumexp(log_gamma, axis=-1)
            covered = np.isfinite(total)
            safe_total = np.where(covered, total, 0.0)
            responsibility = np.where(covered[..., None], np.exp(log_gamma - safe_total[..., None]), 0.0)
            shares[lo:hi] += np.einsum("pmn,pm->pn", responsibility, safe_total)
            shares[lo:hi][~covered.all(axis=1)] = -np.inf
    return shares


def log_set_likelihood(z: MeasurementSet, front: FireFront, agent: AgentState, sensor: SensorModel) -> float:
    """Set log-likelihood of one front; -inf when a detection has zero total intensity."""
    return float(log_set_likelihood_batch(z, front.vertices[None], agent, sensor)[0])
