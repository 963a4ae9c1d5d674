"""
Filter Service
Sequential importance resampling particle filter over fire fronts.

Particles are one (N_s, N, 2) array; weights live in log space and are
normalised with log-sum-exp.
"""
import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.special import logsumexp

from app.models.environment import EnvField
from app.models.filter import Belief, FilterConfig
from app.models.fire import FireFront
from app.models.scenario import Scenario
from app.models.sensing import AgentState, MeasurementSet, SensorModel
from app.services.environment_service import sample_env_batch
from app.services.fire_model_service import ellipse_front, propagate_batch
from app.services.sensing_service import log_set_likelihood_batch, log_vertex_likelihood_batch

logger = logging.getLogger(__name__)

SNAP_TOLERANCE = 1e-9


@dataclass
class FilterStepResult:
    """Outcome of one measurement update: posterior plus diagnostics."""
    belief: Belief
    ess: float
    resampled: bool

    @property
    def diverged(self) -> bool:
        return self.belief.diverged


def initial_front(scenario: Scenario) -> FireFront:
    ignition = scenario.ignition
    return ellipse_front(ignition.center, ignition.semi_major, ignition.semi_minor,
                         scenario.n_vertices, ignition.orientation)


def init_belief(scenario: Scenario, rng: np.random.Generator, n_particles: Optional[int] = None) -> Belief:
    """Ignition ellipse with i.i.d. Gaussian vertex perturbation, uniform weights."""
    cfg = scenario.filter
    n_particles = n_particles or cfg.n_particles
    truth = initial_front(scenario).vertices
    particles = np.broadcast_to(truth, (n_particles,) + truth.shape).copy()
    if cfg.init_std > 0:
        particles += rng.normal(0.0, cfg.init_std, size=particles.shape)
    logger.debug(f"Initial belief: {n_particles} particles, init std {cfg.init_std} m")
    return Belief.uniform(particles)


def predict(belief: Belief, field: EnvField, dt: float, rng: np.random.Generator) -> Belief:
    """Propagate every particle with its own environment draw; weights are untouched."""
    env = sample_env_batch(belief.particles, field, rng)
    return Belief(propagate_batch(belief.particles, env, dt), belief.log_weights)


def update(belief: Belief, z: MeasurementSet, agent: AgentState, sensor: SensorModel) -> Belief:
    """Bayes update with the set likelihood; all -inf resets to uniform and flags divergence."""
    return _reweight(belief, log_set_likelihood_batch(z, belief.particles, agent, sensor), len(z))


def _reweight(belief: Belief, log_lik: np.ndarray, n_detections: int) -> Belief:
    log_weights = belief.log_weights + log_lik
    with np.errstate(invalid="ignore"):
        total = logsumexp(log_weights)
    if not np.isfinite(total):
        logger.warning(
            f"⚠ Filter divergence: every particle has zero likelihood for {n_detections} detections, "
            f"resetting to uniform weights"
        )
        return Belief(belief.particles, np.full(belief.n_particles, -np.log(belief.n_particles)), diverged=True)
    return Belief(belief.particles, log_weights - total)


def normalized_weights(belief: Belief) -> np.ndarray:
    return belief.weights


def effective_sample_size(belief: Belief) -> float:
    w = belief.weights
    return float(1.0 / np.sum(w * w))


def systematic_indices(weights: np.ndarray, n: int, u: float) -> np.ndarray:
    """Parent indices of n systematic draws with offset u in [0, 1), ascending.

    Parent i receives ceil(n * c_i - u) - ceil(n * c_{i-1} - u) copies, c the
    cumulative weights with n * c snapped to integers within float noise.
    """
    scaled = n * np.cumsum(weights)
    snapped = np.round(scaled)
    scaled = np.where(np.abs(scaled - snapped) < SNAP_TOLERANCE, snapped, scaled)
    scaled[-1] = n
    edges = np.clip(np.ceil(scaled - u), 0, n).astype(int)
    return np.repeat(np.arange(len(weights)), np.diff(edges, prepend=0))


def resample(
    belief: Belief,
    rng: np.random.Generator,
    offset: Optional[float] = None,
    n_out: Optional[int] = None,
) -> Belief:
    """Systematic resampling: one uniform offset u in [0, 1), positions (u + k) / M.

    With M = N_s particle i is copied floor or ceil of N_s * w_i times for every
    u. `offset` fixes u; `n_out` draws M particles instead of N_s.
    """
    n = n_out or belief.n_particles
    u = rng.uniform() if offset is None else float(offset)
    return Belief.uniform(belief.particles[systematic_indices(belief.weights, n, u)])


def resample_vertices(belief: Belief, log_vertex_lik: np.ndarray, rng: np.random.Generator) -> Belief:
    """Systematic resampling of every vertex on its own; `log_vertex_lik` has shape (N_s, N).

    Vertex i of output particle k is vertex i of the k-th parent drawn with
    weights w_p * exp(l_{p,i}), one offset per vertex. A vertex whose column is
    all -inf keeps the prior weights.
    """
    log_w = belief.log_weights[:, None] + log_vertex_lik
    n = belief.n_particles
    offsets = rng.uniform(size=belief.n_vertices)
    particles = np.empty_like(belief.particles)
    for i in range(belief.n_vertices):
        column = log_w[:, i]
        with np.errstate(invalid="ignore"):
            total = logsumexp(column)
        if not np.isfinite(total):
            column, total = belief.log_weights, logsumexp(belief.log_weights)
        parents = systematic_indices(np.exp(column - total), n, offsets[i])
        particles[:, i] = belief.particles[parents, i]
    return Belief.uniform(particles)


def mmse(belief: Belief) -> FireFront:
    """Weighted vertexwise mean of the particles."""
    return FireFront(np.tensordot(belief.weights, belief.particles, axes=1))


def vertex_std(belief: Belief) -> np.ndarray:
    """Per-vertex weighted spread around the MMSE front (per-coordinate RMS, m), shape (N,)."""
    w = belief.weights
    mean = np.tensordot(w, belief.particles, axes=1)
    sq = np.sum((belief.particles - mean) ** 2, axis=-1)
    return np.sqrt(np.tensordot(w, sq, axes=1) / 2.0)


def roughen(belief: Belief, std: float, rng: np.random.Generator) -> Belief:
    if std <= 0:
        return belief
    jitter = rng.normal(0.0, std, size=belief.particles.shape)
    return Belief(belief.particles + jitter, belief.log_weights, belief.diverged)


def _vertex_update(
    belief: Belief, z: MeasurementSet, agent: AgentState, sensor: SensorModel, resampling: str
) -> Tuple[Belief, Optional[np.ndarray]]:
    """Posterior plus the per-vertex likelihood shares when resampling per vertex."""
    if resampling != "per_vertex":
        return update(belief, z, agent, sensor), None
    vertex_lik = log_vertex_likelihood_batch(z, belief.particles, agent, sensor)
    return _reweight(belief, vertex_lik.sum(axis=1), len(z)), vertex_lik


def _draw(prior: Belief, posterior: Belief, vertex_lik: Optional[np.ndarray], rng: np.random.Generator) -> Belief:
    if vertex_lik is None or posterior.diverged:
        return resample(posterior, rng)
    return resample_vertices(prior, vertex_lik, rng)


def filter_step(
    belief: Belief,
    z: MeasurementSet,
    agent: AgentState,
    sensor: SensorModel,
    cfg: FilterConfig,
    rng: np.random.Generator,
) -> FilterStepResult:
    """Update, then resample and roughen when ESS drops below threshold * N_s.

    ESS is taken from the joint posterior weights. With `per_vertex` resampling
    each vertex is then drawn from its own likelihood share.
    """
    posterior, vertex_lik = _vertex_update(belief, z, agent, sensor, cfg.resampling)
    ess = effective_sample_size(posterior)
    resampled = ess < cfg.resample_threshold * posterior.n_particles
    if resampled:
        diverged = posterior.diverged
        posterior = roughen(_draw(belief, posterior, vertex_lik, rng), cfg.roughening_std, rng)
        if diverged:
            posterior = Belief(posterior.particles, posterior.log_weights, diverged=True)
    return FilterStepResult(belief=posterior, ess=ess, resampled=resampled)


def update_and_resample(
    belief: Belief,
    z: MeasurementSet,
    agent: AgentState,
    sensor: SensorModel,
    rng: np.random.Generator,
    resampling: str = "per_vertex",
) -> Belief:
    """Update with Z and always resample to equal weights; no roughening."""
    posterior, vertex_lik = _vertex_update(belief, z, agent, sensor, resampling)
    return _draw(belief, posterior, vertex_lik, rng)
