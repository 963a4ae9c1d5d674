"""
Particle belief over fire fronts.
"""
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from app.models.errors import ModelDomainError, ScenarioValidationError

RESAMPLING_SCHEMES = ("per_vertex", "global")


@dataclass(frozen=True, eq=False)
class Belief:
    """Weighted particle set: particles (N_s, N, 2) and log-weights (N_s,).

    `diverged` is set by an update whose likelihoods were all zero.
    """
    particles: np.ndarray
    log_weights: np.ndarray
    diverged: bool = False

    def __post_init__(self):
        particles = np.array(self.particles, dtype=float)
        log_weights = np.array(self.log_weights, dtype=float).reshape(-1)
        if particles.ndim != 3 or particles.shape[2] != 2:
            raise ModelDomainError(f"Belief particles must have shape (N_s, N, 2), got {particles.shape}")
        if particles.shape[0] < 1:
            raise ModelDomainError("Belief needs at least one particle")
        if log_weights.shape[0] != particles.shape[0]:
            raise ModelDomainError(
                f"{particles.shape[0]} particles but {log_weights.shape[0]} log-weights"
            )
        particles.setflags(write=False)
        log_weights.setflags(write=False)
        object.__setattr__(self, "particles", particles)
        object.__setattr__(self, "log_weights", log_weights)

    @property
    def n_particles(self) -> int:
        return self.particles.shape[0]

    @property
    def n_vertices(self) -> int:
        return self.particles.shape[1]

    @property
    def weights(self) -> np.ndarray:
        """Normalized linear weights (log-sum-exp normalisation)."""
        return np.exp(self.log_weights - logsumexp(self.log_weights))

    @classmethod
    def uniform(cls, particles: np.ndarray) -> "Belief":
        particles = np.asarray(particles, dtype=float)
        n = particles.shape[0]
        return cls(particles, np.full(n, -np.log(n)))


@dataclass(frozen=True)
class FilterConfig:
    n_particles: int = 2000
    resample_threshold: float = 0.5
    init_std: float = 20.0
    roughening_std: float = 1.0
    resampling: str = "per_vertex"

    def __post_init__(self):
        problems = []
        if self.n_particles < 1:
            problems.append(("sim.n_particles", "must be >= 1"))
        if not 0 < self.resample_threshold <= 1:
            problems.append(("sim.resample_threshold", "must lie in (0, 1]"))
        if self.init_std < 0:
            problems.append(("fire.init_std", "must be >= 0"))
        if self.roughening_std < 0:
            problems.append(("sim.roughening_std", "must be >= 0"))
        if self.resampling not in RESAMPLING_SCHEMES:
            problems.append(("sim.resampling", f"must be one of {RESAMPLING_SCHEMES}"))
        if problems:
            raise ScenarioValidationError(problems)
