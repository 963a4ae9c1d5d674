import math

import numpy as np
import pytest

from app.models.environment import CellDistribution
from app.models.errors import ScenarioValidationError
from app.models.filter import Belief, FilterConfig
from app.models.sensing import AgentState, MeasurementSet, SensorModel
from app.services.environment_service import sample_env_batch
from app.services.episode_service import rmse
from app.services.filter_service import (
    effective_sample_size,
    filter_step,
    init_belief,
    initial_front,
    mmse,
    normalized_weights,
    predict,
    resample,
    resample_vertices,
    roughen,
    update,
    update_and_resample,
    vertex_std,
)
from app.services.fire_model_service import propagate_batch
from app.services.sensing_service import generate_measurements
from app.utils.rng_utils import derive_rng

SENSOR = SensorModel(range=100.0, noise_std=3.5, intensity=5.0)
ORIGIN = AgentState((0.0, 0.0))


def _belief(points, weights=None):
    """Belief over single-vertex fronts at the given points."""
    particles = np.asarray(points, dtype=float).reshape(-1, 1, 2)
    if weights is None:
        return Belief.uniform(particles)
    return Belief(particles, np.log(np.asarray(weights, dtype=float)))


class TestInitBelief:
    def test_zero_spread_copies_the_ignition_front(self, scenario_factory, rng):
        scenario = scenario_factory(init_std=0.0, n_particles=30)
        belief = init_belief(scenario, rng)
        truth = initial_front(scenario).vertices
        assert belief.particles.shape == (30, 20, 2)
        for particle in belief.particles:
            np.testing.assert_array_equal(particle, truth)
        np.testing.assert_allclose(belief.weights, 1.0 / 30)

    def test_single_particle(self, scenario_factory, rng):
        belief = init_belief(scenario_factory(n_particles=1), rng)
        assert belief.weights.tolist() == [1.0]

    def test_perturbation_std(self, scenario_factory, rng):
        scenario = scenario_factory(init_std=20.0, n_particles=2000)
        belief = init_belief(scenario, rng)
        np.testing.assert_allclose(vertex_std(belief), 20.0, rtol=0.05)


class TestPredict:
    def test_replays_the_environment_draws(self, small_scenario):
        belief = init_belief(small_scenario, np.random.default_rng(1))
        predicted = predict(belief, small_scenario.field, small_scenario.dt, np.random.default_rng(99))

        env = sample_env_batch(belief.particles, small_scenario.field, np.random.default_rng(99))
        expected = propagate_batch(belief.particles, env, small_scenario.dt)
        np.testing.assert_array_equal(predicted.particles, expected)
        np.testing.assert_array_equal(predicted.log_weights, belief.log_weights)

    def test_stationary_fire_stays_put(self, scenario_factory, rng):
        still = CellDistribution(0.0, 10.0, 3.0, 1.0, 0.0, 0.0)
        scenario = scenario_factory(cell=still, n_particles=20)
        belief = init_belief(scenario, rng)
        predicted = predict(belief, scenario.field, scenario.dt, rng)
        np.testing.assert_array_equal(predicted.particles, belief.particles)


class TestUpdate:
    def test_no_detections_nothing_visible(self):
        belief = _belief([(500.0, 500.0), (600.0, 600.0)], [0.3, 0.7])
        posterior = update(belief, MeasurementSet.empty(), ORIGIN, SENSOR)
        np.testing.assert_allclose(posterior.weights, [0.3, 0.7], atol=1e-15)

    def test_closer_particle_gains_weight(self):
        belief = _belief([(1.0, 0.0), (15.0, 0.0)])
        posterior = update(belief, MeasurementSet([(0.0, 0.0)]), ORIGIN, SENSOR)
        assert posterior.weights[0] > posterior.weights[1]

    def test_matches_bayes_rule(self):
        prior = np.array([0.5, 0.3, 0.2])
        points = np.array([(0.0, 0.0), (3.0, 0.0), (10.0, 0.0)])
        z = np.array([1.0, 0.0])
        posterior = update(_belief(points, prior), MeasurementSet([z]), ORIGIN, SENSOR)

        variance = SENSOR.noise_std ** 2
        likelihood = np.exp(-np.sum((points - z) ** 2, axis=1) / (2 * variance))
        expected = prior * likelihood / np.sum(prior * likelihood)
        np.testing.assert_allclose(posterior.weights, expected, rtol=1e-12)
        assert not posterior.diverged

    def test_all_zero_likelihood_flags_divergence(self):
        belief = _belief([(1000.0, 1000.0), (1100.0, 900.0)], [0.9, 0.1])
        posterior = update(belief, MeasurementSet([(0.0, 0.0)]), ORIGIN, SENSOR)
        assert posterior.diverged
        np.testing.assert_allclose(posterior.weights, [0.5, 0.5])
        np.testing.assert_array_equal(posterior.particles, belief.particles)


class TestWeights:
    def test_effective_sample_size(self):
        assert effective_sample_size(_belief(np.zeros((8, 2)))) == pytest.approx(8.0)
        assert effective_sample_size(_belief(np.zeros((3, 2)), [1.0, 0.0, 0.0])) == pytest.approx(1.0)
        assert effective_sample_size(_belief(np.zeros((4, 2)), [0.5, 0.5, 0.0, 0.0])) == pytest.approx(2.0)

    def test_normalized_weights_sum_to_one(self):
        belief = Belief(np.zeros((3, 1, 2)), [-1000.0, -1001.0, -1002.0])
        weights = normalized_weights(belief)
        assert weights.sum() == pytest.approx(1.0)
        assert weights[0] > weights[1] > weights[2]


class TestResample:
    def test_all_mass_on_one_particle(self, rng):
        belief = _belief([(1.0, 1.0), (2.0, 2.0), (3.0, 3.0)], [1.0, 0.0, 0.0])
        out = resample(belief, rng)
        np.testing.assert_array_equal(out.particles[:, 0], [[1.0, 1.0]] * 3)
        np.testing.assert_allclose(out.weights, 1.0 / 3)

    @pytest.mark.parametrize("weights", [[0.7, 0.3], [0.7000000000000001, 0.30000000000000004]])
    def test_copy_counts_for_every_offset(self, weights):
        belief = _belief([(0.0, 0.0), (1.0, 1.0)], weights)
        offsets = [0.0, 1.0 - 1e-12] + [(k + 0.5) / 100 for k in range(100)] + [k / 100 for k in range(100)]
        for offset in offsets:
            out = resample(belief, np.random.default_rng(0), offset=offset, n_out=10)
            first = int(np.sum(out.particles[:, 0, 0] == 0.0))
            assert (first, 10 - first) == (7, 3), offset

    def test_copy_counts_at_offset_edges(self, rng):
        weights = rng.dirichlet(np.ones(25))
        weights[:5] = 0.04
        weights[5:] *= 0.8 / weights[5:].sum()
        belief = _belief(np.arange(50, dtype=float).reshape(25, 2), weights)
        for offset in (0.0, 1.0 - 1e-12):
            out = resample(belief, rng, offset=offset)
            counts = np.array([np.sum(out.particles[:, 0, 0] == 2.0 * i) for i in range(25)])
            assert out.n_particles == 25
            assert np.all(counts[:5] == 1)
            assert np.all(counts >= np.floor(25 * weights - 1e-9))
            assert np.all(counts <= np.ceil(25 * weights + 1e-9))

    def test_copy_counts_are_floor_or_ceil(self, rng):
        weights = rng.dirichlet(np.ones(25))
        belief = _belief(np.arange(50, dtype=float).reshape(25, 2), weights)
        out = resample(belief, rng)
        counts = np.array([np.sum(out.particles[:, 0, 0] == 2.0 * i) for i in range(25)])
        assert counts.sum() == 25
        assert np.all(counts >= np.floor(25 * weights))
        assert np.all(counts <= np.ceil(25 * weights))

    def test_unbiased(self):
        rng = np.random.default_rng(31)
        points = rng.normal(0.0, 10.0, size=(50, 2))
        weights = rng.dirichlet(np.ones(50))
        belief = _belief(points, weights)
        before = weights @ points
        after = np.array([resample(belief, rng).particles[:, 0].mean(axis=0) for _ in range(1000)])
        bound = 4.0 * after.std(axis=0) / math.sqrt(len(after)) + 1e-9
        assert np.all(np.abs(after.mean(axis=0) - before) < bound)


class TestEstimates:
    def test_mmse(self):
        belief = Belief(np.array([[[0.0, 0.0]] * 3, [[4.0, 8.0]] * 3]), np.log([0.25, 0.75]))
        np.testing.assert_allclose(mmse(belief).vertices, [[3.0, 6.0]] * 3)

    def test_mmse_of_identical_particles(self, rng):
        front = rng.uniform(0.0, 100.0, size=(5, 2))
        belief = Belief.uniform(np.broadcast_to(front, (4, 5, 2)))
        np.testing.assert_allclose(mmse(belief).vertices, front)

    def test_mmse_weighted_average_oracle(self, rng):
        particles = rng.uniform(0.0, 100.0, size=(5, 4, 2))
        weights = np.array([0.1, 0.2, 0.3, 0.15, 0.25])
        expected = sum(w * p for w, p in zip(weights, particles))
        np.testing.assert_allclose(mmse(Belief(particles, np.log(weights))).vertices, expected, atol=1e-12)

    def test_vertex_std(self):
        belief = _belief([(-3.0, 0.0), (3.0, 0.0)])
        np.testing.assert_allclose(vertex_std(belief), [3.0 / math.sqrt(2.0)])


class TestFilterStep:
    def test_forced_resample_without_roughening_copies_particles(self, rng):
        belief = _belief([(0.0, 0.0), (5.0, 0.0), (50.0, 0.0)])
        cfg = FilterConfig(n_particles=3, resample_threshold=1.0, roughening_std=0.0)
        result = filter_step(belief, MeasurementSet([(1.0, 0.0)]), ORIGIN, SENSOR, cfg, rng)
        assert result.resampled
        assert result.ess < 3.0
        for particle in result.belief.particles:
            assert any(np.array_equal(particle, original) for original in belief.particles)

    def test_high_ess_keeps_particles(self, rng):
        belief = _belief([(0.0, 0.0), (0.5, 0.0)])
        cfg = FilterConfig(n_particles=2, resample_threshold=0.5, roughening_std=1.0)
        result = filter_step(belief, MeasurementSet([(0.2, 0.0)]), ORIGIN, SENSOR, cfg, rng)
        assert not result.resampled
        np.testing.assert_array_equal(result.belief.particles, belief.particles)

    def test_divergence_survives_resampling(self, rng):
        belief = _belief([(1000.0, 1000.0), (1100.0, 900.0)], [0.99, 0.01])
        cfg = FilterConfig(n_particles=2, resample_threshold=1.0, roughening_std=1.0)
        result = filter_step(belief, MeasurementSet([(0.0, 0.0)]), ORIGIN, SENSOR, cfg, rng)
        assert result.diverged

    @pytest.mark.parametrize("scheme, combined", [("per_vertex", True), ("global", False)])
    def test_vertices_resample_from_their_own_detections(self, rng, scheme, combined):
        truth = np.array([(0.0, 0.0), (40.0, 0.0)])
        belief = Belief.uniform(np.array([
            [(0.0, 0.0), (40.0, 25.0)],
            [(0.0, 25.0), (40.0, 0.0)],
            [(0.0, 60.0), (40.0, 60.0)],
        ]))
        cfg = FilterConfig(n_particles=3, resample_threshold=1.0, roughening_std=0.0, resampling=scheme)
        result = filter_step(belief, MeasurementSet(truth), ORIGIN, SENSOR, cfg, rng)
        assert result.resampled
        matches = [np.array_equal(particle, truth) for particle in result.belief.particles]
        assert all(matches) if combined else not any(matches)

    def test_unknown_resampling_scheme(self):
        with pytest.raises(ScenarioValidationError) as excinfo:
            FilterConfig(resampling="stratified")
        assert excinfo.value.field_paths == ["sim.resampling"]

    def test_roughen(self, rng):
        belief = _belief(np.zeros((4000, 2)))
        jittered = roughen(belief, 2.0, rng)
        assert jittered.particles.std() == pytest.approx(2.0, rel=0.05)
        assert roughen(belief, 0.0, rng) is belief


class TestResampleVertices:
    def test_each_vertex_follows_its_own_weights(self, rng):
        particles = np.arange(16, dtype=float).reshape(4, 2, 2)
        vertex_lik = np.full((4, 2), -np.inf)
        vertex_lik[1, 0] = 0.0
        vertex_lik[3, 1] = 0.0
        out = resample_vertices(Belief.uniform(particles), vertex_lik, rng)
        np.testing.assert_array_equal(out.particles[:, 0], [particles[1, 0]] * 4)
        np.testing.assert_array_equal(out.particles[:, 1], [particles[3, 1]] * 4)
        np.testing.assert_allclose(out.weights, 0.25)

    def test_uncovered_vertex_keeps_the_prior(self, rng):
        particles = np.arange(16, dtype=float).reshape(4, 2, 2)
        vertex_lik = np.zeros((4, 2))
        vertex_lik[:, 1] = -np.inf
        out = resample_vertices(Belief.uniform(particles), vertex_lik, rng)
        np.testing.assert_array_equal(out.particles[:, 1], particles[:, 1])

    def test_update_and_resample_matches_global_draw_for_one_vertex(self):
        belief = _belief([(0.0, 0.0), (5.0, 0.0), (50.0, 0.0)])
        z = MeasurementSet([(1.0, 0.0)])
        global_draw = update_and_resample(belief, z, ORIGIN, SENSOR, np.random.default_rng(3), "global")
        vertex_draw = update_and_resample(belief, z, ORIGIN, SENSOR, np.random.default_rng(3))
        np.testing.assert_array_equal(vertex_draw.particles, global_draw.particles)


def test_stationary_front_estimate_converges(scenario_factory):
    still = CellDistribution(0.0, 500.0, 3.0, 1.0, 0.0, 0.0)
    scenario = scenario_factory(
        cell=still, n_particles=500, init_std=5.0, roughening_std=1.0,
        sensor=SensorModel(range=math.inf, noise_std=3.5, intensity=5.0),
    )
    truth = initial_front(scenario)
    agent = scenario.agent

    first, last = [], []
    for seed in range(20):
        rng = derive_rng(seed, 0)
        belief = init_belief(scenario, rng)
        errors = []
        for _ in range(10):
            belief = predict(belief, scenario.field, scenario.dt, rng)
            z = generate_measurements(truth, agent, scenario.sensor, rng)
            belief = filter_step(belief, z, agent, scenario.sensor, scenario.filter, rng).belief
            errors.append(rmse(mmse(belief), truth))
        first.append(errors[0])
        last.append(errors[-1])

    first, last = np.array(first), np.array(last)
    assert last.mean() < scenario.sensor.noise_std
    # one-sided sign test at 95%: P(X >= 15 | n=20, p=0.5) < 0.05
    assert np.sum(last < first) >= 15
