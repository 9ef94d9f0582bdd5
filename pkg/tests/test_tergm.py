"""Pseudolikelihood estimation and Metropolis-Hastings simulation."""

import itertools
import math

import numpy as np
import pytest

from conftest import net_from_edges, random_network
from netpanel.errors import (
    ConfigurationError,
    DegeneracyWarning,
    SeparationError,
)
from netpanel.network import DirectedNetwork, NetworkPanel, density
from netpanel.statistics import StatisticSpec, global_value
from netpanel.tergm import (
    TergmModel,
    default_burn_in,
    default_thinning,
    fit_mple,
    forward_simulate_panel,
    simulate,
)


def _wave_with_edge_count(rng, n, count):
    slots = [(i, j) for i in range(n) for j in range(n) if i != j]
    picks = rng.choice(len(slots), size=count, replace=False)
    adj = np.zeros((n, n), dtype=np.int8)
    for p in picks:
        adj[slots[p]] = 1
    return DirectedNetwork(adj)


class TestModelValidation:
    def test_theta_length(self):
        with pytest.raises(ConfigurationError):
            TergmModel((StatisticSpec("edges"),), [0.0, 1.0])

    def test_lag_depth_covers_statistics(self):
        with pytest.raises(ConfigurationError):
            TergmModel((StatisticSpec("memory_stability", lag=2),), [1.0],
                       lag_depth=1)

    def test_defaults(self):
        model = TergmModel((StatisticSpec("edges"),), [0.5])
        assert model.names == ("edges",)
        assert default_burn_in(20) == 4000
        assert default_thinning(20) == 400


class TestFitMple:
    def test_edges_only_recovers_pooled_logit(self):
        rng = np.random.default_rng(2)
        waves = [_wave_with_edge_count(rng, 5, 5) for _ in range(2)]
        fit = fit_mple(NetworkPanel(waves), (StatisticSpec("edges"),),
                       bootstrap_count=50, seed=1)
        # pooled density 10/40 = 0.25
        assert fit.coefficients["edges"] == pytest.approx(math.log(1 / 3),
                                                          abs=1e-6)
        assert fit.n_obs == 40

    def test_perfect_persistence_is_separated(self):
        rng = np.random.default_rng(3)
        wave = random_network(rng, 6, p=0.4)
        panel = NetworkPanel([wave, wave])
        specs = (StatisticSpec("edges"), StatisticSpec("memory_stability"))
        with pytest.raises(SeparationError) as err:
            fit_mple(panel, specs, bootstrap_count=10, seed=0)
        assert err.value.statistic == "memory_stability"

    def test_constant_response_is_separated(self):
        empty = net_from_edges(4, [])
        panel = NetworkPanel([empty, empty])
        with pytest.raises(SeparationError):
            fit_mple(panel, (StatisticSpec("edges"),), bootstrap_count=10,
                     seed=0)

    def test_needs_enough_waves(self):
        net = net_from_edges(4, [(1, 2)])
        panel = NetworkPanel([net, net.toggled(2, 3)])
        with pytest.raises(ConfigurationError):
            fit_mple(panel, (StatisticSpec("memory_stability", lag=2),),
                     bootstrap_count=5)

    def test_gradient_norm_and_interval_coverage_of_estimate(self):
        rng = np.random.default_rng(4)
        specs = (StatisticSpec("edges"), StatisticSpec("reciprocity"),
                 StatisticSpec("memory_stability"))
        for seed in range(3):
            waves = [random_network(rng, 10, p=0.35) for _ in range(4)]
            fit = fit_mple(NetworkPanel(waves), specs, bootstrap_count=60,
                           seed=seed)
            assert fit.gradient_norm < 1e-6
            reps = fit.bootstrap_replicates
            assert reps.shape[1] == len(specs)
            for q, name in enumerate(fit.model.names):
                lo, hi = fit.interval(name)
                assert lo <= hi
                point = fit.coefficients[name]
                assert reps[:, q].min() <= point <= reps[:, q].max()

    def test_bootstrap_is_seeded(self):
        rng = np.random.default_rng(5)
        waves = [random_network(rng, 8, p=0.3) for _ in range(3)]
        panel = NetworkPanel(waves)
        specs = (StatisticSpec("edges"), StatisticSpec("memory_stability"))
        a = fit_mple(panel, specs, bootstrap_count=40, seed=9)
        b = fit_mple(panel, specs, bootstrap_count=40, seed=9)
        assert np.array_equal(a.bootstrap_replicates, b.bootstrap_replicates)
        assert np.array_equal(a.confidence_intervals, b.confidence_intervals)


class TestSimulate:
    def test_zero_theta_density_is_half(self):
        model = TergmModel((StatisticSpec("edges"),), [0.0])
        start = net_from_edges(20, [])
        draws = simulate(model, initial=start, draw_count=50, seed=11)
        mean_density = float(np.mean([density(d) for d in draws]))
        assert mean_density == pytest.approx(0.5, abs=0.02)

    def test_negative_edges_theta_density(self):
        model = TergmModel((StatisticSpec("edges"),), [-2.1972])
        start = net_from_edges(20, [])
        draws = simulate(model, initial=start, draw_count=50, seed=12)
        mean_density = float(np.mean([density(d) for d in draws]))
        assert mean_density == pytest.approx(0.10, abs=0.02)

    def test_reciprocity_exceeds_independence_baseline(self):
        specs = (StatisticSpec("edges"), StatisticSpec("reciprocity"))
        model = TergmModel(specs, [-1.0, 3.0])
        start = net_from_edges(20, [])
        draws = simulate(model, initial=start, draw_count=20, seed=13)
        mutual = [global_value(StatisticSpec("reciprocity"), d) / 2.0
                  for d in draws]
        d_hat = float(np.mean([density(d) for d in draws]))

        rng = np.random.default_rng(14)
        base = []
        for _ in range(10):
            block = rng.random((1000, 20, 20)) < d_hat
            for adj in block:
                np.fill_diagonal(adj, False)
                base.append((adj & adj.T).sum() / 2.0)
        base = np.asarray(base, dtype=np.float64)
        assert float(np.mean(mutual)) > base.mean() + 3.0 * base.std()

    def test_seeded_draws_are_reproducible(self):
        model = TergmModel((StatisticSpec("edges"),), [0.3])
        start = net_from_edges(9, [(1, 2)])
        a = simulate(model, initial=start, draw_count=4, seed=15)
        b = simulate(model, initial=start, draw_count=4, seed=15)
        assert a == b

    def test_memory_model_needs_conditioning(self):
        specs = (StatisticSpec("edges"), StatisticSpec("memory_stability"))
        model = TergmModel(specs, [0.0, 1.0])
        with pytest.raises(ConfigurationError):
            simulate(model, initial=net_from_edges(5, []), draw_count=1,
                     seed=0)

    def test_sampler_setting_validation(self):
        model = TergmModel((StatisticSpec("edges"),), [0.0])
        start = net_from_edges(5, [])
        with pytest.raises(ConfigurationError):
            simulate(model, initial=start, draw_count=0)
        with pytest.raises(ConfigurationError):
            simulate(model, initial=start, draw_count=1, thinning=0)
        with pytest.raises(ConfigurationError):
            simulate(model, draw_count=1)

    def test_zero_theta_visits_all_tiny_states_uniformly(self):
        # stationary distribution over all 64 directed graphs on 3 vertices
        model = TergmModel((StatisticSpec("edges"),), [0.0])
        start = net_from_edges(3, [])
        draws = simulate(model, initial=start, draw_count=40000, burn_in=100,
                         thinning=9, seed=16)
        counts = np.zeros(64)
        slots = [(i, j) for i in range(3) for j in range(3) if i != j]
        for d in draws:
            code = sum(int(d.adjacency[ij]) << b for b, ij in enumerate(slots))
            counts[code] += 1
        freqs = counts / counts.sum()
        tv = 0.5 * np.abs(freqs - 1.0 / 64.0).sum()
        assert tv < 0.05


class TestForwardSimulation:
    def test_strong_stability_freezes_the_panel(self):
        specs = (StatisticSpec("edges"), StatisticSpec("memory_stability"))
        model = TergmModel(specs, [0.0, 10.0])
        rng = np.random.default_rng(17)
        initial = random_network(rng, 20, p=0.3)
        frozen = 0
        runs = 40
        for s in range(runs):
            wave = forward_simulate_panel(model, initial, steps=1, seed=s)[0]
            frozen += int(np.array_equal(wave.adjacency, initial.adjacency))
        assert frozen >= 0.95 * runs

    def test_zero_theta_waves_are_independent(self):
        specs = (StatisticSpec("edges"), StatisticSpec("memory_stability"))
        model = TergmModel(specs, [0.0, 0.0])
        rng = np.random.default_rng(18)
        initial = random_network(rng, 20, p=0.3)
        overlaps = []
        for s in range(20):
            waves = forward_simulate_panel(model, initial, steps=3, seed=100 + s)
            for a, b in itertools.pairwise(waves):
                union = (a.adjacency | b.adjacency).sum()
                inter = (a.adjacency & b.adjacency).sum()
                overlaps.append(inter / union)
        assert float(np.mean(overlaps)) == pytest.approx(1 / 3, abs=0.05)

    def test_step_count_and_lineage(self):
        model = TergmModel((StatisticSpec("edges"),), [0.0])
        initial = net_from_edges(6, [])
        waves = forward_simulate_panel(model, initial, steps=5, seed=19)
        assert len(waves) == 5
        assert all(w.n == 6 for w in waves)
        with pytest.raises(ConfigurationError):
            forward_simulate_panel(model, initial, steps=0, seed=19)

    def test_known_degenerate_parameters_warn(self):
        # the cascading regime: strong closure plus reciprocity at n=20
        # drives the chain to the complete graph, which the sampler reports
        specs = (StatisticSpec("edges"), StatisticSpec("reciprocity"),
                 StatisticSpec("transitive_triplets"),
                 StatisticSpec("memory_stability"))
        model = TergmModel(specs, [-2.0, 1.0, 0.5, 1.0])
        rng = np.random.default_rng(20)
        initial = random_network(rng, 20, p=0.1)
        with pytest.warns(DegeneracyWarning):
            waves = forward_simulate_panel(model, initial, steps=5, seed=21)
        assert max(density(w) for w in waves) > 0.97
