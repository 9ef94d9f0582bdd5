"""Synthetic-process experiments and the classroom replication study."""

import json

import numpy as np
import pytest

from netpanel.errors import ConfigurationError, ScreeningExhaustedError
from netpanel.experiments import (
    ExperimentConfig,
    ReplicationStudyConfig,
    classroom_saom_specs,
    classroom_tergm_specs,
    generate_saom_process,
    generate_tergm_process,
    objective_specs,
    process_tergm_specs,
    replicate_knecht,
    run_experiment,
    sample_parameters,
)
from netpanel.io import jsonable
from netpanel.network import Covariates, DirectedNetwork, NetworkPanel, density
from netpanel.saom import RobbinsMonroConfig

FAST_RM = RobbinsMonroConfig(
    subphase_count=2,
    subphase_base_length=10,
    derivative_draws=4,
    final_draws=40,
    final_derivative_draws=6,
    restart_count=0,
)


def small_config(process, **overrides):
    base = dict(
        process=process,
        replication_count=2,
        vertex_count=10,
        wave_count=4,
        predictive_draws=4,
        bootstrap_count=20,
        saom_rate=5.0,
        master_seed=7,
        rm=FAST_RM,
        threads=1,
    )
    base.update(overrides)
    return ExperimentConfig(**base)


def on_grid(theta, lo=-3.0, hi=3.0, step=0.001):
    for v in theta:
        assert lo - 1e-9 <= v <= hi + 1e-9
        assert abs(v / step - round(v / step)) < 1e-6


class TestExperimentConfig:
    def test_default_shape(self):
        config = ExperimentConfig(process="tergm_process")
        assert config.replication_count == 30
        assert config.vertex_count == 20
        assert config.wave_count == 6
        assert config.predictive_draws == 10
        assert config.density_bounds == (0.03, 0.97)
        assert config.parameter_range == (-3.0, 3.0)
        assert config.saom_rate == 40.0

    def test_validation(self):
        with pytest.raises(ConfigurationError, match="unknown process"):
            ExperimentConfig(process="markov_process")
        with pytest.raises(ConfigurationError):
            ExperimentConfig(process="tergm_process", replication_count=0)
        with pytest.raises(ConfigurationError):
            ExperimentConfig(process="tergm_process", density_bounds=(0.5, 0.2))
        with pytest.raises(ConfigurationError):
            ExperimentConfig(process="tergm_process", wave_count=3)
        with pytest.raises(ConfigurationError):
            ExperimentConfig(process="tergm_process", threads=0)
        with pytest.raises(ConfigurationError):
            ExperimentConfig(process="saom_process", saom_rate=0.0)

    def test_to_dict_is_json_ready(self):
        config = small_config("saom_process")
        doc = config.to_dict()
        assert doc["density_bounds"] == [0.03, 0.97]
        assert doc["parameter_range"] == [-3.0, 3.0]
        json.dumps(doc)


class TestSpecsCatalog:
    def test_process_specs(self):
        assert [s.kind for s in objective_specs()] == [
            "edges", "reciprocity", "transitive_triplets",
        ]
        assert [s.kind for s in process_tergm_specs()] == [
            "edges", "reciprocity", "transitive_triplets", "memory_stability",
        ]

    def test_classroom_specs(self):
        tergm = classroom_tergm_specs()
        assert len(tergm) == 13
        assert [s.name for s in tergm] == [
            "edges",
            "reciprocity",
            "transitive_triplets",
            "three_cycles",
            "transitive_ties",
            "indegree_popularity_sqrt",
            "outdegree_popularity_sqrt",
            "outdegree_activity_1_5",
            "covariate_match:primary_school",
            "covariate_receiver:male",
            "covariate_sender:male",
            "covariate_match:male",
            "memory_stability",
        ]
        saom = classroom_saom_specs()
        assert len(saom) == 12
        assert all(s.kind != "memory_stability" for s in saom)
        renamed = classroom_tergm_specs(sex_covariate="sex",
                                        primary_covariate="primary")
        assert renamed[8].covariate == "primary"
        assert renamed[9].covariate == "sex"


class TestSampleParameters:
    def test_draws_live_on_the_grid(self):
        config = small_config("saom_process")
        rng = np.random.default_rng(1)
        for _ in range(5):
            theta = sample_parameters(config, rng)
            assert theta.shape == (4,)
            on_grid(theta)

    def test_seeded_reproducibility(self):
        config = small_config("saom_process")
        a = sample_parameters(config, np.random.default_rng(5))
        b = sample_parameters(config, np.random.default_rng(5))
        assert np.array_equal(a, b)

    def test_screening_exhaustion(self):
        # rate 0.1 yields ~1 opportunity from an empty start: the first
        # retained wave cannot reach the narrow density window
        config = small_config(
            "saom_process", saom_rate=0.1,
            density_bounds=(0.49, 0.51), max_screen_rejections=3,
        )
        with pytest.raises(ScreeningExhaustedError, match="density screen"):
            sample_parameters(config, np.random.default_rng(0))


class TestProcessGenerators:
    def test_tergm_process_shape_and_reproducibility(self):
        config = small_config("tergm_process")
        theta = np.array([-1.5, 0.5, 0.0, 1.0])
        panel = generate_tergm_process(theta, config, seed=42)
        assert panel.wave_count == config.wave_count - 1
        assert panel.n == config.vertex_count
        again = generate_tergm_process(theta, config, seed=42)
        for a, b in zip(panel.waves, again.waves):
            assert a == b
        other = generate_tergm_process(theta, config, seed=43)
        assert any(a != b for a, b in zip(panel.waves, other.waves))

    def test_saom_process_shape_and_reproducibility(self):
        config = small_config("saom_process")
        theta = np.array([-1.0, 0.5, 0.0, 0.0])
        panel = generate_saom_process(theta, config, seed=9)
        assert panel.wave_count == config.wave_count - 1
        assert panel.n == config.vertex_count
        again = generate_saom_process(theta, config, seed=9)
        for a, b in zip(panel.waves, again.waves):
            assert a == b

    def test_saom_process_zero_theta_drifts_to_half_density(self):
        # with a flat objective every mini-step coin-flips its dyad
        config = small_config("saom_process", saom_rate=100.0)
        panel = generate_saom_process(np.zeros(4), config, seed=2)
        assert density(panel.waves[-1]) == pytest.approx(0.5, abs=0.15)

    def test_rejects_bad_theta(self):
        config = small_config("tergm_process")
        with pytest.raises(ConfigurationError, match="4 entries"):
            generate_tergm_process([0.0, 1.0], config, seed=0)
        with pytest.raises(ConfigurationError, match="finite"):
            generate_saom_process([0.0, np.nan, 0.0, 0.0], config, seed=0)


RECORD_KEYS = {
    "index", "theta", "screen_rejections", "error", "tergm", "saom",
    "gof", "warnings",
}


class TestRunExperiment:
    def test_tergm_process_report_structure_and_determinism(self):
        config = small_config("tergm_process")
        report = run_experiment(config)
        assert len(report.replications) == 2
        for i, record in enumerate(report.replications):
            assert set(record) == RECORD_KEYS
            assert record["index"] == i
            if record["error"] is None:
                on_grid(record["theta"])
                assert set(record["gof"]) == {
                    "indegree", "outdegree", "edgewise_sp", "dyadwise_sp",
                    "geodesic",
                }
                assert 0.0 <= record["tergm"]["auc_roc"] <= 1.0
                assert 0.0 <= record["saom"]["auc_roc"] <= 1.0
            else:
                assert {"stage", "type", "message"} <= set(record["error"])
        agg = report.aggregates
        assert agg["replication_count"] == 2
        assert agg["ok_count"] + agg["failure_count"] == 2
        if agg["ok_count"] >= 2:
            for metric in ("auc_roc", "auc_pr"):
                entry = agg[metric]
                assert set(entry) >= {"tergm_mean", "saom_mean",
                                      "mean_difference", "welch"}
            assert set(agg["diff_endogenous"]) == {
                "indegree", "outdegree", "edgewise_sp", "dyadwise_sp",
                "geodesic",
            }
        json.dumps(jsonable(report.to_dict()))

        again = run_experiment(config)
        assert jsonable(again.to_dict()) == jsonable(report.to_dict())

    def test_saom_process_runs(self):
        config = small_config("saom_process", master_seed=3)
        report = run_experiment(config)
        assert len(report.replications) == 2
        assert report.aggregates["ok_count"] >= 1
        json.dumps(jsonable(report.to_dict()))


def classroom_panel(n=26, seed=0, with_covariates=True):
    """Four persistent waves plus sex/earlier-school attributes."""
    rng = np.random.default_rng(seed)
    adj = (rng.random((n, n)) < 0.15).astype(np.int8)
    np.fill_diagonal(adj, 0)
    waves = [DirectedNetwork(adj)]
    for _ in range(3):
        adj = adj.copy()
        flips = rng.random((n, n)) < 0.04
        np.fill_diagonal(flips, False)
        adj[flips] = 1 - adj[flips]
        waves.append(DirectedNetwork(adj))
    covariates = None
    if with_covariates:
        covariates = Covariates(vertex={
            "male": rng.integers(0, 2, size=n).astype(float),
            "primary_school": rng.integers(0, 2, size=n).astype(float),
        })
    return NetworkPanel(waves, covariates)


FAST_STUDY = dict(predictive_draws=5, bootstrap_count=20, rm=FAST_RM,
                  master_seed=3)


class TestReplicateKnecht:
    def test_report_structure(self):
        panel = classroom_panel()
        report = replicate_knecht(
            panel, ReplicationStudyConfig(**FAST_STUDY)
        )
        doc = report.to_dict()
        assert len(doc["tergm"]["coefficients"]) == 13
        assert "memory_stability" in doc["tergm"]["coefficients"]
        assert "covariate_match:primary_school" in doc["tergm"]["coefficients"]
        assert len(doc["saom"]["coefficients"]) == 12
        assert "memory_stability" not in doc["saom"]["coefficients"]
        assert len(doc["saom"]["rates"]) == 2
        assert set(doc["curves"]) == {
            "tergm_roc", "tergm_pr", "saom_roc", "saom_pr",
        }
        assert set(doc["diff_endogenous_by_kind"]) == {
            "indegree", "outdegree", "edgewise_sp", "dyadwise_sp", "geodesic",
        }
        for value in doc["diff_endogenous_by_kind"].values():
            assert np.isfinite(value)
        assert 0.0 <= doc["tergm"]["auc_roc"] <= 1.0
        assert 0.0 <= doc["saom"]["auc_roc"] <= 1.0
        assert len(report.tergm_ensemble.draws) == 5
        json.dumps(jsonable(doc))

    def test_requires_four_waves(self):
        panel = classroom_panel()
        short = NetworkPanel(panel.waves[:3], panel.covariates)
        with pytest.raises(ConfigurationError, match="4 waves"):
            replicate_knecht(short, ReplicationStudyConfig(**FAST_STUDY))

    def test_requires_covariates(self):
        panel = classroom_panel(with_covariates=False)
        with pytest.raises(ConfigurationError, match="male"):
            replicate_knecht(panel, ReplicationStudyConfig(**FAST_STUDY))

    def test_covariate_names_configurable(self):
        panel = classroom_panel()
        with pytest.raises(ConfigurationError, match="sex"):
            replicate_knecht(
                panel,
                ReplicationStudyConfig(
                    **dict(FAST_STUDY, sex_covariate="sex")
                ),
            )
