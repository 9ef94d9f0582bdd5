"""End-to-end model-comparison experiments on synthetic and supplied panels.

Two synthetic data-generating processes are supported: a conditional-ERGM
process (a seed draw from an edges/reciprocity/transitive-triplets model,
then forward waves with an added dyadic stability term) and an actor-driven
process (mini-step periods from an empty start).  For each replication both
model families are fitted to all but the last wave, the last wave is
predicted out of sample, and classification plus auxiliary-statistic fit is
aggregated across replications.  A separate entry point runs the same
paired-fit protocol on a user-supplied four-wave classroom friendship panel.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np
from joblib import Parallel, delayed

from .errors import (
    ConfigurationError,
    NetpanelError,
    ScreeningExhaustedError,
    UndefinedTestError,
)
from .evaluation import (
    AUXILIARY_KINDS,
    PredictionEnsemble,
    auxiliary_gof,
    diff_auc,
    diff_endogenous,
    one_sided_p,
    pr_curve,
    roc_curve,
    two_sample_t,
)
from .network import DirectedNetwork, NetworkPanel, density
from .rng import child_rng, child_seed
from .saom import RobbinsMonroConfig, SaomModel, fit_mom, forward_predict, simulate_period
from .statistics import StatisticSpec
from .tergm import TergmModel, fit_mple, forward_simulate_panel, simulate

PROCESS_KINDS = ("tergm_process", "saom_process")


def objective_specs():
    """The three-statistic objective shared by both synthetic processes."""
    return (
        StatisticSpec("edges"),
        StatisticSpec("reciprocity"),
        StatisticSpec("transitive_triplets"),
    )


def process_tergm_specs():
    """The synthetic-process statistics plus the dyadic stability term."""
    return objective_specs() + (StatisticSpec("memory_stability"),)


@dataclass(frozen=True)
class ExperimentConfig:
    """Settings for one synthetic-process comparison experiment.

    ``wave_count`` counts generated networks including the dropped first
    one, so the retained panel has ``wave_count - 1`` waves; the last
    retained wave is the prediction target.  Desk-scale defaults keep a
    full run in the minutes range; raise ``replication_count`` for
    publication-scale runs.
    """

    process: str
    replication_count: int = 30
    vertex_count: int = 20
    wave_count: int = 6
    predictive_draws: int = 10
    density_bounds: tuple = (0.03, 0.97)
    parameter_range: tuple = (-3.0, 3.0)
    parameter_step: float = 0.001
    saom_rate: float = 40.0
    master_seed: int = 0
    max_screen_rejections: int = 1000
    bootstrap_count: int = 50
    rm: RobbinsMonroConfig = field(default_factory=RobbinsMonroConfig)
    threads: int = 1
    backend: str | None = None

    def __post_init__(self):
        if self.process not in PROCESS_KINDS:
            raise ConfigurationError(
                f"unknown process {self.process!r}; valid: "
                + ", ".join(PROCESS_KINDS)
            )
        if self.replication_count < 1:
            raise ConfigurationError("replication_count must be >= 1")
        lo, hi = self.density_bounds
        if not 0.0 < lo < hi < 1.0:
            raise ConfigurationError(
                f"density_bounds must satisfy 0 < lower < upper < 1, got "
                f"({lo}, {hi})"
            )
        plo, phi = self.parameter_range
        if not plo < phi:
            raise ConfigurationError("parameter_range must be increasing")
        if self.parameter_step <= 0.0:
            raise ConfigurationError("parameter_step must be positive")
        if self.vertex_count < 2:
            raise ConfigurationError("vertex_count must be >= 2")
        if self.wave_count < 4:
            raise ConfigurationError(
                "wave_count must be >= 4 (fit needs two retained waves plus "
                "a prediction target)"
            )
        if self.predictive_draws < 1:
            raise ConfigurationError("predictive_draws must be >= 1")
        if self.saom_rate <= 0.0:
            raise ConfigurationError("saom_rate must be positive")
        if self.max_screen_rejections < 1:
            raise ConfigurationError("max_screen_rejections must be >= 1")
        if self.bootstrap_count < 1:
            raise ConfigurationError("bootstrap_count must be >= 1")
        if self.threads == 0:
            raise ConfigurationError("threads must be nonzero (-1 = all cores)")

    def to_dict(self) -> dict:
        out = asdict(self)
        out["density_bounds"] = list(self.density_bounds)
        out["parameter_range"] = list(self.parameter_range)
        return out


def _theta_vector(theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=np.float64)
    if theta.shape != (4,):
        raise ConfigurationError(
            f"the process parameter vector has 4 entries, got shape {theta.shape}"
        )
    if not np.isfinite(theta).all():
        raise ConfigurationError("process parameters must be finite")
    return theta


def sample_parameters(config: ExperimentConfig, rng: np.random.Generator):
    """Draw an admissible 4-vector from the uniform parameter grid.

    Candidates are resampled until the panel they generate passes the
    density screen at its first retained wave; the accepted panel is
    discarded here (``run_experiment`` keeps it to avoid double work).
    """
    theta, _, _, _ = _sample_admissible(config, rng)
    return theta


def _draw_theta(config: ExperimentConfig, rng: np.random.Generator) -> np.ndarray:
    lo, hi = config.parameter_range
    step = config.parameter_step
    levels = int(round((hi - lo) / step))
    ks = rng.integers(0, levels + 1, size=4)
    return np.array([lo + step * int(k) for k in ks])


def generate_tergm_process(theta, config: ExperimentConfig,
                           seed: int) -> NetworkPanel:
    """Panel from the conditional-ERGM process.

    One long-burn-in draw from the three-statistic model seeds the chain;
    ``wave_count - 1`` forward waves add a dyadic stability term with
    coefficient ``theta[3]``.  The seed network is dropped, so the panel
    holds only forward waves.
    """
    theta = _theta_vector(theta)
    n = config.vertex_count
    empty = DirectedNetwork(np.zeros((n, n), dtype=np.int8))
    seed_model = TergmModel(objective_specs(), theta[:3])
    first = simulate(
        seed_model,
        initial=empty,
        draw_count=1,
        burn_in=20 * n * n,
        rng=child_rng(seed, 0),
    )[0]
    full_model = TergmModel(process_tergm_specs(), theta)
    forward = forward_simulate_panel(
        full_model, first, steps=config.wave_count - 1,
        seed=child_seed(seed, 1), backend=config.backend,
    )
    return NetworkPanel(forward)


def generate_saom_process(theta, config: ExperimentConfig,
                          seed: int) -> NetworkPanel:
    """Panel from the actor-driven process, started empty.

    Each of the ``wave_count - 1`` periods runs mini-steps at the
    configured rate; the retained waves are the period-end networks (the
    empty starting network is dropped).
    """
    theta = _theta_vector(theta)
    n = config.vertex_count
    periods = config.wave_count - 1
    model = SaomModel(objective_specs(), theta[:3], (config.saom_rate,) * periods)
    current = DirectedNetwork(np.zeros((n, n), dtype=np.int8))
    waves = []
    for m in range(periods):
        trace = simulate_period(
            model, current, period=m, rng=child_rng(seed, m),
            backend=config.backend,
        )
        current = trace.final_network
        waves.append(current)
    return NetworkPanel(waves)


def _generate_panel(config, theta, seed):
    if config.process == "tergm_process":
        return generate_tergm_process(theta, config, seed)
    return generate_saom_process(theta, config, seed)


def _sample_admissible(config: ExperimentConfig, rng: np.random.Generator):
    """Parameter draw plus its generated panel, screened for density.

    Rejects candidates whose first retained wave is denser or sparser than
    ``density_bounds`` allows, reusing the accepted panel so the caller
    never re-simulates.
    """
    lo, hi = config.density_bounds
    rejections = 0
    while True:
        theta = _draw_theta(config, rng)
        gen_seed = int(rng.integers(0, 2 ** 63))
        panel = _generate_panel(config, theta, gen_seed)
        d = density(panel.waves[0])
        if lo <= d <= hi:
            return theta, panel, gen_seed, rejections
        rejections += 1
        if rejections > config.max_screen_rejections:
            raise ScreeningExhaustedError(
                f"{rejections} consecutive parameter draws failed the "
                f"density screen [{lo}, {hi}]"
            )


def _to_jsonable_bins(bins):
    return [b if math.isfinite(b) else "inf" for b in bins]


def _gof_record(tergm_ensemble, saom_ensemble):
    out = {}
    for kind in AUXILIARY_KINDS:
        gt = auxiliary_gof(tergm_ensemble, kind)
        gs = auxiliary_gof(saom_ensemble, kind)
        out[kind] = {
            "bins": _to_jsonable_bins(gt.bins),
            "target": gt.target.tolist(),
            "tergm_medians": gt.medians.tolist(),
            "saom_medians": gs.medians.tolist(),
        }
    return out


def _run_replication(config: ExperimentConfig, index: int) -> dict:
    """One generate/fit/predict/evaluate cycle; failures become records."""
    record = {
        "index": index,
        "theta": None,
        "screen_rejections": None,
        "error": None,
        "tergm": None,
        "saom": None,
        "gof": None,
        "warnings": [],
    }
    stage = "generate"
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            rng = child_rng(config.master_seed, index)
            theta, panel, _, rejections = _sample_admissible(config, rng)
            record["theta"] = theta.tolist()
            record["screen_rejections"] = rejections
            fit_panel = panel.subpanel(panel.wave_count - 1)
            target = panel.waves[-1]

            stage = "fit_tergm"
            tergm_fit = fit_mple(
                fit_panel, process_tergm_specs(),
                bootstrap_count=config.bootstrap_count,
                seed=child_seed(config.master_seed, index, 1),
            )
            stage = "fit_saom"
            saom_fit = fit_mom(
                fit_panel, objective_specs(), rm_phases=config.rm,
                seed=child_seed(config.master_seed, index, 2),
                backend=config.backend,
            )

            stage = "predict_tergm"
            tergm_draws = simulate(
                tergm_fit.model,
                conditioning=(fit_panel.waves[-1],),
                draw_count=config.predictive_draws,
                seed=child_seed(config.master_seed, index, 3),
                backend=config.backend,
            )
            tergm_ensemble = PredictionEnsemble(target, tergm_draws)
            stage = "predict_saom"
            saom_draws = forward_predict(
                saom_fit, fit_panel.waves[-1],
                draw_count=config.predictive_draws,
                seed=child_seed(config.master_seed, index, 4),
                backend=config.backend,
            )
            saom_ensemble = PredictionEnsemble(target, saom_draws)

            stage = "evaluate"
            record["tergm"] = {
                "coefficients": tergm_fit.coefficients,
                "auc_roc": roc_curve(tergm_ensemble).auc,
                "auc_pr": pr_curve(tergm_ensemble).auc,
            }
            record["saom"] = {
                "coefficients": saom_fit.coefficients,
                "rates": list(saom_fit.rates),
                "converged": saom_fit.converged,
                "max_abs_t_ratio": saom_fit.max_abs_t_ratio,
                "auc_roc": roc_curve(saom_ensemble).auc,
                "auc_pr": pr_curve(saom_ensemble).auc,
            }
            record["gof"] = _gof_record(tergm_ensemble, saom_ensemble)
        except (NetpanelError, np.linalg.LinAlgError) as exc:
            record["error"] = {
                "stage": stage,
                "type": type(exc).__name__,
                "message": str(exc),
            }
    record["warnings"] = [
        f"{w.category.__name__}: {w.message}" for w in caught
    ]
    return record


def _aggregate_endogenous(ok_records):
    """Per-kind distribution of endogenous-fit differences over bins.

    For each auxiliary kind, every bin populated in at least one
    replication yields one mean |deviation| difference across
    replications; the interquartile range of those per-bin values is the
    parity summary (0 inside the IQR reads as neither model closer).
    """
    out = {}
    for kind in AUXILIARY_KINDS:
        a = np.array([r["gof"][kind]["target"] for r in ok_records])
        b = np.array([r["gof"][kind]["tergm_medians"] for r in ok_records])
        c = np.array([r["gof"][kind]["saom_medians"] for r in ok_records])
        bins = ok_records[0]["gof"][kind]["bins"]
        populated = (a != 0).any(axis=0) | (b != 0).any(axis=0) | (c != 0).any(axis=0)
        used = np.flatnonzero(populated)
        values = [diff_endogenous(a[:, j], b[:, j], c[:, j]) for j in used]
        if values:
            q1, q3 = np.percentile(values, [25.0, 75.0])
            entry = {
                "bins_used": [bins[j] for j in used],
                "values": values,
                "median": float(np.median(values)),
                "iqr": [float(q1), float(q3)],
                "iqr_includes_zero": bool(q1 <= 0.0 <= q3),
            }
        else:
            entry = {
                "bins_used": [],
                "values": [],
                "median": None,
                "iqr": None,
                "iqr_includes_zero": None,
            }
        out[kind] = entry
    return out


def _aggregate(config: ExperimentConfig, records) -> dict:
    ok = [r for r in records if r["error"] is None]
    agg = {
        "replication_count": config.replication_count,
        "ok_count": len(ok),
        "failure_count": len(records) - len(ok),
    }
    if len(ok) < 2:
        agg["note"] = "fewer than 2 successful replications; no comparisons"
        return agg
    for metric in ("auc_roc", "auc_pr"):
        t_vals = [r["tergm"][metric] for r in ok]
        s_vals = [r["saom"][metric] for r in ok]
        entry = {
            "tergm_mean": float(np.mean(t_vals)),
            "saom_mean": float(np.mean(s_vals)),
            "mean_difference": diff_auc(t_vals, s_vals),
        }
        try:
            res = two_sample_t(t_vals, s_vals)
            entry["welch"] = {
                "t": res.t,
                "df": res.df,
                "p_two_sided": res.p,
                "p_one_sided_tergm_greater": one_sided_p(res),
            }
        except UndefinedTestError as exc:
            entry["welch"] = {"error": str(exc)}
        agg[metric] = entry
    agg["diff_endogenous"] = _aggregate_endogenous(ok)
    return agg


@dataclass(frozen=True)
class ExperimentReport:
    """Full experiment output: per-replication rows plus aggregates."""

    config: ExperimentConfig
    replications: tuple
    aggregates: dict

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "replications": list(self.replications),
            "aggregates": self.aggregates,
        }


def run_experiment(config: ExperimentConfig) -> ExperimentReport:
    """Run all replications and aggregate the paired comparison.

    Replications are independent and seeded by index, so the report is a
    pure function of the config regardless of ``threads``.  Individual
    replication failures are recorded in their rows and excluded pairwise
    from the aggregates; they never abort the run.
    """
    records = Parallel(n_jobs=config.threads)(
        delayed(_run_replication)(config, r)
        for r in range(config.replication_count)
    )
    return ExperimentReport(
        config=config,
        replications=tuple(records),
        aggregates=_aggregate(config, records),
    )


def classroom_tergm_specs(sex_covariate: str = "male",
                          primary_covariate: str = "primary_school"):
    """The friendship-model statistics, with the dyadic stability term."""
    return (
        StatisticSpec("edges"),
        StatisticSpec("reciprocity"),
        StatisticSpec("transitive_triplets"),
        StatisticSpec("three_cycles"),
        StatisticSpec("transitive_ties"),
        StatisticSpec("indegree_popularity_sqrt"),
        StatisticSpec("outdegree_popularity_sqrt"),
        StatisticSpec("outdegree_activity_1_5"),
        StatisticSpec("covariate_match", covariate=primary_covariate),
        StatisticSpec("covariate_receiver", covariate=sex_covariate),
        StatisticSpec("covariate_sender", covariate=sex_covariate),
        StatisticSpec("covariate_match", covariate=sex_covariate),
        StatisticSpec("memory_stability"),
    )


def classroom_saom_specs(sex_covariate: str = "male",
                         primary_covariate: str = "primary_school"):
    """The friendship-model statistics for the actor-oriented fit."""
    return tuple(
        s for s in classroom_tergm_specs(sex_covariate, primary_covariate)
        if s.kind != "memory_stability"
    )


@dataclass(frozen=True)
class ReplicationStudyConfig:
    """Settings for the four-wave classroom replication."""

    predictive_draws: int = 100
    bootstrap_count: int = 200
    rm: RobbinsMonroConfig = field(default_factory=RobbinsMonroConfig)
    sex_covariate: str = "male"
    primary_covariate: str = "primary_school"
    master_seed: int = 0
    backend: str | None = None

    def __post_init__(self):
        if self.predictive_draws < 1:
            raise ConfigurationError("predictive_draws must be >= 1")
        if self.bootstrap_count < 1:
            raise ConfigurationError("bootstrap_count must be >= 1")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class ReplicationStudyReport:
    """Paired fits, prediction ensembles, and evaluation for one panel."""

    config: ReplicationStudyConfig
    tergm_fit: object
    saom_fit: object
    tergm_ensemble: PredictionEnsemble
    saom_ensemble: PredictionEnsemble
    curves: dict
    gof: dict
    diff_endogenous_by_kind: dict

    def to_dict(self) -> dict:
        tergm = self.tergm_fit
        saom = self.saom_fit
        return {
            "config": self.config.to_dict(),
            "tergm": {
                "coefficients": tergm.coefficients,
                "confidence_intervals": {
                    name: list(tergm.interval(name)) for name in tergm.model.names
                },
                "confidence_level": tergm.confidence_level,
                "auc_roc": self.curves["tergm_roc"].auc,
                "auc_pr": self.curves["tergm_pr"].auc,
            },
            "saom": {
                "coefficients": saom.coefficients,
                "standard_errors": dict(
                    zip(saom.model.names, saom.beta_standard_errors.tolist())
                ),
                "rates": list(saom.rates),
                "rate_standard_errors": saom.rate_standard_errors.tolist(),
                "converged": saom.converged,
                "max_abs_t_ratio": saom.max_abs_t_ratio,
                "auc_roc": self.curves["saom_roc"].auc,
                "auc_pr": self.curves["saom_pr"].auc,
            },
            "curves": {
                name: {"auc": c.auc, "points": [list(p) for p in c.points]}
                for name, c in self.curves.items()
            },
            "gof": self.gof,
            "diff_endogenous_by_kind": self.diff_endogenous_by_kind,
        }


def _check_classroom_covariates(panel: NetworkPanel, config):
    cov = panel.covariates
    missing = []
    if config.sex_covariate not in cov.vertex:
        missing.append(f"vertex covariate {config.sex_covariate!r}")
    has_primary = (
        config.primary_covariate in cov.dyad
        or config.primary_covariate in cov.vertex
    )
    if not has_primary:
        missing.append(f"covariate {config.primary_covariate!r} (dyad or vertex)")
    if missing:
        raise ConfigurationError(
            "panel covariates do not match the friendship-model schema; "
            "missing " + " and ".join(missing)
        )


def replicate_knecht(panel: NetworkPanel,
                     config: ReplicationStudyConfig | None = None
                     ) -> ReplicationStudyReport:
    """Paired fit and wave-4 prediction on a user-supplied four-wave panel.

    Both models are fitted to waves 1-3 with the classroom friendship
    specification; wave 4 is predicted with ``predictive_draws``
    simulations per model and evaluated by ROC/PR curves and auxiliary
    statistics.  The panel (typically 26 students, 4 waves) must carry the
    sex vertex covariate and the earlier-school covariate.
    """
    config = config or ReplicationStudyConfig()
    if panel.wave_count != 4:
        raise ConfigurationError(
            f"the replication protocol needs exactly 4 waves, got "
            f"{panel.wave_count}"
        )
    _check_classroom_covariates(panel, config)
    tergm_specs = classroom_tergm_specs(config.sex_covariate,
                                        config.primary_covariate)
    saom_specs = classroom_saom_specs(config.sex_covariate,
                                      config.primary_covariate)
    fit_panel = panel.subpanel(3)
    target = panel.waves[3]
    seed = config.master_seed

    tergm_fit = fit_mple(
        fit_panel, tergm_specs, bootstrap_count=config.bootstrap_count,
        seed=child_seed(seed, 1),
    )
    saom_fit = fit_mom(
        fit_panel, saom_specs, rm_phases=config.rm,
        seed=child_seed(seed, 2), backend=config.backend,
    )
    tergm_draws = simulate(
        tergm_fit.model,
        conditioning=(fit_panel.waves[-1],),
        covariates=panel.covariates,
        draw_count=config.predictive_draws,
        seed=child_seed(seed, 3),
        backend=config.backend,
    )
    saom_draws = forward_predict(
        saom_fit, fit_panel.waves[-1], covariates=panel.covariates,
        draw_count=config.predictive_draws,
        seed=child_seed(seed, 4), backend=config.backend,
    )
    tergm_ensemble = PredictionEnsemble(target, tergm_draws)
    saom_ensemble = PredictionEnsemble(target, saom_draws)
    curves = {
        "tergm_roc": roc_curve(tergm_ensemble),
        "tergm_pr": pr_curve(tergm_ensemble),
        "saom_roc": roc_curve(saom_ensemble),
        "saom_pr": pr_curve(saom_ensemble),
    }
    gof = _gof_record(tergm_ensemble, saom_ensemble)
    by_kind = {}
    for kind in AUXILIARY_KINDS:
        entry = gof[kind]
        by_kind[kind] = diff_endogenous(
            entry["target"], entry["tergm_medians"], entry["saom_medians"]
        )
    return ReplicationStudyReport(
        config=config,
        tergm_fit=tergm_fit,
        saom_fit=saom_fit,
        tergm_ensemble=tergm_ensemble,
        saom_ensemble=saom_ensemble,
        curves=curves,
        gof=gof,
        diff_endogenous_by_kind=by_kind,
    )
