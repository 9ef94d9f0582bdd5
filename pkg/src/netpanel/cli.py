"""Command-line interface: simulate, fit, predict, evaluate, compare.

Every command writes JSON reports that embed the effective configuration,
the seed, the package version, and the active kernel backend, so a report
can be reproduced byte-for-byte from its own contents.  Exit codes: 0 on
success, 2 on configuration or input problems, 3 on numerical failures.
"""

from __future__ import annotations

import functools
import sys
from dataclasses import fields as dataclass_fields
from pathlib import Path

import click
import numpy as np

from . import io as nio
from .errors import (
    ConfigurationError,
    EstimationError,
    InvalidDyadError,
    InvalidNetworkError,
    ScreeningExhaustedError,
    UndefinedCurveError,
    UndefinedTestError,
)
from .evaluation import (
    AUXILIARY_KINDS,
    PredictionEnsemble,
    auxiliary_gof,
    diff_endogenous,
    pr_curve,
    roc_curve,
)
from .experiments import (
    PROCESS_KINDS,
    ExperimentConfig,
    ReplicationStudyConfig,
    generate_saom_process,
    generate_tergm_process,
    replicate_knecht,
    run_experiment,
)
from .network import density
from .rng import child_seed, fresh_seed
from .saom import RobbinsMonroConfig, fit_mom, forward_predict
from .statistics import MEMORY_KINDS
from .tergm import fit_mple, simulate

_INPUT_ERRORS = (
    ConfigurationError,
    InvalidNetworkError,
    InvalidDyadError,
    UndefinedCurveError,
    UndefinedTestError,
    OSError,
)
_NUMERICAL_ERRORS = (
    EstimationError,
    ScreeningExhaustedError,
    np.linalg.LinAlgError,
)


def _handled(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except _NUMERICAL_ERRORS as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(3)
        except _INPUT_ERRORS as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(2)
    return wrapper


def _out_option(fn):
    return click.option(
        "--out", "out_dir", envvar="NETPANEL_OUT_DIR", required=True,
        type=click.Path(file_okay=False),
        help="Output directory (or set NETPANEL_OUT_DIR).",
    )(fn)


@click.group()
@click.version_option(version=nio.version_string(), prog_name="netpanel")
def main():
    """Longitudinal network models: simulation, estimation, evaluation."""


def _parse_theta(text: str) -> np.ndarray:
    parts = [p.strip() for p in text.split(",")]
    try:
        values = [float(p) for p in parts]
    except ValueError:
        raise ConfigurationError(
            f"--theta must be comma-separated numbers, got {text!r}"
        ) from None
    if len(values) != 4:
        raise ConfigurationError(
            f"--theta needs exactly 4 values, got {len(values)}"
        )
    return np.array(values)


@main.command("simulate-dgp")
@click.option("--process", type=click.Choice(PROCESS_KINDS), required=True)
@click.option("--theta", required=True,
              help="Four comma-separated process parameters.")
@click.option("--seed", type=int, default=None)
@click.option("--vertex-count", type=int, default=20, show_default=True)
@click.option("--wave-count", type=int, default=6, show_default=True,
              help="Generated waves including the dropped first one.")
@click.option("--saom-rate", type=float, default=40.0, show_default=True)
@_out_option
@_handled
def simulate_dgp(process, theta, seed, vertex_count, wave_count, saom_rate,
                 out_dir):
    """Generate a synthetic panel from one of the two processes."""
    theta = _parse_theta(theta)
    if seed is None:
        seed = fresh_seed()
    config = ExperimentConfig(
        process=process, vertex_count=vertex_count, wave_count=wave_count,
        saom_rate=saom_rate, master_seed=seed,
    )
    if process == "tergm_process":
        panel = generate_tergm_process(theta, config, seed)
    else:
        panel = generate_saom_process(theta, config, seed)
    out = Path(out_dir)
    manifest_path = nio.save_panel(out, panel)
    report = nio.make_envelope(
        command="simulate-dgp",
        seed=seed,
        config={
            "process": process,
            "theta": theta.tolist(),
            "vertex_count": vertex_count,
            "wave_count": wave_count,
            "saom_rate": saom_rate,
        },
        results={
            "panel": manifest_path.name,
            "wave_count": panel.wave_count,
            "densities": [density(w) for w in panel.waves],
        },
    )
    nio.write_report(out / "report.json", report)
    click.echo(f"wrote {panel.wave_count}-wave panel to {manifest_path}")


def _load_rm_config(path) -> RobbinsMonroConfig:
    if path is None:
        return RobbinsMonroConfig()
    return RobbinsMonroConfig.from_dict(nio.read_json(path))


@main.command("fit")
@click.option("--model", "model_kind", type=click.Choice(["tergm", "saom"]),
              required=True)
@click.option("--panel", "panel_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--statistics", "spec_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="JSON file listing the model's statistics.")
@click.option("--seed", type=int, default=None)
@click.option("--bootstrap-count", type=int, default=200, show_default=True,
              help="Bootstrap resamples (tergm only).")
@click.option("--confidence-level", type=float, default=0.95,
              show_default=True, help="Interval level (tergm only).")
@click.option("--rm-config", "rm_path", default=None,
              type=click.Path(exists=True, dir_okay=False),
              help="JSON tuning for the stochastic-approximation fit (saom).")
@_out_option
@_handled
def fit(model_kind, panel_path, spec_path, seed, bootstrap_count,
        confidence_level, rm_path, out_dir):
    """Fit a model to a panel and write the estimates."""
    panel = nio.load_panel(panel_path)
    specs = nio.load_statistics(nio.read_json(spec_path))
    if model_kind == "tergm":
        result = fit_mple(
            panel, specs, bootstrap_count=bootstrap_count,
            confidence_level=confidence_level, seed=seed,
        )
        results = nio.tergm_fit_to_dict(result)
    else:
        result = fit_mom(panel, specs, rm_phases=_load_rm_config(rm_path),
                         seed=seed)
        results = nio.saom_fit_to_dict(result)
    out = Path(out_dir)
    report = nio.make_envelope(
        command="fit",
        seed=result.seed,
        config={
            "model": model_kind,
            "panel": str(panel_path),
            "statistics": [s.to_dict() for s in specs],
            "bootstrap_count": bootstrap_count,
            "confidence_level": confidence_level,
        },
        results=results,
    )
    nio.write_report(out / "fit.json", report)
    table = nio.coefficient_table(results)
    (out / "coefficients.txt").write_text(table)
    click.echo(table, nl=False)


def _tergm_conditioning(panel, model):
    prior = panel.waves[:-1]
    depth = model.lag_depth
    if len(prior) < depth:
        raise ConfigurationError(
            f"model conditions on {depth} waves but the panel provides "
            f"only {len(prior)} before the target"
        )
    return tuple(reversed(prior[-depth:]))


def _saom_previous(panel, model):
    depth = max(
        [0] + [s.lag for s in model.statistics if s.kind in MEMORY_KINDS]
    )
    if depth == 0:
        return None
    before_start = panel.waves[:-2]
    if len(before_start) < depth:
        raise ConfigurationError(
            f"memory statistics look back {depth} waves before the "
            f"prediction period but only {len(before_start)} are available"
        )
    return tuple(reversed(before_start[-depth:]))


def _write_ensemble(out: Path, ensemble: PredictionEnsemble, seed, config):
    out.mkdir(parents=True, exist_ok=True)
    nio.save_adjacency_csv(out / "target.csv", ensemble.target)
    (out / "labels.txt").write_text(
        "\n".join(str(x) for x in ensemble.target.labels) + "\n"
    )
    draws_dir = out / "draws"
    draws_dir.mkdir(parents=True, exist_ok=True)
    names = []
    for d, net in enumerate(ensemble.draws):
        name = f"draws/draw_{d:04d}.csv"
        nio.save_adjacency_csv(out / name, net)
        names.append(name)
    lines = [
        ",".join(repr(float(v)) for v in row)
        for row in ensemble.tie_probabilities
    ]
    (out / "tie_probabilities.csv").write_text("\n".join(lines) + "\n")
    nio.write_report(out / "ensemble.json", nio.make_envelope(
        command="predict",
        seed=seed,
        config=config,
        results={
            "target": "target.csv",
            "labels": "labels.txt",
            "draws": names,
            "tie_probabilities": "tie_probabilities.csv",
        },
    ))


@main.command("predict")
@click.option("--fit", "fit_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="fit.json from the fit command.")
@click.option("--panel", "panel_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="Panel whose final wave is the held-out target.")
@click.option("--draws", type=int, default=10, show_default=True)
@click.option("--seed", type=int, default=None)
@_out_option
@_handled
def predict(fit_path, panel_path, draws, seed, out_dir):
    """Simulate in lieu of the final wave and score the prediction."""
    if draws < 1:
        raise ConfigurationError("--draws must be >= 1")
    doc = nio.read_json(fit_path)
    results = doc.get("results", doc)
    kind, model = nio.model_from_fit_dict(results)
    panel = nio.load_panel(panel_path)
    if seed is None:
        seed = fresh_seed()
    target = panel.waves[-1]
    if kind == "tergm":
        nets = simulate(
            model,
            conditioning=_tergm_conditioning(panel, model),
            covariates=panel.covariates,
            draw_count=draws,
            seed=child_seed(seed, 0),
        )
    else:
        nets = forward_predict(
            model, panel.waves[-2], covariates=panel.covariates,
            draw_count=draws, seed=child_seed(seed, 0),
            previous=_saom_previous(panel, model),
        )
    ensemble = PredictionEnsemble(target, nets)
    out = Path(out_dir)
    config = {
        "fit": str(fit_path),
        "panel": str(panel_path),
        "model": kind,
        "draws": draws,
    }
    _write_ensemble(out, ensemble, seed, config)
    roc = roc_curve(ensemble)
    pr = pr_curve(ensemble)
    nio.write_report(out / "evaluation.json", nio.make_envelope(
        command="predict",
        seed=seed,
        config=config,
        results={
            "auc_roc": roc.auc,
            "auc_pr": pr.auc,
            "roc_points": [list(p) for p in roc.points],
            "pr_points": [list(p) for p in pr.points],
        },
    ))
    click.echo(f"auc_roc={roc.auc:.4f} auc_pr={pr.auc:.4f}")


def _load_ensemble(ensemble_dir: Path) -> PredictionEnsemble:
    doc = nio.read_json(ensemble_dir / "ensemble.json")
    results = doc.get("results", doc)
    for key in ("target", "draws"):
        if key not in results:
            raise ConfigurationError(
                f"{ensemble_dir}/ensemble.json is missing {key!r}"
            )
    labels = None
    if results.get("labels"):
        labels = nio.load_labels(ensemble_dir / results["labels"])
    target = nio.load_adjacency_csv(ensemble_dir / results["target"], labels)
    nets = [
        nio.load_adjacency_csv(ensemble_dir / name, labels)
        for name in results["draws"]
    ]
    return PredictionEnsemble(target, nets)


@main.command("gof")
@click.option("--ensemble", "ensemble_dir", required=True,
              type=click.Path(exists=True, file_okay=False),
              help="Directory written by the predict command.")
@click.option("--svg/--no-svg", default=False, show_default=True)
@_out_option
@_handled
def gof(ensemble_dir, svg, out_dir):
    """Auxiliary-statistic goodness of fit for a prediction ensemble."""
    ensemble_dir = Path(ensemble_dir)
    ensemble = _load_ensemble(ensemble_dir)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    tables = {}
    for kind in AUXILIARY_KINDS:
        table = auxiliary_gof(ensemble, kind)
        tables[kind] = {
            "bins": [b if b != float("inf") else "inf" for b in table.bins],
            "target": table.target.tolist(),
            "medians": table.medians.tolist(),
            "draw_values": table.draw_values.tolist(),
        }
        if svg:
            from .plots import save_gof_svg

            save_gof_svg(out / f"gof_{kind}.svg", table, title=kind)
    nio.write_report(out / "gof.json", nio.make_envelope(
        command="gof",
        seed=None,
        config={"ensemble": str(ensemble_dir)},
        results=tables,
    ))
    click.echo(f"wrote gof tables for {len(tables)} statistic kinds")


@main.command("compare")
@click.option("--panel", "panel_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--tergm-statistics", "tergm_spec_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--saom-statistics", "saom_spec_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--draws", type=int, default=10, show_default=True)
@click.option("--seed", type=int, default=None)
@click.option("--bootstrap-count", type=int, default=200, show_default=True)
@click.option("--rm-config", "rm_path", default=None,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--svg/--no-svg", default=False, show_default=True)
@_out_option
@_handled
def compare(panel_path, tergm_spec_path, saom_spec_path, draws, seed,
            bootstrap_count, rm_path, svg, out_dir):
    """Fit both model families, predict the held-out final wave, compare."""
    if draws < 1:
        raise ConfigurationError("--draws must be >= 1")
    panel = nio.load_panel(panel_path)
    if panel.wave_count < 3:
        raise ConfigurationError(
            "compare needs at least 3 waves: two to fit on plus a held-out "
            "target"
        )
    tergm_specs = nio.load_statistics(nio.read_json(tergm_spec_path))
    saom_specs = nio.load_statistics(nio.read_json(saom_spec_path))
    if seed is None:
        seed = fresh_seed()
    fit_panel = panel.subpanel(panel.wave_count - 1)
    target = panel.waves[-1]

    tergm_fit_result = fit_mple(
        fit_panel, tergm_specs, bootstrap_count=bootstrap_count,
        seed=child_seed(seed, 1),
    )
    saom_fit_result = fit_mom(
        fit_panel, saom_specs, rm_phases=_load_rm_config(rm_path),
        seed=child_seed(seed, 2),
    )
    tergm_nets = simulate(
        tergm_fit_result.model,
        conditioning=_tergm_conditioning(panel, tergm_fit_result.model),
        covariates=panel.covariates,
        draw_count=draws,
        seed=child_seed(seed, 3),
    )
    saom_nets = forward_predict(
        saom_fit_result, panel.waves[-2], covariates=panel.covariates,
        draw_count=draws, seed=child_seed(seed, 4),
        previous=_saom_previous(panel, saom_fit_result.model),
    )
    tergm_ensemble = PredictionEnsemble(target, tergm_nets)
    saom_ensemble = PredictionEnsemble(target, saom_nets)
    curves = {
        "tergm_roc": roc_curve(tergm_ensemble),
        "tergm_pr": pr_curve(tergm_ensemble),
        "saom_roc": roc_curve(saom_ensemble),
        "saom_pr": pr_curve(saom_ensemble),
    }
    gof_record = {}
    diff_by_kind = {}
    for kind in AUXILIARY_KINDS:
        gt = auxiliary_gof(tergm_ensemble, kind)
        gs = auxiliary_gof(saom_ensemble, kind)
        gof_record[kind] = {
            "bins": [b if b != float("inf") else "inf" for b in gt.bins],
            "target": gt.target.tolist(),
            "tergm_medians": gt.medians.tolist(),
            "saom_medians": gs.medians.tolist(),
        }
        diff_by_kind[kind] = diff_endogenous(
            gt.target, gt.medians, gs.medians
        )
    out = Path(out_dir)
    config = {
        "panel": str(panel_path),
        "tergm_statistics": [s.to_dict() for s in tergm_specs],
        "saom_statistics": [s.to_dict() for s in saom_specs],
        "draws": draws,
        "bootstrap_count": bootstrap_count,
    }
    nio.write_report(out / "comparison.json", nio.make_envelope(
        command="compare",
        seed=seed,
        config=config,
        results={
            "tergm": nio.tergm_fit_to_dict(tergm_fit_result),
            "saom": nio.saom_fit_to_dict(saom_fit_result),
            "auc": {
                "tergm_roc": curves["tergm_roc"].auc,
                "tergm_pr": curves["tergm_pr"].auc,
                "saom_roc": curves["saom_roc"].auc,
                "saom_pr": curves["saom_pr"].auc,
            },
            "gof": gof_record,
            "diff_endogenous_by_kind": diff_by_kind,
        },
    ))
    if svg:
        from .plots import save_curves_svg

        save_curves_svg(
            out / "roc.svg",
            {"TERGM": curves["tergm_roc"], "SAOM": curves["saom_roc"]},
            title="held-out wave, ROC",
        )
        save_curves_svg(
            out / "pr.svg",
            {"TERGM": curves["tergm_pr"], "SAOM": curves["saom_pr"]},
            title="held-out wave, precision-recall",
        )
    click.echo(
        "auc_roc tergm={:.4f} saom={:.4f}; auc_pr tergm={:.4f} saom={:.4f}".format(
            curves["tergm_roc"].auc, curves["saom_roc"].auc,
            curves["tergm_pr"].auc, curves["saom_pr"].auc,
        )
    )


_EXPERIMENT_KEYS = {f.name for f in dataclass_fields(ExperimentConfig)}


def experiment_config_from_dict(doc, threads_override=None) -> ExperimentConfig:
    """Build an ExperimentConfig from parsed JSON, validating keys."""
    if not isinstance(doc, dict):
        raise ConfigurationError("experiment config must be a JSON object")
    if "process" not in doc:
        raise ConfigurationError(
            "experiment config is missing required key 'process'"
        )
    extra = set(doc) - _EXPERIMENT_KEYS
    if extra:
        raise ConfigurationError(
            f"unknown experiment config keys {sorted(extra)}"
        )
    kwargs = dict(doc)
    if "rm" in kwargs:
        kwargs["rm"] = RobbinsMonroConfig.from_dict(kwargs["rm"])
    for key in ("density_bounds", "parameter_range"):
        if key in kwargs:
            v = kwargs[key]
            if not isinstance(v, (list, tuple)) or len(v) != 2:
                raise ConfigurationError(f"{key} must be a 2-element list")
            kwargs[key] = tuple(float(x) for x in v)
    if threads_override is not None:
        kwargs["threads"] = threads_override
    elif "threads" not in kwargs:
        kwargs["threads"] = -1
    try:
        return ExperimentConfig(**kwargs)
    except TypeError as exc:
        raise ConfigurationError(str(exc)) from None


@main.command("experiment")
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="Experiment configuration JSON.")
@click.option("--threads", type=int, default=None,
              help="Worker cap; default all cores (-1).")
@click.option("--svg/--no-svg", default=False, show_default=True)
@_out_option
@_handled
def experiment(config_path, threads, svg, out_dir):
    """Run a replicated synthetic-process comparison experiment."""
    config = experiment_config_from_dict(nio.read_json(config_path), threads)
    report = run_experiment(config)
    out = Path(out_dir)
    nio.write_report(out / "experiment.json", nio.make_envelope(
        command="experiment",
        seed=config.master_seed,
        config=config.to_dict(),
        results={
            "replications": list(report.replications),
            "aggregates": report.aggregates,
        },
    ))
    agg = report.aggregates
    if svg and "diff_endogenous" in agg:
        from .plots import save_diff_boxplot_svg

        save_diff_boxplot_svg(
            out / "diff_endogenous.svg",
            {k: v["values"] for k, v in agg["diff_endogenous"].items()},
            title=f"{config.process}: endogenous-fit difference",
        )
    click.echo(
        f"{agg['ok_count']}/{config.replication_count} replications succeeded"
    )
    for metric in ("auc_roc", "auc_pr"):
        if metric in agg:
            m = agg[metric]
            click.echo(
                f"{metric}: tergm={m['tergm_mean']:.4f} "
                f"saom={m['saom_mean']:.4f}"
            )


@main.command("replicate-knecht")
@click.option("--panel", "panel_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="Manifest of the four-wave classroom friendship panel.")
@click.option("--draws", type=int, default=100, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--bootstrap-count", type=int, default=200, show_default=True)
@click.option("--sex-covariate", default="male", show_default=True)
@click.option("--primary-covariate", default="primary_school",
              show_default=True)
@click.option("--rm-config", "rm_path", default=None,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--svg/--no-svg", default=False, show_default=True)
@_out_option
@_handled
def replicate_knecht_cmd(panel_path, draws, seed, bootstrap_count,
                         sex_covariate, primary_covariate, rm_path, svg,
                         out_dir):
    """Paired fit and wave-4 prediction on the classroom friendship data."""
    panel = nio.load_panel(panel_path)
    config = ReplicationStudyConfig(
        predictive_draws=draws,
        bootstrap_count=bootstrap_count,
        rm=_load_rm_config(rm_path),
        sex_covariate=sex_covariate,
        primary_covariate=primary_covariate,
        master_seed=seed,
    )
    report = replicate_knecht(panel, config)
    out = Path(out_dir)
    nio.write_report(out / "replication.json", nio.make_envelope(
        command="replicate-knecht",
        seed=seed,
        config=dict(config.to_dict(), panel=str(panel_path)),
        results=report.to_dict(),
    ))
    if svg:
        from .plots import save_curves_svg, save_gof_svg

        save_curves_svg(
            out / "roc.svg",
            {"TERGM": report.curves["tergm_roc"],
             "SAOM": report.curves["saom_roc"]},
            title="wave 4 prediction, ROC",
        )
        save_curves_svg(
            out / "pr.svg",
            {"TERGM": report.curves["tergm_pr"],
             "SAOM": report.curves["saom_pr"]},
            title="wave 4 prediction, precision-recall",
        )
        for kind in AUXILIARY_KINDS:
            save_gof_svg(
                out / f"gof_{kind}_tergm.svg",
                auxiliary_gof(report.tergm_ensemble, kind),
                title=f"TERGM: {kind}",
            )
            save_gof_svg(
                out / f"gof_{kind}_saom.svg",
                auxiliary_gof(report.saom_ensemble, kind),
                title=f"SAOM: {kind}",
            )
    click.echo(
        "auc_roc tergm={:.4f} saom={:.4f}".format(
            report.curves["tergm_roc"].auc, report.curves["saom_roc"].auc,
        )
    )


if __name__ == "__main__":
    main()
