"""File formats: adjacency CSV, panel manifests, model specs, JSON reports.

All machine-readable outputs are JSON written with sorted keys and no
timestamps, so identical inputs produce byte-identical files.  Matrices
travel as plain CSV (n rows by n columns, no header); a panel is a JSON
manifest naming its wave files in temporal order plus covariate files.
"""

from __future__ import annotations

import json
import math
import re
import subprocess
from functools import lru_cache
from importlib import metadata
from pathlib import Path

import numpy as np

from ._kernels import BACKEND_NAME
from .errors import ConfigurationError, InvalidNetworkError
from .network import Covariates, DirectedNetwork, NetworkPanel
from .saom import SaomModel
from .statistics import StatisticSpec
from .tergm import TergmModel, required_lag_depth

_NAME_RE = re.compile(r"^[A-Za-z0-9_][A-Za-z0-9_.-]*$")


def _read_rows(path: Path):
    text = path.read_text()
    rows = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if line.strip() == "":
            continue
        rows.append((lineno, [f.strip() for f in line.split(",")]))
    if not rows:
        raise InvalidNetworkError(f"{path}: file is empty")
    return rows


def load_adjacency_csv(path, labels=None) -> DirectedNetwork:
    """Read an n x n 0/1 matrix with no header into a network.

    Row-length and value problems are reported with their 1-based row
    number.
    """
    path = Path(path)
    rows = _read_rows(path)
    n = len(rows[0][1])
    matrix = np.zeros((len(rows), n), dtype=np.int8)
    for r, (lineno, fields) in enumerate(rows):
        if len(fields) != n:
            raise InvalidNetworkError(
                f"{path}: row {lineno} has {len(fields)} fields, expected {n}"
            )
        for c, f in enumerate(fields):
            if f == "0":
                matrix[r, c] = 0
            elif f == "1":
                matrix[r, c] = 1
            else:
                raise InvalidNetworkError(
                    f"{path}: row {lineno} has non-binary value {f!r}"
                )
    if matrix.shape[0] != n:
        raise InvalidNetworkError(
            f"{path}: {matrix.shape[0]} rows but {n} columns; the matrix "
            "must be square"
        )
    return DirectedNetwork(matrix, labels)


def save_adjacency_csv(path, network: DirectedNetwork) -> None:
    path = Path(path)
    lines = [",".join(str(int(v)) for v in row) for row in network.adjacency]
    path.write_text("\n".join(lines) + "\n")


def load_labels(path) -> tuple:
    path = Path(path)
    labels = [line.strip() for line in path.read_text().splitlines()
              if line.strip() != ""]
    if not labels:
        raise ConfigurationError(f"{path}: no labels found")
    return tuple(labels)


def load_vertex_covariate(path) -> np.ndarray:
    """One numeric value per line."""
    path = Path(path)
    values = []
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        if line.strip() == "":
            continue
        try:
            values.append(float(line.strip()))
        except ValueError:
            raise ConfigurationError(
                f"{path}: line {lineno} is not numeric: {line.strip()!r}"
            ) from None
    if not values:
        raise ConfigurationError(f"{path}: file is empty")
    return np.array(values)


def load_dyad_covariate(path) -> np.ndarray:
    """An n x n numeric CSV with no header."""
    path = Path(path)
    rows = _read_rows(path)
    n = len(rows[0][1])
    matrix = np.zeros((len(rows), n))
    for r, (lineno, fields) in enumerate(rows):
        if len(fields) != n:
            raise ConfigurationError(
                f"{path}: row {lineno} has {len(fields)} fields, expected {n}"
            )
        try:
            matrix[r] = [float(f) for f in fields]
        except ValueError:
            raise ConfigurationError(
                f"{path}: row {lineno} contains a non-numeric field"
            ) from None
    if matrix.shape[0] != n:
        raise ConfigurationError(
            f"{path}: {matrix.shape[0]} rows but {n} columns; the matrix "
            "must be square"
        )
    return matrix


def read_json(path):
    path = Path(path)
    try:
        return json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{path}: invalid JSON ({exc})") from None


def load_panel(manifest_path) -> NetworkPanel:
    """Build a panel from a JSON manifest.

    The manifest lists wave CSVs in temporal order under ``waves`` and may
    name a ``labels`` file plus ``vertex_covariates`` and
    ``dyad_covariates`` maps from covariate name to file; all paths are
    resolved relative to the manifest.
    """
    manifest_path = Path(manifest_path)
    manifest = read_json(manifest_path)
    if not isinstance(manifest, dict) or "waves" not in manifest:
        raise ConfigurationError(
            f"{manifest_path}: a panel manifest must be an object with a "
            "'waves' list"
        )
    known = {"waves", "labels", "vertex_covariates", "dyad_covariates"}
    extra = set(manifest) - known
    if extra:
        raise ConfigurationError(
            f"{manifest_path}: unknown manifest keys {sorted(extra)}"
        )
    base = manifest_path.parent
    wave_paths = manifest["waves"]
    if not isinstance(wave_paths, list) or len(wave_paths) < 2:
        raise ConfigurationError(
            f"{manifest_path}: 'waves' must list at least 2 files"
        )
    labels = None
    if manifest.get("labels"):
        labels = load_labels(base / manifest["labels"])
    waves = [load_adjacency_csv(base / w, labels) for w in wave_paths]
    vertex = {
        name: load_vertex_covariate(base / p)
        for name, p in (manifest.get("vertex_covariates") or {}).items()
    }
    dyad = {
        name: load_dyad_covariate(base / p)
        for name, p in (manifest.get("dyad_covariates") or {}).items()
    }
    return NetworkPanel(waves, Covariates(vertex=vertex, dyad=dyad))


def _checked_name(name: str) -> str:
    if not _NAME_RE.match(name):
        raise ConfigurationError(
            f"covariate name {name!r} is not usable as a file name"
        )
    return name


def save_panel(out_dir, panel: NetworkPanel, prefix: str = "wave") -> Path:
    """Write wave CSVs, covariate files, and a manifest; returns its path."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = {"waves": []}
    for t, wave in enumerate(panel.waves, start=1):
        name = f"{prefix}_{t:02d}.csv"
        save_adjacency_csv(out_dir / name, wave)
        manifest["waves"].append(name)
    labels_name = "labels.txt"
    (out_dir / labels_name).write_text(
        "\n".join(str(x) for x in panel.labels) + "\n"
    )
    manifest["labels"] = labels_name
    if panel.covariates.vertex:
        manifest["vertex_covariates"] = {}
        for name, values in sorted(panel.covariates.vertex.items()):
            fname = f"vertex_{_checked_name(name)}.txt"
            (out_dir / fname).write_text(
                "\n".join(repr(float(v)) for v in values) + "\n"
            )
            manifest["vertex_covariates"][name] = fname
    if panel.covariates.dyad:
        manifest["dyad_covariates"] = {}
        for name, matrix in sorted(panel.covariates.dyad.items()):
            fname = f"dyad_{_checked_name(name)}.csv"
            lines = [",".join(repr(float(v)) for v in row) for row in matrix]
            (out_dir / fname).write_text("\n".join(lines) + "\n")
            manifest["dyad_covariates"][name] = fname
    manifest_path = out_dir / "panel.json"
    write_report(manifest_path, manifest)
    return manifest_path


def load_statistics(data) -> tuple:
    """Statistic specs from a JSON value: a list or {'statistics': [...]}."""
    if isinstance(data, dict):
        if "statistics" not in data:
            raise ConfigurationError(
                "model configuration is missing the 'statistics' key"
            )
        data = data["statistics"]
    if not isinstance(data, list) or not data:
        raise ConfigurationError(
            "'statistics' must be a non-empty list of statistic objects"
        )
    return tuple(StatisticSpec.from_dict(entry) for entry in data)


def jsonable(value):
    """Recursively convert to JSON-safe builtins.

    Numpy scalars and arrays become Python numbers and lists; non-finite
    floats become the strings "nan", "inf", "-inf" so strict parsers can
    read every report.
    """
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [jsonable(v) for v in value.tolist()]
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer, int)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return value
    return value


def write_report(path, payload: dict) -> None:
    """Write JSON with sorted keys and a trailing newline; deterministic."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    text = json.dumps(jsonable(payload), sort_keys=True, indent=2,
                      allow_nan=False)
    path.write_text(text + "\n")


@lru_cache(maxsize=1)
def version_string() -> str:
    """Package version, with the git describe suffix when run from a checkout."""
    try:
        base = metadata.version("netpanel")
    except metadata.PackageNotFoundError:
        base = "0.1.0"
    for parent in Path(__file__).resolve().parents:
        if (parent / ".git").exists():
            try:
                out = subprocess.run(
                    ["git", "describe", "--tags", "--always"],
                    cwd=parent, capture_output=True, text=True, timeout=10,
                )
            except OSError:
                break
            if out.returncode == 0 and out.stdout.strip():
                return f"{base}+{out.stdout.strip()}"
            break
    return base


def make_envelope(command: str, seed, config: dict, results) -> dict:
    """The standard report wrapper: provenance plus effective settings."""
    return {
        "command": command,
        "version": version_string(),
        "kernel_backend": BACKEND_NAME,
        "seed": seed,
        "config": config,
        "results": results,
    }


def tergm_fit_to_dict(fit) -> dict:
    model = fit.model
    return {
        "model": "tergm",
        "statistics": [s.to_dict() for s in model.statistics],
        "theta": model.theta.tolist(),
        "lag_depth": model.lag_depth,
        "coefficients": fit.coefficients,
        "confidence_intervals": {
            name: list(fit.interval(name)) for name in model.names
        },
        "confidence_level": fit.confidence_level,
        "n_obs": fit.n_obs,
        "bootstrap_count": int(fit.bootstrap_replicates.shape[0])
        + fit.failed_bootstrap_count,
        "failed_bootstrap_count": fit.failed_bootstrap_count,
        "log_likelihood": fit.log_likelihood,
        "gradient_norm": fit.gradient_norm,
        "iterations": fit.iterations,
        "seed": fit.seed,
    }


def saom_fit_to_dict(fit) -> dict:
    model = fit.model
    return {
        "model": "saom",
        "statistics": [s.to_dict() for s in model.statistics],
        "beta": model.beta.tolist(),
        "rates": list(model.rates),
        "coefficients": fit.coefficients,
        "standard_errors": dict(
            zip(model.names, fit.beta_standard_errors.tolist())
        ),
        "rate_standard_errors": fit.rate_standard_errors.tolist(),
        "t_ratios": fit.t_ratios.tolist(),
        "converged": fit.converged,
        "max_abs_t_ratio": fit.max_abs_t_ratio,
        "observed_moments": fit.observed_moments.tolist(),
        "simulated_moment_means": fit.simulated_moment_means.tolist(),
        "seed": fit.seed,
    }


def model_from_fit_dict(results: dict):
    """Rebuild the fitted model object from a fit report's results block.

    Returns ("tergm", TergmModel) or ("saom", SaomModel).
    """
    if not isinstance(results, dict) or "model" not in results:
        raise ConfigurationError(
            "fit file must contain a results object with a 'model' key"
        )
    kind = results["model"]
    specs = load_statistics(results.get("statistics"))
    if kind == "tergm":
        theta = np.asarray(results.get("theta"), dtype=np.float64)
        lag_depth = int(results.get("lag_depth", required_lag_depth(specs)))
        return "tergm", TergmModel(specs, theta, lag_depth=lag_depth)
    if kind == "saom":
        beta = np.asarray(results.get("beta"), dtype=np.float64)
        rates = results.get("rates")
        if not rates:
            raise ConfigurationError("saom fit file is missing 'rates'")
        return "saom", SaomModel(specs, beta, tuple(float(r) for r in rates))
    raise ConfigurationError(f"unknown model kind {kind!r} in fit file")


def coefficient_table(results: dict) -> str:
    """Human-readable coefficient listing for a fit results block."""
    lines = []
    if results["model"] == "tergm":
        lines.append(f"{'statistic':<36}{'estimate':>12}{'ci_low':>12}{'ci_high':>12}")
        for name, est in results["coefficients"].items():
            lo, hi = results["confidence_intervals"][name]
            lines.append(f"{name:<36}{est:>12.4f}{lo:>12.4f}{hi:>12.4f}")
    else:
        lines.append(f"{'parameter':<36}{'estimate':>12}{'std_err':>12}")
        for m, (rate, se) in enumerate(
            zip(results["rates"], results["rate_standard_errors"]), start=1
        ):
            se_txt = f"{se:>12.4f}" if isinstance(se, float) else f"{se!s:>12}"
            lines.append(f"{'rate_period_' + str(m):<36}{rate:>12.4f}{se_txt}")
        for name, est in results["coefficients"].items():
            se = results["standard_errors"][name]
            se_txt = f"{se:>12.4f}" if isinstance(se, float) else f"{se!s:>12}"
            lines.append(f"{name:<36}{est:>12.4f}{se_txt}")
        lines.append("")
        lines.append(f"max |t-ratio|: {results['max_abs_t_ratio']}")
        lines.append(f"converged: {results['converged']}")
    return "\n".join(lines) + "\n"
