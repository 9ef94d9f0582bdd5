"""Discrete-time exponential-family network models on panels.

A wave is modeled conditional on the preceding wave(s) through an
exponential-family density over all networks, with memory statistics tying
the present to the past.  Estimation is maximum pseudolikelihood (each
dyad-wave observation enters a logistic regression through its
change-statistic row) with confidence intervals from a temporal block
bootstrap that resamples whole modeled waves.  Simulation is a
tie-toggle Metropolis-Hastings chain.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from . import _kernels
from .errors import (
    ConfigurationError,
    ConvergenceError,
    DegeneracyWarning,
    SeparationError,
)
from .network import Covariates, DirectedNetwork, NetworkPanel
from .rng import child_rng, fresh_seed
from .statistics import (
    MEMORY_KINDS,
    StatisticSpec,
    change_matrix,
    compile_statistics,
)


def _as_spec_tuple(specs):
    specs = tuple(specs)
    if not specs:
        raise ConfigurationError("a model needs at least one statistic")
    for s in specs:
        if not isinstance(s, StatisticSpec):
            raise ConfigurationError(f"expected StatisticSpec, got {type(s).__name__}")
    return specs


def required_lag_depth(specs) -> int:
    """Number of past waves the model conditions on (at least 1)."""
    return max([1] + [s.lag for s in specs if s.kind in MEMORY_KINDS])


@dataclass(frozen=True)
class TergmModel:
    """Statistics plus their log-odds coefficients; conditions on lag_depth waves."""

    statistics: tuple
    theta: np.ndarray
    lag_depth: int = 1

    def __post_init__(self):
        specs = _as_spec_tuple(self.statistics)
        theta = np.asarray(self.theta, dtype=np.float64)
        if theta.shape != (len(specs),):
            raise ConfigurationError(
                f"theta has length {theta.size}, expected {len(specs)}"
            )
        if not np.isfinite(theta).all():
            raise ConfigurationError("theta must be finite")
        depth = required_lag_depth(specs)
        if self.lag_depth < depth:
            raise ConfigurationError(
                f"lag_depth {self.lag_depth} is too small; the statistics "
                f"look back {depth} waves"
            )
        theta = theta.copy()
        theta.setflags(write=False)
        object.__setattr__(self, "statistics", specs)
        object.__setattr__(self, "theta", theta)

    @property
    def names(self):
        return tuple(s.name for s in self.statistics)


@dataclass(frozen=True)
class TergmFit:
    """A fitted model with bootstrap uncertainty.

    ``bootstrap_replicates`` holds one coefficient vector per successful
    resample; ``confidence_intervals`` are percentile intervals at
    ``confidence_level``.  ``n_obs`` counts modeled dyad-wave observations.
    """

    model: TergmModel
    bootstrap_replicates: np.ndarray
    confidence_intervals: np.ndarray
    confidence_level: float
    n_obs: int
    failed_bootstrap_count: int
    log_likelihood: float
    gradient_norm: float
    iterations: int
    seed: int

    @property
    def coefficients(self) -> dict:
        return dict(zip(self.model.names, self.model.theta.tolist()))

    def interval(self, name: str):
        idx = self.model.names.index(name)
        lo, hi = self.confidence_intervals[idx]
        return float(lo), float(hi)


def _history(panel: NetworkPanel, t: int, depth: int):
    """Waves strictly before t, most recent first, depth of them."""
    return tuple(panel.waves[t - 1 - back] for back in range(depth))


def _design_for_wave(specs, panel, t, depth, off_mask):
    cols = []
    history = _history(panel, t, depth)
    wave = panel.waves[t]
    for spec in specs:
        cm = change_matrix(spec, wave, previous=history, covariates=panel.covariates)
        cols.append(cm[off_mask])
    x = np.column_stack(cols)
    y = wave.adjacency[off_mask].astype(np.float64)
    return x, y


def _check_separation(x, y, names):
    pos = y == 1.0
    neg = ~pos
    if not pos.any() or not neg.any():
        raise SeparationError(
            names[0],
            "every modeled dyad has the same state; the pseudolikelihood "
            "has no interior maximum",
        )
    for q, name in enumerate(names):
        col = x[:, q]
        if col[pos].min() > col[neg].max() or col[pos].max() < col[neg].min():
            raise SeparationError(name)


def _log_likelihood(x, y, theta):
    eta = x @ theta
    return float(y @ eta - np.logaddexp(0.0, eta).sum())


def _newton_mple(x, y, theta0=None, tol=1e-8, max_iter=100):
    """Damped Newton ascent of the logistic log-likelihood."""
    k = x.shape[1]
    theta = np.zeros(k) if theta0 is None else np.array(theta0, dtype=np.float64)
    ll = _log_likelihood(x, y, theta)
    for iteration in range(1, max_iter + 1):
        p = expit(x @ theta)
        grad = x.T @ (y - p)
        gnorm = float(np.linalg.norm(grad))
        if gnorm < tol:
            return theta, ll, gnorm, iteration - 1
        w = p * (1.0 - p)
        hess = x.T @ (x * w[:, None])
        try:
            step = np.linalg.solve(hess, grad)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(hess, grad, rcond=None)[0]
        scale = 1.0
        while scale >= 2.0 ** -30:
            candidate = theta + scale * step
            ll_new = _log_likelihood(x, y, candidate)
            if ll_new >= ll - 1e-12:
                break
            scale /= 2.0
        else:
            raise ConvergenceError(
                "Newton damping could not find an ascent step "
                f"(gradient norm {gnorm:.3e})",
                last_iterate=theta,
            )
        assert ll_new >= ll - 1e-12
        theta, ll = candidate, ll_new
    raise ConvergenceError(
        f"pseudolikelihood maximization did not converge in {max_iter} "
        f"iterations (gradient norm {gnorm:.3e})",
        last_iterate=theta,
    )


def fit_mple(panel: NetworkPanel, specs, bootstrap_count: int = 200,
             confidence_level: float = 0.95, seed: int | None = None,
             tol: float = 1e-8, max_iter: int = 100) -> TergmFit:
    """Maximum pseudolikelihood fit with a wave-resampling bootstrap.

    Each wave t (beyond the conditioning depth) contributes one logistic
    observation per ordered dyad: response is the tie state at t, features
    are the change statistics given the preceding waves.  The bootstrap
    resamples whole modeled waves with replacement and refits; intervals
    are percentile intervals over successful replicates.
    """
    specs = _as_spec_tuple(specs)
    if bootstrap_count < 1:
        raise ConfigurationError("bootstrap_count must be >= 1")
    if not 0.0 < confidence_level < 1.0:
        raise ConfigurationError("confidence_level must be in (0, 1)")
    depth = required_lag_depth(specs)
    if panel.wave_count < depth + 1:
        raise ConfigurationError(
            f"panel has {panel.wave_count} waves; statistics looking back "
            f"{depth} waves need at least {depth + 1}"
        )
    n = panel.n
    off_mask = ~np.eye(n, dtype=bool)
    names = tuple(s.name for s in specs)
    modeled = range(depth, panel.wave_count)
    blocks = [_design_for_wave(specs, panel, t, depth, off_mask) for t in modeled]
    x = np.concatenate([b[0] for b in blocks])
    y = np.concatenate([b[1] for b in blocks])
    _check_separation(x, y, names)
    theta, ll, gnorm, iters = _newton_mple(x, y, tol=tol, max_iter=max_iter)

    if seed is None:
        seed = fresh_seed()
    rng = child_rng(seed, 0)
    wave_count = len(blocks)
    replicates = []
    failed = 0
    for _ in range(bootstrap_count):
        picks = rng.integers(0, wave_count, size=wave_count)
        xb = np.concatenate([blocks[w][0] for w in picks])
        yb = np.concatenate([blocks[w][1] for w in picks])
        try:
            _check_separation(xb, yb, names)
            tb, _, _, _ = _newton_mple(xb, yb, theta0=theta, tol=tol,
                                       max_iter=max_iter)
        except (SeparationError, ConvergenceError):
            failed += 1
            continue
        replicates.append(tb)
    if not replicates:
        raise ConvergenceError(
            "all bootstrap replicates failed; no interval can be formed",
            last_iterate=theta,
        )
    replicates = np.array(replicates)
    alpha = (1.0 - confidence_level) / 2.0
    lo = np.percentile(replicates, 100.0 * alpha, axis=0)
    hi = np.percentile(replicates, 100.0 * (1.0 - alpha), axis=0)
    intervals = np.column_stack([lo, hi])
    model = TergmModel(specs, theta, lag_depth=depth)
    return TergmFit(
        model=model,
        bootstrap_replicates=replicates,
        confidence_intervals=intervals,
        confidence_level=confidence_level,
        n_obs=x.shape[0],
        failed_bootstrap_count=failed,
        log_likelihood=ll,
        gradient_norm=gnorm,
        iterations=iters,
        seed=seed,
    )


def _normalize_history(conditioning):
    if conditioning is None:
        return ()
    if isinstance(conditioning, DirectedNetwork):
        return (conditioning,)
    return tuple(conditioning)


def default_burn_in(n: int) -> int:
    return 10 * n * n


def default_thinning(n: int) -> int:
    return n * n


def simulate_raw(model: TergmModel, conditioning=None,
                 covariates: Covariates | None = None, draw_count: int = 1,
                 burn_in: int | None = None, thinning: int | None = None,
                 seed: int | None = None, initial: DirectedNetwork | None = None,
                 backend=None, rng=None):
    """Metropolis-Hastings draws as a raw (draws, n, n) int8 array.

    Returns ``(stack, extreme_fraction, labels)``.  ``simulate`` wraps this
    in DirectedNetwork objects; bulk callers avoid the wrapping cost.  An
    explicit ``rng`` overrides ``seed`` (used by drivers that manage child
    streams themselves).
    """
    history = _normalize_history(conditioning)
    depth = required_lag_depth(model.statistics)
    if depth > 0 and any(s.kind in MEMORY_KINDS for s in model.statistics):
        if len(history) < depth:
            raise ConfigurationError(
                f"model statistics look back {depth} waves but only "
                f"{len(history)} conditioning waves were given"
            )
    start = initial if initial is not None else (history[0] if history else None)
    if start is None:
        raise ConfigurationError(
            "simulate needs conditioning waves or an explicit initial network"
        )
    n = start.n
    for wave in history:
        if wave.n != n:
            raise ConfigurationError("conditioning waves disagree on size")
    if draw_count < 1:
        raise ConfigurationError("draw_count must be >= 1")
    burn_in = default_burn_in(n) if burn_in is None else int(burn_in)
    thinning = default_thinning(n) if thinning is None else int(thinning)
    if burn_in < 0 or thinning < 1:
        raise ConfigurationError("burn_in must be >= 0 and thinning >= 1")
    compiled = compile_statistics(model.statistics, n, covariates, history)
    if rng is None:
        rng = child_rng(seed)
    draws, extreme = _kernels.mh_chain(
        start.adjacency, compiled, model.theta, burn_in, thinning, draw_count,
        rng, backend=backend,
    )
    return draws, extreme, start.labels


def simulate(model: TergmModel, conditioning=None,
             covariates: Covariates | None = None, draw_count: int = 1,
             burn_in: int | None = None, thinning: int | None = None,
             seed: int | None = None, initial: DirectedNetwork | None = None,
             backend=None, rng=None):
    """Sample networks from the model's conditional distribution.

    The chain proposes uniformly random single-dyad toggles, accepting with
    probability min(1, exp(theta . change)); draws are recorded every
    ``thinning`` steps after ``burn_in`` steps (defaults 10 n^2 and n^2).  A
    chain spending more than 99% of its post-burn-in steps below density
    0.01 or above 0.99 attaches a DegeneracyWarning.
    """
    draws, extreme, labels = simulate_raw(
        model, conditioning, covariates, draw_count, burn_in, thinning, seed,
        initial, backend, rng,
    )
    if extreme > 0.99:
        warnings.warn(
            f"sampler spent {extreme:.1%} of post-burn-in steps at density "
            "< 0.01 or > 0.99; the model is likely degenerate",
            DegeneracyWarning,
            stacklevel=2,
        )
    return [DirectedNetwork(draws[d], labels) for d in range(draws.shape[0])]


def forward_simulate_panel(model: TergmModel, initial: DirectedNetwork,
                           steps: int, covariates: Covariates | None = None,
                           burn_in: int | None = None,
                           thinning: int | None = None,
                           seed: int | None = None, backend=None):
    """Iterate one-wave-ahead simulation: each wave conditions on the last.

    Returns the ``steps`` newly simulated waves (the initial network is the
    caller's and is not repeated in the output).  Each step draws from its
    own child stream of ``seed``.
    """
    if steps < 1:
        raise ConfigurationError("steps must be >= 1")
    if seed is None:
        seed = fresh_seed()
    depth = required_lag_depth(model.statistics)
    waves = []
    history = [initial]
    for step in range(steps):
        if len(history) < depth:
            raise ConfigurationError(
                f"model looks back {depth} waves; seed the simulation with "
                "that much history"
            )
        wave = simulate(
            model,
            conditioning=tuple(reversed(history[-depth:])),
            covariates=covariates,
            draw_count=1,
            burn_in=burn_in,
            thinning=thinning,
            backend=backend,
            rng=child_rng(seed, step),
        )[0]
        waves.append(wave)
        history.append(wave)
    return waves
