"""Actor-oriented network dynamics: mini-step simulation and moment fitting.

Between consecutive waves, actors receive change opportunities at a constant
rate (total count Poisson with mean n * rate).  At each opportunity one
uniformly chosen actor compares its n alternatives (toggle one outgoing tie,
or keep the network) and picks one with probability proportional to the
exponentiated egocentric objective.  Estimation is the unconditional method
of moments driven by three-phase Robbins-Monro stochastic approximation;
rate parameters target the observed Hamming change per period, objective
coefficients target the observed global statistics summed over waves.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, fields

import numpy as np
from scipy.stats import poisson

from . import _kernels
from .errors import (
    ConfigurationError,
    DerivativeSingularityError,
    NonConvergenceWarning,
)
from .network import Covariates, DirectedNetwork, NetworkPanel
from .rng import child_rng, child_seed, fresh_seed
from .statistics import (
    MEMORY_KINDS,
    StatisticSpec,
    compile_statistics,
    egocentric_change,
    global_value,
)


@dataclass(frozen=True)
class SaomModel:
    """Objective statistics with coefficients, plus one rate per period."""

    statistics: tuple
    beta: np.ndarray
    rates: tuple

    def __post_init__(self):
        specs = tuple(self.statistics)
        if not specs:
            raise ConfigurationError("a model needs at least one statistic")
        for s in specs:
            if not isinstance(s, StatisticSpec):
                raise ConfigurationError(
                    f"expected StatisticSpec, got {type(s).__name__}"
                )
        beta = np.asarray(self.beta, dtype=np.float64)
        if beta.shape != (len(specs),):
            raise ConfigurationError(
                f"beta has length {beta.size}, expected {len(specs)}"
            )
        if not np.isfinite(beta).all():
            raise ConfigurationError("beta must be finite")
        rates = tuple(float(r) for r in self.rates)
        if not rates:
            raise ConfigurationError("at least one period rate is required")
        if any(not np.isfinite(r) or r <= 0.0 for r in rates):
            raise ConfigurationError("every period rate must be positive")
        beta = beta.copy()
        beta.setflags(write=False)
        object.__setattr__(self, "statistics", specs)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "rates", rates)

    @property
    def names(self):
        return tuple(s.name for s in self.statistics)

    @property
    def period_count(self) -> int:
        return len(self.rates)


@dataclass
class MiniStepTrace:
    """Replayable record of one simulated period.

    ``steps`` holds (actor, alternative) pairs; alternative is the alter
    whose tie was toggled, or None when the actor kept the network.
    """

    start_network: DirectedNetwork
    final_network: DirectedNetwork
    period: int
    steps: list
    opportunity_count: int

    def networks(self):
        """Yield the network after each mini-step, starting from the start."""
        adj = np.array(self.start_network.adjacency)
        labels = self.start_network.labels
        yield DirectedNetwork(adj, labels)
        for actor, alternative in self.steps:
            if alternative is not None:
                adj[actor, alternative] = 1 - adj[actor, alternative]
            yield DirectedNetwork(adj, labels)


def mini_step_probabilities(model: SaomModel, net: DirectedNetwork, actor: int,
                            previous=None, covariates: Covariates | None = None):
    """Choice probabilities over the n alternatives of one opportunity.

    Entry j is the probability of toggling the tie to j; entry ``actor`` is
    the probability of leaving the network unchanged.  Computed with
    max-subtraction, so any finite objective is safe.
    """
    n = net.n
    if not 0 <= actor < n:
        raise ConfigurationError(f"actor {actor} out of range for n={n}")
    obj = np.zeros(n)
    for q, spec in enumerate(model.statistics):
        obj += model.beta[q] * egocentric_change(
            spec, net, actor, previous=previous, covariates=covariates
        )
    row = net.adjacency[actor]
    obj = np.where(row == 1, -obj, obj)
    obj[actor] = 0.0
    w = np.exp(obj - obj.max())
    return w / w.sum()


def mini_step(model: SaomModel, net: DirectedNetwork, actor: int,
              previous=None, covariates: Covariates | None = None,
              rng: np.random.Generator | None = None):
    """Sample one opportunity's outcome: an alter index to toggle, or None."""
    if rng is None:
        rng = np.random.default_rng()
    p = mini_step_probabilities(model, net, actor, previous, covariates)
    chosen = int(rng.choice(p.shape[0], p=p))
    return None if chosen == actor else chosen


def draw_opportunity_count(n: int, rate: float, rng: np.random.Generator) -> int:
    """Poisson(n * rate) via inverse CDF from one uniform.

    The inverse-CDF form makes the count a monotone function of the rate for
    a fixed stream, which keeps finite-difference derivative estimates with
    common random numbers smooth.
    """
    u = rng.random()
    m = poisson.ppf(u, n * rate)
    if not np.isfinite(m) or m < 0:
        return 0
    return int(m)


def simulate_period(model: SaomModel, start: DirectedNetwork, period: int = 0,
                    covariates: Covariates | None = None,
                    seed: int | None = None, previous=None, backend=None,
                    rng=None) -> MiniStepTrace:
    """Simulate one between-wave period of actor mini-steps."""
    if not 0 <= period < model.period_count:
        raise ConfigurationError(
            f"period {period} out of range; model has {model.period_count}"
        )
    n = start.n
    if rng is None:
        rng = child_rng(seed)
    count = draw_opportunity_count(n, model.rates[period], rng)
    compiled = compile_statistics(model.statistics, n, covariates, previous)
    adj, actors, targets = _kernels.saom_period(
        start.adjacency, compiled, model.beta, count, rng, backend=backend
    )
    steps = [
        (int(a), None if a == t else int(t))
        for a, t in zip(actors.tolist(), targets.tolist())
    ]
    return MiniStepTrace(
        start_network=start,
        final_network=DirectedNetwork(adj, start.labels),
        period=period,
        steps=steps,
        opportunity_count=count,
    )


@dataclass(frozen=True)
class RobbinsMonroConfig:
    """Tuning for the three estimation phases.

    Defaults follow common stochastic-approximation practice: a moderate
    initial gain halved across subphases of growing length, a modest
    derivative-estimation batch, and a large final batch for standard
    errors and convergence diagnostics.
    """

    initial_gain: float = 0.2
    subphase_count: int = 4
    subphase_base_length: int = 40
    subphase_growth: float = 1.5
    derivative_draws: int = 10
    final_draws: int = 500
    final_derivative_draws: int = 20
    fd_step_beta: float = 0.1
    fd_step_rate_relative: float = 0.1
    max_step_beta: float = 0.5
    max_step_rate_relative: float = 0.3
    step_regularization: float = 0.5
    restart_count: int = 2
    rate_floor: float = 0.01
    rate_ceiling: float = 200.0
    beta_bound: float = 10.0
    converged_t: float = 0.1
    warn_t: float = 0.25

    def subphase_lengths(self):
        length = float(self.subphase_base_length)
        out = []
        for _ in range(self.subphase_count):
            out.append(int(round(length)))
            length *= self.subphase_growth
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "RobbinsMonroConfig":
        if not isinstance(data, dict):
            raise ConfigurationError("estimation tuning must be a JSON object")
        valid = {f.name for f in fields(cls)}
        extra = set(data) - valid
        if extra:
            raise ConfigurationError(
                f"unknown estimation tuning keys {sorted(extra)}"
            )
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigurationError(str(exc)) from None


@dataclass(frozen=True)
class SaomFit:
    """Method-of-moments estimates with simulation-based uncertainty.

    ``t_ratios`` are convergence diagnostics per moment (rates first, then
    statistics): simulated-minus-observed scaled by the simulation spread.
    """

    model: SaomModel
    rate_standard_errors: np.ndarray
    beta_standard_errors: np.ndarray
    t_ratios: np.ndarray
    converged: bool
    max_abs_t_ratio: float
    observed_moments: np.ndarray
    simulated_moment_means: np.ndarray
    seed: int

    @property
    def coefficients(self) -> dict:
        return dict(zip(self.model.names, self.model.beta.tolist()))

    @property
    def rates(self):
        return self.model.rates


def _panel_histories(panel: NetworkPanel, specs):
    """Per-period history tuples (most recent first) for memory statistics."""
    depth = max([0] + [s.lag for s in specs if s.kind in MEMORY_KINDS])
    histories = []
    for m in range(panel.wave_count - 1):
        if depth > m + 1:
            raise ConfigurationError(
                f"memory statistics look back {depth} waves but period {m} "
                f"only has {m + 1} waves of history"
            )
        histories.append(tuple(panel.waves[m - back] for back in range(depth)))
    return histories


def _observed_moments(panel, specs):
    periods = panel.wave_count - 1
    k = len(specs)
    histories = _panel_histories(panel, specs)
    out = np.zeros(periods + k)
    for m in range(periods):
        out[m] = float(
            (panel.waves[m].adjacency != panel.waves[m + 1].adjacency).sum()
        )
    for q, spec in enumerate(specs):
        total = 0.0
        for m in range(periods):
            total += global_value(
                spec, panel.waves[m + 1], previous=histories[m],
                covariates=panel.covariates,
            )
        out[periods + q] = total
    return out


class _MomentSimulator:
    """Simulates the full panel's moment vector at a parameter point."""

    def __init__(self, panel, specs, backend):
        self.panel = panel
        self.specs = tuple(specs)
        self.backend = backend
        self.n = panel.n
        self.periods = panel.wave_count - 1
        self.k = len(self.specs)
        self.histories = _panel_histories(panel, self.specs)
        self.compiled = [
            compile_statistics(self.specs, self.n, panel.covariates, h)
            for h in self.histories
        ]

    def unpack(self, theta):
        return theta[: self.periods], theta[self.periods:]

    def moments(self, theta, seed_key) -> np.ndarray:
        """One noisy evaluation of the moment vector, seeded by ``seed_key``."""
        rates, beta = self.unpack(theta)
        out = np.zeros(self.periods + self.k)
        for m in range(self.periods):
            rng = child_rng(*seed_key, m)
            start = self.panel.waves[m]
            count = draw_opportunity_count(self.n, float(rates[m]), rng)
            adj, _, _ = _kernels.saom_period(
                start.adjacency, self.compiled[m], beta, count, rng,
                backend=self.backend,
            )
            out[m] = float((adj != start.adjacency).sum())
            end = DirectedNetwork(adj, start.labels)
            for q, spec in enumerate(self.specs):
                out[self.periods + q] += global_value(
                    spec, end, previous=self.histories[m],
                    covariates=self.panel.covariates,
                )
        return out

    def moment_batch(self, theta, seed, phase, draws):
        return np.array([
            self.moments(theta, (seed, phase, i)) for i in range(draws)
        ])

    def derivative(self, theta, seed, phase, draws, config):
        """Finite-difference derivative of mean moments, common random numbers."""
        p = theta.shape[0]
        d = np.zeros((p, p))
        for idx in range(p):
            if idx < self.periods:
                step = config.fd_step_rate_relative * max(1.0, theta[idx])
            else:
                step = config.fd_step_beta
            plus = theta.copy()
            minus = theta.copy()
            plus[idx] += step
            minus[idx] = max(
                config.rate_floor if idx < self.periods else -np.inf,
                minus[idx] - step,
            )
            span = plus[idx] - minus[idx]
            acc = np.zeros(p)
            for i in range(draws):
                key = (seed, phase, idx, i)
                acc += self.moments(plus, key) - self.moments(minus, key)
            d[:, idx] = acc / (draws * span)
        return d


def _initial_theta(panel, specs, observed):
    periods = panel.wave_count - 1
    n = panel.n
    theta = np.zeros(periods + len(specs))
    for m in range(periods):
        theta[m] = max(0.5, 1.5 * observed[m] / n)
    densities = [
        wave.edge_count / (n * (n - 1)) for wave in panel.waves[1:]
    ]
    mean_density = float(np.clip(np.mean(densities), 0.05, 0.95))
    for q, spec in enumerate(specs):
        if spec.kind == "edges":
            theta[periods + q] = float(np.log(mean_density / (1.0 - mean_density)))
    return theta


def fit_mom(panel: NetworkPanel, specs, rm_phases: RobbinsMonroConfig | None = None,
            seed: int | None = None, backend=None) -> SaomFit:
    """Unconditional method-of-moments estimation.

    Phase 1 estimates the moment-derivative matrix by finite differences
    over simulated panels (common random numbers across perturbations).
    Phase 2 runs Robbins-Monro iterations theta <- theta - a D^-1 (s - s_obs)
    with the gain halved across subphases and iterate averaging at each
    subphase end.  Phase 3 simulates a large batch at the final estimate for
    standard errors and per-moment convergence t-ratios; |t| >= 0.25 on any
    moment attaches a NonConvergenceWarning to the call.
    """
    config = rm_phases or RobbinsMonroConfig()
    specs = tuple(specs)
    if not specs:
        raise ConfigurationError("fit_mom needs at least one statistic")
    if seed is None:
        seed = fresh_seed()
    sim = _MomentSimulator(panel, specs, backend)
    periods, k = sim.periods, sim.k
    observed = _observed_moments(panel, specs)
    theta = _initial_theta(panel, specs, observed)

    if all(observed[m] == 0.0 for m in range(periods)):
        # A panel with zero change carries no information about the
        # objective; pin the rates near zero and flag the non-fit.
        rates = np.full(periods, config.rate_floor)
        beta = theta[periods:]
        warnings.warn(
            "panel shows no change between consecutive waves; rate estimates "
            "are pinned near zero and objective coefficients are not "
            "identified",
            NonConvergenceWarning,
            stacklevel=2,
        )
        model = SaomModel(specs, beta, tuple(rates))
        nan = np.full(periods + k, np.nan)
        return SaomFit(
            model=model,
            rate_standard_errors=nan[:periods].copy(),
            beta_standard_errors=nan[periods:].copy(),
            t_ratios=nan.copy(),
            converged=False,
            max_abs_t_ratio=float("nan"),
            observed_moments=observed,
            simulated_moment_means=nan.copy(),
            seed=seed,
        )

    def clip(vec):
        out = vec.copy()
        out[:periods] = np.clip(out[:periods], config.rate_floor,
                                config.rate_ceiling)
        out[periods:] = np.clip(out[periods:], -config.beta_bound,
                                config.beta_bound)
        return out

    theta = clip(theta)

    def run_phases(theta, attempt_seed, explore, check_identification):
        # phase 1: derivative at the starting point
        deriv = sim.derivative(theta, attempt_seed, 1,
                               config.derivative_draws, config)
        if check_identification:
            _check_invertible(deriv)

        # phase 2: stochastic approximation
        # Single-draw moment estimates are noisy, the moment map is strongly
        # nonlinear away from the solution, and a saturated Hamming moment
        # can leave a rate unidentified, so raw Newton steps can run away.
        # Safeguards: Levenberg-Marquardt damping of the solve (flat
        # directions barely move), elementwise movement caps, and derivative
        # re-estimation at the current iterate between subphases.
        lam2 = config.step_regularization ** 2
        reg = lam2 * np.eye(theta.shape[0])
        cap = np.empty_like(theta)
        gain = config.initial_gain
        for sub, length in enumerate(config.subphase_lengths()):
            if sub > 0:
                refreshed = sim.derivative(theta, attempt_seed, 10 + sub,
                                           config.derivative_draws, config)
                if np.isfinite(refreshed).all():
                    deriv = refreshed
            # The first subphase of the first attempt explores far from the
            # solution, where noisy off-diagonal derivative entries can push
            # parameters into flat dead zones; a diagonal solve (own slope
            # only, clamped positive since every moment increases in its own
            # parameter) cannot be mis-steered.  Later subphases use the
            # damped full solve.
            diagonal_only = explore and sub == 0
            diag = np.maximum(np.diagonal(deriv), 0.2)
            gram = deriv.T @ deriv + reg
            trail = np.zeros_like(theta)
            for it in range(length):
                s = sim.moments(theta, (attempt_seed, 2, sub, it))
                if diagonal_only:
                    step = (s - observed) / diag
                else:
                    step = np.linalg.solve(gram, deriv.T @ (s - observed))
                cap[:periods] = np.maximum(
                    0.5, config.max_step_rate_relative * theta[:periods]
                )
                cap[periods:] = config.max_step_beta
                move = np.clip(gain * step, -cap, cap)
                theta = clip(theta - move)
                trail += theta
            theta = clip(trail / length)
            gain /= 2.0

        # phase 3: diagnostics and uncertainty at the final estimate
        batch = sim.moment_batch(theta, attempt_seed, 3, config.final_draws)
        sim_mean = batch.mean(axis=0)
        sim_sd = batch.std(axis=0, ddof=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            t_ratios = np.where(
                sim_sd > 0.0, (sim_mean - observed) / sim_sd, np.inf
            )
            t_ratios = np.where(
                (sim_sd == 0.0) & (sim_mean == observed), 0.0, t_ratios
            )
        max_abs_t = float(np.abs(t_ratios).max())
        deriv_final = sim.derivative(theta, attempt_seed, 4,
                                     config.final_derivative_draws, config)
        if not np.isfinite(deriv_final).all():
            raise DerivativeSingularityError(
                "moment derivative estimate contains non-finite entries"
            )
        moment_cov = np.cov(batch.T)
        dinv = _safe_inverse(deriv_final)
        param_cov = dinv @ moment_cov @ dinv.T
        se = np.sqrt(np.clip(np.diagonal(param_cov), 0.0, None))
        return theta, se, t_ratios, max_abs_t, sim_mean

    # A poor stochastic trajectory occasionally lands short of the root;
    # re-running the phases from the landed point usually repairs it.  A
    # badly diverged attempt is not worth polishing, so those restart the
    # exploration from the initial point instead.
    start = theta.copy()
    best = None
    explore = True
    for attempt in range(1 + max(0, config.restart_count)):
        attempt_seed = child_seed(seed, 50 + attempt)
        result = run_phases(theta, attempt_seed, explore=explore,
                            check_identification=(attempt == 0))
        if best is None or result[3] < best[3]:
            best = result
        if best[3] < config.converged_t:
            break
        explore = best[3] >= 2.0
        theta = start.copy() if explore else best[0]
    theta, se, t_ratios, max_abs_t, sim_mean = best

    converged = max_abs_t < config.converged_t
    if max_abs_t >= config.warn_t:
        warnings.warn(
            f"estimation did not converge: max |t-ratio| = {max_abs_t:.3f} "
            f"(threshold {config.warn_t})",
            NonConvergenceWarning,
            stacklevel=2,
        )
    rates, beta = sim.unpack(theta)
    model = SaomModel(specs, beta, tuple(float(r) for r in rates))
    return SaomFit(
        model=model,
        rate_standard_errors=se[:periods],
        beta_standard_errors=se[periods:],
        t_ratios=t_ratios,
        converged=converged,
        max_abs_t_ratio=max_abs_t,
        observed_moments=observed,
        simulated_moment_means=sim_mean,
        seed=seed,
    )


def _check_invertible(deriv):
    if not np.isfinite(deriv).all():
        raise DerivativeSingularityError(
            "moment derivative estimate contains non-finite entries"
        )
    if np.linalg.cond(deriv) > 1e12:
        raise DerivativeSingularityError(
            "moment derivative matrix is numerically singular; the model "
            "cannot be identified from these moments"
        )


def _safe_inverse(matrix):
    """Invert with a floored spectrum.

    Near-flat directions (a rate whose Hamming moment has saturated) get a
    huge, finite variance amplification instead of aborting the fit; the
    identified subspace is unaffected.
    """
    u, s, vt = np.linalg.svd(matrix)
    floor = s[0] * 1e-12
    s = np.maximum(s, floor)
    return vt.T @ np.diag(1.0 / s) @ u.T


def forward_predict(fit, last_observed: DirectedNetwork,
                    covariates: Covariates | None = None, draw_count: int = 1,
                    seed: int | None = None, previous=None, backend=None):
    """Independent one-period simulations from the last observed wave.

    ``fit`` is a SaomFit or a bare SaomModel.  Each draw runs
    ``simulate_period`` at the final period's fitted rate and returns its
    final network.
    """
    if draw_count < 1:
        raise ConfigurationError("draw_count must be >= 1")
    if seed is None:
        seed = fresh_seed()
    model = fit.model if isinstance(fit, SaomFit) else fit
    final_period = model.period_count - 1
    out = []
    for d in range(draw_count):
        trace = simulate_period(
            model, last_observed, period=final_period, covariates=covariates,
            previous=previous, backend=backend, rng=child_rng(seed, d),
        )
        out.append(trace.final_network)
    return out
