"""Predictive evaluation: dyad classification curves and auxiliary-statistic fit.

A fitted model's simulations in lieu of a held-out wave become per-dyad tie
probabilities (ensemble edge frequencies).  Classification quality is
summarized by ROC and precision-recall curves with trapezoid AUCs; structural
quality by comparing auxiliary statistic distributions (degrees, shared
partners, geodesics) between draws and target.
"""

from __future__ import annotations

import math
from collections import namedtuple
from dataclasses import dataclass

import numpy as np
from scipy.stats import t as t_distribution

from .errors import ConfigurationError, UndefinedCurveError, UndefinedTestError
from .network import (
    DirectedNetwork,
    degree_distributions,
    geodesic_distribution,
    shared_partner_distributions,
)

AUXILIARY_KINDS = ("indegree", "outdegree", "edgewise_sp", "dyadwise_sp", "geodesic")


class PredictionEnsemble:
    """A held-out target wave plus the simulations standing in for it."""

    __slots__ = ("target", "draws", "tie_probabilities")

    def __init__(self, target: DirectedNetwork, draws):
        draws = tuple(draws)
        if not draws:
            raise ConfigurationError("an ensemble needs at least one draw")
        for d in draws:
            if d.labels != target.labels:
                raise ConfigurationError(
                    "draws must share the target's vertex set"
                )
        stack = np.stack([d.adjacency for d in draws]).astype(np.float64)
        probs = stack.mean(axis=0)
        np.fill_diagonal(probs, 0.0)
        probs.setflags(write=False)
        object.__setattr__(self, "target", target)
        object.__setattr__(self, "draws", draws)
        object.__setattr__(self, "tie_probabilities", probs)

    def __setattr__(self, name, value):
        raise AttributeError("PredictionEnsemble is immutable")

    @property
    def n(self) -> int:
        return self.target.n

    def scores_and_labels(self):
        """Off-diagonal tie probabilities and target tie states, flattened."""
        mask = ~np.eye(self.n, dtype=bool)
        return self.tie_probabilities[mask], self.target.adjacency[mask]


@dataclass(frozen=True)
class CurveResult:
    """An ROC or PR curve: ordered points plus the trapezoid area."""

    kind: str
    points: tuple
    auc: float


def _grouped_counts(scores, labels):
    """Cumulative positives/negatives per distinct-score threshold group."""
    order = np.argsort(-scores, kind="stable")
    s = scores[order]
    y = labels[order].astype(np.float64)
    boundaries = np.flatnonzero(np.diff(s)) + 1
    groups = np.split(np.arange(s.shape[0]), boundaries)
    tp = np.cumsum([y[g].sum() for g in groups])
    counts = np.cumsum([g.shape[0] for g in groups])
    fp = counts - tp
    return tp, fp


def _validate_curve(labels, kind):
    pos = int((labels == 1).sum())
    neg = int(labels.shape[0] - pos)
    if pos == 0 or neg == 0:
        raise UndefinedCurveError(
            f"{kind} curve is undefined: target has {pos} positive and "
            f"{neg} negative dyads"
        )
    return pos, neg


def roc_curve(ensemble: PredictionEnsemble) -> CurveResult:
    """True-positive rate against false-positive rate over score thresholds.

    Equal scores are grouped into single threshold steps, so ties produce
    diagonal segments and the trapezoid area gives them half credit.
    """
    scores, labels = ensemble.scores_and_labels()
    pos, neg = _validate_curve(labels, "roc")
    tp, fp = _grouped_counts(scores, labels)
    xs = np.concatenate([[0.0], fp / neg])
    ys = np.concatenate([[0.0], tp / pos])
    auc = float(np.trapezoid(ys, xs))
    points = tuple(zip(xs.tolist(), ys.tolist()))
    return CurveResult(kind="roc", points=points, auc=auc)


def pr_curve(ensemble: PredictionEnsemble) -> CurveResult:
    """Precision against recall over score thresholds.

    The sweep starts at recall 0 with the first group's precision and ends
    at recall 1 (every dyad predicted positive).
    """
    scores, labels = ensemble.scores_and_labels()
    pos, _ = _validate_curve(labels, "pr")
    tp, fp = _grouped_counts(scores, labels)
    recall = tp / pos
    precision = tp / (tp + fp)
    xs = np.concatenate([[0.0], recall])
    ys = np.concatenate([[precision[0]], precision])
    auc = float(np.trapezoid(ys, xs))
    points = tuple(zip(xs.tolist(), ys.tolist()))
    return CurveResult(kind="pr", points=points, auc=auc)


@dataclass(frozen=True)
class GofTable:
    """Auxiliary-statistic comparison between draws and target.

    ``draw_values`` has one row per draw, one column per bin; ``medians``
    are the per-bin draw medians the comparison metrics use.
    """

    kind: str
    bins: tuple
    target: np.ndarray
    draw_values: np.ndarray
    medians: np.ndarray


def _bins_for(kind: str, n: int, include_unreachable: bool):
    if kind in ("indegree", "outdegree"):
        return tuple(range(n))
    if kind in ("edgewise_sp", "dyadwise_sp"):
        return tuple(range(n - 1))
    if kind == "geodesic":
        bins = list(range(1, n))
        if include_unreachable:
            bins.append(math.inf)
        return tuple(bins)
    raise ConfigurationError(
        f"unknown auxiliary statistic kind {kind!r}; valid: "
        + ", ".join(AUXILIARY_KINDS)
    )


def _histogram_vector(network: DirectedNetwork, kind: str, bins) -> np.ndarray:
    if kind == "indegree":
        counts = degree_distributions(network)[0]
    elif kind == "outdegree":
        counts = degree_distributions(network)[1]
    elif kind == "edgewise_sp":
        counts = shared_partner_distributions(network)[0]
    elif kind == "dyadwise_sp":
        counts = shared_partner_distributions(network)[1]
    else:
        counts = geodesic_distribution(network).counts
    return np.array([float(counts.get(b, 0)) for b in bins])


def auxiliary_gof(ensemble: PredictionEnsemble, statistic_kind: str,
                  include_unreachable: bool = True) -> GofTable:
    """Per-bin draw distributions of one auxiliary statistic, plus the target.

    For the geodesic kind, ``include_unreachable`` appends an infinity bin
    counting unreachable ordered pairs.
    """
    bins = _bins_for(statistic_kind, ensemble.n, include_unreachable)
    target = _histogram_vector(ensemble.target, statistic_kind, bins)
    draw_values = np.array([
        _histogram_vector(d, statistic_kind, bins) for d in ensemble.draws
    ])
    medians = np.median(draw_values, axis=0)
    return GofTable(
        kind=statistic_kind,
        bins=bins,
        target=target,
        draw_values=draw_values,
        medians=medians,
    )


def diff_auc(tergm_aucs, saom_aucs) -> float:
    """Mean paired AUC difference (positive favors the first list)."""
    a = np.asarray(tergm_aucs, dtype=np.float64)
    b = np.asarray(saom_aucs, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ConfigurationError(
            f"paired AUC lists must have equal length, got {a.shape} and {b.shape}"
        )
    if a.size == 0:
        raise ConfigurationError("paired AUC lists are empty")
    return float(np.mean(a - b))


def diff_endogenous(target_values, tergm_medians, saom_medians) -> float:
    """Mean of |tergm - target| - |saom - target|.

    Positive values mean the second model's medians track the target more
    closely; negative values favor the first.
    """
    a = np.asarray(target_values, dtype=np.float64)
    b = np.asarray(tergm_medians, dtype=np.float64)
    c = np.asarray(saom_medians, dtype=np.float64)
    if not (a.shape == b.shape == c.shape) or a.ndim != 1:
        raise ConfigurationError(
            "target, first-model, and second-model vectors must have equal "
            f"length, got {a.shape}, {b.shape}, {c.shape}"
        )
    if a.size == 0:
        raise ConfigurationError("diff_endogenous needs at least one bin")
    return float(np.mean(np.abs(b - a) - np.abs(c - a)))


TestResult = namedtuple("TestResult", ["t", "df", "p"])


def two_sample_t(x, y) -> TestResult:
    """Welch's unequal-variance two-sample t test (two-sided p)."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.size < 2 or y.size < 2:
        raise ConfigurationError(
            f"each sample needs at least 2 values, got {x.size} and {y.size}"
        )
    vx = float(x.var(ddof=1))
    vy = float(y.var(ddof=1))
    if vx == 0.0 and vy == 0.0:
        raise UndefinedTestError(
            "both samples have zero variance; the t statistic is undefined"
        )
    se2x = vx / x.size
    se2y = vy / y.size
    t = (float(x.mean()) - float(y.mean())) / math.sqrt(se2x + se2y)
    df = (se2x + se2y) ** 2 / (
        se2x ** 2 / (x.size - 1) + se2y ** 2 / (y.size - 1)
    )
    p = 2.0 * float(t_distribution.sf(abs(t), df))
    return TestResult(t=float(t), df=float(df), p=p)


def one_sided_p(result: TestResult) -> float:
    """P-value for the one-sided alternative mean(x) > mean(y)."""
    return float(t_distribution.sf(result.t, result.df))
