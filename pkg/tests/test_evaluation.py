"""Predictive scoring: ensembles, ROC/PR curves, gof tables, comparisons."""

import math

import numpy as np
import pytest
from scipy.stats import t as t_distribution

from netpanel.errors import (
    ConfigurationError,
    UndefinedCurveError,
    UndefinedTestError,
)
from netpanel.evaluation import (
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
from netpanel.network import (
    DirectedNetwork,
    degree_distributions,
    geodesic_distribution,
    shared_partner_distributions,
)

from conftest import net_from_edges, random_network


def ensemble_from_scores(target, counts, draw_count):
    """Ensemble whose tie probabilities equal counts / draw_count.

    Draw t carries tie (i, j) exactly when t < counts[i, j], so the
    ensemble mean recovers the requested score matrix.
    """
    counts = np.asarray(counts)
    n = target.n
    draws = []
    for t in range(draw_count):
        adj = (counts > t).astype(np.int8)
        np.fill_diagonal(adj, 0)
        draws.append(DirectedNetwork(adj, target.labels))
    return PredictionEnsemble(target, draws)


def auc_by_pairs(scores, labels):
    """Concordant-pair AUC: ties between a positive and a negative score
    get half credit."""
    pos = [s for s, y in zip(scores, labels) if y == 1]
    neg = [s for s, y in zip(scores, labels) if y == 0]
    credit = 0.0
    for p in pos:
        for q in neg:
            if p > q:
                credit += 1.0
            elif p == q:
                credit += 0.5
    return credit / (len(pos) * len(neg))


class TestPredictionEnsemble:
    def test_tie_probabilities_are_draw_means(self):
        target = net_from_edges(3, [(1, 2)])
        draws = [
            net_from_edges(3, [(1, 2), (2, 3)]),
            net_from_edges(3, [(1, 2)]),
            net_from_edges(3, [(3, 1), (2, 3)]),
        ]
        ens = PredictionEnsemble(target, draws)
        expected = (
            draws[0].adjacency + draws[1].adjacency + draws[2].adjacency
        ) / 3.0
        assert np.array_equal(ens.tie_probabilities, expected)
        assert ens.n == 3

    def test_diagonal_zeroed(self):
        rng = np.random.default_rng(0)
        target = random_network(rng, 5)
        ens = PredictionEnsemble(target, [random_network(rng, 5)])
        assert np.all(np.diag(ens.tie_probabilities) == 0.0)

    def test_scores_and_labels_shapes(self):
        rng = np.random.default_rng(3)
        target = random_network(rng, 6)
        ens = PredictionEnsemble(target, [random_network(rng, 6)])
        scores, labels = ens.scores_and_labels()
        assert scores.shape == (30,)
        assert labels.shape == (30,)

    def test_requires_a_draw(self):
        target = net_from_edges(3, [(1, 2)])
        with pytest.raises(ConfigurationError):
            PredictionEnsemble(target, [])

    def test_rejects_label_mismatch(self):
        target = net_from_edges(3, [(1, 2)], labels=["a", "b", "c"])
        draw = net_from_edges(3, [(1, 2)])
        with pytest.raises(ConfigurationError):
            PredictionEnsemble(target, [draw])

    def test_immutable(self):
        target = net_from_edges(3, [(1, 2)])
        ens = PredictionEnsemble(target, [target])
        with pytest.raises(AttributeError):
            ens.target = target
        with pytest.raises(ValueError):
            ens.tie_probabilities[0, 1] = 0.7


class TestRocCurve:
    def test_perfect_ranking_scores_one(self):
        target = net_from_edges(3, [(1, 2), (2, 1)])
        counts = np.array([[0, 9, 3], [8, 0, 2], [1, 0, 0]])
        ens = ensemble_from_scores(target, counts, 10)
        assert roc_curve(ens).auc == pytest.approx(1.0, abs=1e-12)
        assert pr_curve(ens).auc == pytest.approx(1.0, abs=1e-12)

    def test_tied_scores_get_half_credit(self):
        # positives score 0.9 and 0.3; negatives 0.8, 0.8, 0.1, 0.1.
        # Concordant pairs: 4 + 2 of 8, no cross ties, so auc = 0.75.
        target = net_from_edges(3, [(1, 2), (2, 1)])
        counts = np.array([[0, 9, 8], [3, 0, 8], [1, 1, 0]])
        ens = ensemble_from_scores(target, counts, 10)
        assert roc_curve(ens).auc == pytest.approx(0.75, abs=1e-12)

    def test_constant_scores_score_half(self):
        target = net_from_edges(3, [(1, 2), (2, 1)])
        full = np.ones((3, 3), dtype=np.int8)
        np.fill_diagonal(full, 0)
        ens = PredictionEnsemble(
            target,
            [DirectedNetwork(full), DirectedNetwork(np.zeros((3, 3)))],
        )
        curve = roc_curve(ens)
        assert curve.auc == pytest.approx(0.5, abs=1e-12)
        # a single threshold group: the curve is the diagonal
        assert curve.points == ((0.0, 0.0), (1.0, 1.0))

    def test_curve_starts_at_origin_and_ends_at_one_one(self):
        rng = np.random.default_rng(7)
        target = random_network(rng, 6)
        counts = rng.integers(0, 6, size=(6, 6))
        ens = ensemble_from_scores(target, counts, 5)
        pts = roc_curve(ens).points
        assert pts[0] == (0.0, 0.0)
        assert pts[-1] == (1.0, 1.0)

    def test_matches_pairwise_credit_on_random_ensembles(self):
        rng = np.random.default_rng(11)
        checked = 0
        while checked < 200:
            n = int(rng.integers(3, 7))
            m = int(rng.integers(1, 7))
            target = random_network(rng, n, p=float(rng.uniform(0.1, 0.9)))
            if target.edge_count in (0, n * (n - 1)):
                continue
            counts = rng.integers(0, m + 1, size=(n, n))
            ens = ensemble_from_scores(target, counts, m)
            scores, labels = ens.scores_and_labels()
            expected = auc_by_pairs(scores.tolist(), labels.tolist())
            assert roc_curve(ens).auc == pytest.approx(expected, abs=1e-12)
            checked += 1

    def test_invariant_under_monotone_score_transform(self):
        # squaring the draw counts preserves the ranking exactly
        rng = np.random.default_rng(23)
        for _ in range(20):
            n = int(rng.integers(3, 7))
            target = random_network(rng, n)
            if target.edge_count in (0, n * (n - 1)):
                continue
            counts = rng.integers(0, 11, size=(n, n))
            base = ensemble_from_scores(target, counts, 10)
            squared = ensemble_from_scores(target, counts**2, 100)
            assert roc_curve(base).points == roc_curve(squared).points
            assert roc_curve(base).auc == roc_curve(squared).auc
            assert pr_curve(base).points == pr_curve(squared).points

    def test_undefined_without_both_classes(self):
        full = np.ones((3, 3), dtype=np.int8)
        np.fill_diagonal(full, 0)
        all_pos = DirectedNetwork(full)
        all_neg = DirectedNetwork(np.zeros((3, 3)))
        draw = [net_from_edges(3, [(1, 2)])]
        with pytest.raises(UndefinedCurveError):
            roc_curve(PredictionEnsemble(all_pos, draw))
        with pytest.raises(UndefinedCurveError):
            roc_curve(PredictionEnsemble(all_neg, draw))
        with pytest.raises(UndefinedCurveError):
            pr_curve(PredictionEnsemble(all_neg, draw))


class TestPrCurve:
    def test_ends_at_full_recall(self):
        rng = np.random.default_rng(41)
        for _ in range(10):
            n = int(rng.integers(3, 8))
            target = random_network(rng, n)
            if target.edge_count in (0, n * (n - 1)):
                continue
            counts = rng.integers(0, 5, size=(n, n))
            pts = pr_curve(ensemble_from_scores(target, counts, 4)).points
            assert pts[-1][0] == 1.0
            assert pts[0][0] == 0.0
            assert pts[0][1] == pts[1][1]

    def test_constant_scores_give_prevalence(self):
        target = net_from_edges(3, [(1, 2), (2, 1)])
        full = np.ones((3, 3), dtype=np.int8)
        np.fill_diagonal(full, 0)
        ens = PredictionEnsemble(
            target,
            [DirectedNetwork(full), DirectedNetwork(np.zeros((3, 3)))],
        )
        assert pr_curve(ens).auc == pytest.approx(2 / 6, abs=1e-12)

    def test_perfect_ranking_keeps_precision_one_until_full_recall(self):
        target = net_from_edges(4, [(1, 2), (2, 3), (3, 4)])
        counts = np.zeros((4, 4), dtype=int)
        counts[0, 1], counts[1, 2], counts[2, 3] = 10, 9, 8
        ens = ensemble_from_scores(target, counts, 10)
        curve = pr_curve(ens)
        for recall, precision in curve.points:
            if recall <= 1.0 and precision < 1.0:
                assert recall == 1.0


class TestAuxiliaryGof:
    def test_draws_equal_target_match_all_kinds(self):
        rng = np.random.default_rng(5)
        target = random_network(rng, 7)
        ens = PredictionEnsemble(target, [target] * 4)
        for kind in AUXILIARY_KINDS:
            table = auxiliary_gof(ens, kind)
            assert np.array_equal(table.medians, table.target), kind

    def test_complete_target_empty_draws(self):
        full = np.ones((3, 3), dtype=np.int8)
        np.fill_diagonal(full, 0)
        target = DirectedNetwork(full)
        empty = DirectedNetwork(np.zeros((3, 3)))
        ens = PredictionEnsemble(target, [empty] * 100)
        table = auxiliary_gof(ens, "indegree")
        assert table.bins == (0, 1, 2)
        assert table.target.tolist() == [0.0, 0.0, 3.0]
        assert table.medians.tolist() == [3.0, 0.0, 0.0]
        assert table.draw_values.shape == (100, 3)

    def test_bins_by_kind(self):
        rng = np.random.default_rng(9)
        target = random_network(rng, 6)
        ens = PredictionEnsemble(target, [random_network(rng, 6)])
        assert auxiliary_gof(ens, "indegree").bins == tuple(range(6))
        assert auxiliary_gof(ens, "outdegree").bins == tuple(range(6))
        assert auxiliary_gof(ens, "edgewise_sp").bins == tuple(range(5))
        assert auxiliary_gof(ens, "dyadwise_sp").bins == tuple(range(5))
        geo = auxiliary_gof(ens, "geodesic")
        assert geo.bins == (1, 2, 3, 4, 5, math.inf)
        finite = auxiliary_gof(ens, "geodesic", include_unreachable=False)
        assert finite.bins == (1, 2, 3, 4, 5)

    def test_values_match_direct_recomputation(self):
        rng = np.random.default_rng(13)
        target = random_network(rng, 8)
        draws = [random_network(rng, 8) for _ in range(6)]
        ens = PredictionEnsemble(target, draws)

        def histogram(net, kind, bins):
            if kind == "indegree":
                counts = degree_distributions(net)[0]
            elif kind == "outdegree":
                counts = degree_distributions(net)[1]
            elif kind == "edgewise_sp":
                counts = shared_partner_distributions(net)[0]
            elif kind == "dyadwise_sp":
                counts = shared_partner_distributions(net)[1]
            else:
                counts = geodesic_distribution(net).counts
            return [float(counts.get(b, 0)) for b in bins]

        for kind in AUXILIARY_KINDS:
            table = auxiliary_gof(ens, kind)
            assert table.target.tolist() == histogram(target, kind, table.bins)
            for row, draw in zip(table.draw_values, draws):
                assert row.tolist() == histogram(draw, kind, table.bins)
            assert np.array_equal(
                table.medians, np.median(table.draw_values, axis=0)
            )

    def test_unknown_kind_rejected(self):
        target = net_from_edges(3, [(1, 2)])
        ens = PredictionEnsemble(target, [target])
        with pytest.raises(ConfigurationError, match="triangle_census"):
            auxiliary_gof(ens, "triangle_census")


class TestDiffAuc:
    def test_mean_paired_difference(self):
        assert diff_auc([0.8, 0.8, 0.8], [0.7, 0.7, 0.7]) == pytest.approx(0.1)
        assert diff_auc([0.9, 0.5], [0.6, 0.6]) == pytest.approx(0.1)
        assert diff_auc([0.6, 0.7], [0.6, 0.7]) == 0.0

    def test_antisymmetric(self):
        rng = np.random.default_rng(2)
        a = rng.uniform(0.4, 1.0, size=9)
        b = rng.uniform(0.4, 1.0, size=9)
        assert diff_auc(a, b) == pytest.approx(-diff_auc(b, a), abs=1e-15)

    def test_rejects_mismatch_and_empty(self):
        with pytest.raises(ConfigurationError):
            diff_auc([0.5, 0.6], [0.5])
        with pytest.raises(ConfigurationError):
            diff_auc([], [])


class TestDiffEndogenous:
    def test_sign_favors_the_closer_model(self):
        target = [4.0, 4.0, 4.0]
        assert diff_endogenous(target, [6.0] * 3, [3.0] * 3) == pytest.approx(
            1.0
        )
        # first model on target, second off: negative favors the first
        assert diff_endogenous(target, target, [3.0] * 3) < 0
        assert diff_endogenous(target, [5.0] * 3, [5.0] * 3) == 0.0

    def test_rejects_mismatch_and_empty(self):
        with pytest.raises(ConfigurationError):
            diff_endogenous([1.0], [1.0, 2.0], [1.0])
        with pytest.raises(ConfigurationError):
            diff_endogenous([], [], [])


class TestWelch:
    def test_known_example(self):
        result = two_sample_t([1, 2, 3, 4, 5], [2, 3, 4, 5, 6])
        assert result.t == pytest.approx(-1.0, abs=1e-12)
        assert result.df == pytest.approx(8.0, abs=1e-12)
        assert result.p == pytest.approx(
            2 * t_distribution.sf(1.0, 8.0), abs=1e-12
        )

    def test_identical_samples(self):
        result = two_sample_t([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])
        assert result.t == 0.0
        assert result.p == pytest.approx(1.0)

    def test_separated_samples_are_significant(self):
        rng = np.random.default_rng(17)
        x = rng.normal(0.0, 0.01, size=10)
        y = rng.normal(1.0, 0.01, size=10)
        assert two_sample_t(x, y).p < 1e-3

    def test_zero_variance_undefined(self):
        with pytest.raises(UndefinedTestError):
            two_sample_t([1.0, 1.0, 1.0], [2.0, 2.0])

    def test_small_samples_rejected(self):
        with pytest.raises(ConfigurationError):
            two_sample_t([1.0], [2.0, 3.0])
        with pytest.raises(ConfigurationError):
            two_sample_t([1.0, 2.0], [3.0])

    def test_one_sided_p(self):
        result = two_sample_t([1, 2, 3, 4, 5], [2, 3, 4, 5, 6])
        assert one_sided_p(result) == pytest.approx(
            float(t_distribution.sf(-1.0, 8.0)), abs=1e-12
        )
        flipped = two_sample_t([2, 3, 4, 5, 6], [1, 2, 3, 4, 5])
        assert one_sided_p(result) + one_sided_p(flipped) == pytest.approx(1.0)
        # the one-sided p halves the two-sided p on the favored side
        assert one_sided_p(flipped) == pytest.approx(flipped.p / 2)
