"""Network statistics in global, change, and egocentric (actor) form.

Every statistic kind is available three ways:

* ``global_value``: h(N), the whole-network count used by pooled estimation
  and method-of-moments targets.
* ``change_matrix`` / ``change_value``: h(N with tie i->j) minus
  h(N without), all other entries fixed.  Closed forms, never a full
  recomputation.
* ``egocentric_value`` / ``egocentric_change``: the actor-level h_i(N) that
  actor-oriented choice probabilities are built from, and its change when
  the actor toggles one of its outgoing ties.

Memory kinds compare the current network against a previous wave; covariate
kinds reference named vertex or dyad attributes.  ``covariate_match``
resolves its name against dyad covariates first (the attribute is already a
dyadic score), otherwise it builds an equality indicator from the vertex
covariate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .network import Covariates, DirectedNetwork, check_dyad

MEMORY_KINDS = (
    "memory_stability",
    "memory_autoregression",
    "memory_innovation",
    "memory_loss",
    "delayed_reciprocity",
)
VERTEX_COVARIATE_KINDS = ("covariate_sender", "covariate_receiver")
STRUCTURAL_KINDS = (
    "edges",
    "reciprocity",
    "transitive_triplets",
    "transitive_ties",
    "three_cycles",
    "indegree_popularity_sqrt",
    "outdegree_popularity_sqrt",
    "outdegree_activity_1_5",
)
KINDS = STRUCTURAL_KINDS + VERTEX_COVARIATE_KINDS + ("covariate_match",) + MEMORY_KINDS


@dataclass(frozen=True)
class StatisticSpec:
    """One term of a model: a statistic kind plus its configuration.

    ``covariate`` names the attribute for covariate kinds.  ``lag`` is how
    many waves back a memory kind looks (default 1); structural and
    covariate kinds carry lag 0.
    """

    kind: str
    covariate: str | None = None
    lag: int | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigurationError(
                f"unknown statistic kind {self.kind!r}; valid kinds: "
                + ", ".join(KINDS)
            )
        needs_cov = self.kind in VERTEX_COVARIATE_KINDS or self.kind == "covariate_match"
        if needs_cov and not self.covariate:
            raise ConfigurationError(
                f"statistic {self.kind!r} requires a covariate name"
            )
        if not needs_cov and self.covariate is not None:
            raise ConfigurationError(
                f"statistic {self.kind!r} does not take a covariate"
            )
        if self.kind in MEMORY_KINDS:
            lag = 1 if self.lag is None else self.lag
            if not isinstance(lag, int) or lag < 1:
                raise ConfigurationError(
                    f"statistic {self.kind!r} needs an integer lag >= 1"
                )
        else:
            lag = 0 if self.lag is None else self.lag
            if lag != 0:
                raise ConfigurationError(
                    f"statistic {self.kind!r} does not look back; lag must be 0"
                )
        object.__setattr__(self, "lag", lag)

    @property
    def name(self) -> str:
        if self.covariate is not None:
            return f"{self.kind}:{self.covariate}"
        if self.kind in MEMORY_KINDS and self.lag != 1:
            return f"{self.kind}@{self.lag}"
        return self.kind

    def to_dict(self) -> dict:
        out = {"kind": self.kind}
        if self.covariate is not None:
            out["covariate"] = self.covariate
        if self.kind in MEMORY_KINDS and self.lag != 1:
            out["lag"] = self.lag
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "StatisticSpec":
        if not isinstance(data, dict) or "kind" not in data:
            raise ConfigurationError(
                f"a statistic entry must be an object with a 'kind', got {data!r}"
            )
        extra = set(data) - {"kind", "covariate", "lag"}
        if extra:
            raise ConfigurationError(
                f"unknown statistic fields {sorted(extra)} in {data!r}"
            )
        return cls(data["kind"], data.get("covariate"), data.get("lag"))


def _resolve_previous(spec: StatisticSpec, previous):
    """Pick the wave ``spec.lag`` steps back from ``previous``.

    ``previous`` is a single network (lag-1 history) or a most-recent-first
    sequence of networks.
    """
    if spec.kind not in MEMORY_KINDS:
        return None
    if previous is None:
        raise ConfigurationError(
            f"statistic {spec.name!r} requires a previous wave but none was given"
        )
    if isinstance(previous, DirectedNetwork):
        history = (previous,)
    else:
        history = tuple(previous)
    if spec.lag > len(history):
        raise ConfigurationError(
            f"statistic {spec.name!r} looks back {spec.lag} waves but only "
            f"{len(history)} are available"
        )
    return history[spec.lag - 1].adjacency.astype(np.float64)


def _vertex_vector(spec: StatisticSpec, covariates: Covariates | None) -> np.ndarray:
    if covariates is None or spec.covariate not in covariates.vertex:
        have = sorted(covariates.vertex) if covariates else []
        raise ConfigurationError(
            f"statistic {spec.name!r} references vertex covariate "
            f"{spec.covariate!r}; available: {have}"
        )
    return np.asarray(covariates.vertex[spec.covariate], dtype=np.float64)


def match_matrix(spec: StatisticSpec, covariates: Covariates | None, n: int) -> np.ndarray:
    """Dyadic score for a match statistic.

    Prefers a dyad covariate of the given name; otherwise an equality
    indicator built from the vertex covariate.
    """
    if covariates is not None:
        if spec.covariate in covariates.dyad:
            return np.asarray(covariates.dyad[spec.covariate], dtype=np.float64)
        if spec.covariate in covariates.vertex:
            x = np.asarray(covariates.vertex[spec.covariate])
            eq = (x[:, None] == x[None, :]).astype(np.float64)
            np.fill_diagonal(eq, 0.0)
            return eq
    have_d = sorted(covariates.dyad) if covariates else []
    have_v = sorted(covariates.vertex) if covariates else []
    raise ConfigurationError(
        f"statistic {spec.name!r} references covariate {spec.covariate!r}; "
        f"available dyad covariates: {have_d}, vertex covariates: {have_v}"
    )


def _inputs(spec, network, previous, covariates):
    adj = network.adjacency.astype(np.float64)
    prev = _resolve_previous(spec, previous)
    vec = mat = None
    if spec.kind in VERTEX_COVARIATE_KINDS:
        vec = _vertex_vector(spec, covariates)
        if vec.shape[0] != network.n:
            raise ConfigurationError(
                f"covariate {spec.covariate!r} has length {vec.shape[0]}, "
                f"expected {network.n}"
            )
    elif spec.kind == "covariate_match":
        mat = match_matrix(spec, covariates, network.n)
        if mat.shape != (network.n, network.n):
            raise ConfigurationError(
                f"covariate {spec.covariate!r} has shape {mat.shape}, "
                f"expected {(network.n, network.n)}"
            )
    return adj, prev, vec, mat


def _memory_change(kind: str, prev: np.ndarray) -> np.ndarray:
    """Change matrix of a memory statistic; depends only on the earlier wave."""
    if kind == "memory_stability":
        return 2.0 * prev - 1.0
    if kind == "memory_autoregression":
        return prev.copy()
    if kind == "memory_innovation":
        return 1.0 - prev
    if kind == "memory_loss":
        return -prev
    if kind == "delayed_reciprocity":
        return prev.T.copy()
    raise AssertionError(kind)


def _offdiag_sum(m: np.ndarray) -> float:
    return float(m.sum() - np.diagonal(m).sum())


# ---------------------------------------------------------------------------
# global values


def _global(kind, adj, prev, vec, mat):
    n = adj.shape[0]
    if kind == "edges":
        return adj.sum()
    if kind == "reciprocity":
        # ordered-pair count: each mutual dyad contributes twice
        return (adj * adj.T).sum()
    if kind == "transitive_triplets":
        return ((adj.T @ adj) * adj).sum()
    if kind == "transitive_ties":
        return (adj * ((adj @ adj) >= 1.0)).sum()
    if kind == "three_cycles":
        return ((adj @ adj) * adj.T).sum()
    if kind == "indegree_popularity_sqrt":
        indeg = adj.sum(axis=0)
        return (indeg * np.sqrt(indeg)).sum()
    if kind == "outdegree_popularity_sqrt":
        return (adj.sum(axis=0) * np.sqrt(adj.sum(axis=1))).sum()
    if kind == "outdegree_activity_1_5":
        outdeg = adj.sum(axis=1)
        return (outdeg * np.sqrt(outdeg)).sum()
    if kind == "covariate_sender":
        return (adj.sum(axis=1) * vec).sum()
    if kind == "covariate_receiver":
        return (adj.sum(axis=0) * vec).sum()
    if kind == "covariate_match":
        return _offdiag_sum(adj * mat)
    if kind == "memory_stability":
        npairs = n * (n - 1)
        return (adj * (2.0 * prev - 1.0)).sum() + npairs - prev.sum()
    if kind == "memory_autoregression":
        return (adj * prev).sum()
    if kind == "memory_innovation":
        return (adj * (1.0 - prev)).sum()
    if kind == "memory_loss":
        return _offdiag_sum((1.0 - adj) * prev)
    if kind == "delayed_reciprocity":
        return (adj * prev.T).sum()
    raise AssertionError(kind)


# ---------------------------------------------------------------------------
# change matrices (entry (i, j): statistic with tie i->j minus without)


def _sqrt_step(d: np.ndarray) -> np.ndarray:
    """(d+1)^1.5 - d^1.5 elementwise, d >= 0."""
    return (d + 1.0) * np.sqrt(d + 1.0) - d * np.sqrt(d)


def _change(kind, adj, prev, vec, mat):
    n = adj.shape[0]
    if kind == "edges":
        out = np.ones((n, n))
    elif kind == "reciprocity":
        out = 2.0 * adj.T
    elif kind == "transitive_triplets":
        out = adj @ adj.T + adj @ adj + adj.T @ adj
    elif kind == "transitive_ties":
        tp = adj @ adj
        none = (tp == 0.0).astype(np.float64)
        one = (tp == 1.0).astype(np.float64)
        gained_out0 = (adj * none) @ adj.T
        gained_out1 = (adj * one) @ adj.T
        gained_in0 = adj.T @ (adj * none)
        gained_in1 = adj.T @ (adj * one)
        direct = (tp >= 1.0).astype(np.float64)
        out = (
            direct
            + (1.0 - adj) * (gained_out0 + gained_in0)
            + adj * (gained_out1 + gained_in1)
        )
    elif kind == "three_cycles":
        out = 3.0 * (adj @ adj).T
    elif kind == "indegree_popularity_sqrt":
        below = adj.sum(axis=0)[None, :] - adj
        out = _sqrt_step(below)
    elif kind == "outdegree_popularity_sqrt":
        below = adj.sum(axis=1)[:, None] - adj
        indeg = adj.sum(axis=0)
        out = np.sqrt(adj.sum(axis=1))[None, :] + indeg[:, None] * (
            np.sqrt(below + 1.0) - np.sqrt(below)
        )
    elif kind == "outdegree_activity_1_5":
        below = adj.sum(axis=1)[:, None] - adj
        out = _sqrt_step(below)
    elif kind == "covariate_sender":
        out = np.broadcast_to(vec[:, None], (n, n)).copy()
    elif kind == "covariate_receiver":
        out = np.broadcast_to(vec[None, :], (n, n)).copy()
    elif kind == "covariate_match":
        out = mat.copy()
    elif kind in MEMORY_KINDS:
        out = _memory_change(kind, prev)
    else:
        raise AssertionError(kind)
    np.fill_diagonal(out, 0.0)
    return out


# ---------------------------------------------------------------------------
# egocentric values and per-alter egocentric changes


def _ego(kind, adj, prev, vec, mat, i):
    row = adj[i]
    if kind == "edges":
        return row.sum()
    if kind == "reciprocity":
        # mutual ties of the actor, each counted once
        return (row * adj[:, i]).sum()
    if kind == "transitive_triplets":
        return row @ (adj @ row)
    if kind == "transitive_ties":
        return (row * ((row @ adj) >= 1.0)).sum()
    if kind == "three_cycles":
        return row @ (adj @ adj[:, i])
    if kind == "indegree_popularity_sqrt":
        return row @ np.sqrt(adj.sum(axis=0))
    if kind == "outdegree_popularity_sqrt":
        return row @ np.sqrt(adj.sum(axis=1))
    if kind == "outdegree_activity_1_5":
        s = row.sum()
        return s * np.sqrt(s)
    if kind == "covariate_sender":
        return row.sum() * vec[i]
    if kind == "covariate_receiver":
        return row @ vec
    if kind == "covariate_match":
        return row @ mat[i]
    if kind == "memory_stability":
        n = adj.shape[0]
        return (row * (2.0 * prev[i] - 1.0)).sum() + (n - 1) - prev[i].sum()
    if kind == "memory_autoregression":
        return row @ prev[i]
    if kind == "memory_innovation":
        return row @ (1.0 - prev[i])
    if kind == "memory_loss":
        return (1.0 - row) @ prev[i]
    if kind == "delayed_reciprocity":
        return row @ prev[:, i]
    raise AssertionError(kind)


def _ego_change(kind, adj, prev, vec, mat, i):
    n = adj.shape[0]
    row = adj[i]
    if kind == "edges":
        out = np.ones(n)
    elif kind == "reciprocity":
        out = adj[:, i].copy()
    elif kind == "transitive_triplets":
        out = adj @ row + row @ adj
    elif kind == "transitive_ties":
        tp = row @ adj
        w0 = row * (tp == 0.0)
        w1 = row * (tp == 1.0)
        out = (tp >= 1.0) + (1.0 - row) * (adj @ w0) + row * (adj @ w1)
    elif kind == "three_cycles":
        out = adj @ adj[:, i]
    elif kind == "indegree_popularity_sqrt":
        out = np.sqrt(adj.sum(axis=0) - row + 1.0)
    elif kind == "outdegree_popularity_sqrt":
        out = np.sqrt(adj.sum(axis=1))
    elif kind == "outdegree_activity_1_5":
        r = row.sum() - row
        out = (r + 1.0) * np.sqrt(r + 1.0) - r * np.sqrt(r)
    elif kind == "covariate_sender":
        out = np.full(n, vec[i])
    elif kind == "covariate_receiver":
        out = vec.copy()
    elif kind == "covariate_match":
        out = mat[i].copy()
    elif kind in MEMORY_KINDS:
        out = _memory_change(kind, prev)[i].copy()
    else:
        raise AssertionError(kind)
    out[i] = 0.0
    return out


# ---------------------------------------------------------------------------
# public entry points


def global_value(spec: StatisticSpec, network: DirectedNetwork, previous=None,
                 covariates: Covariates | None = None) -> float:
    """Whole-network value h(N) of one statistic."""
    adj, prev, vec, mat = _inputs(spec, network, previous, covariates)
    return float(_global(spec.kind, adj, prev, vec, mat))


def change_matrix(spec: StatisticSpec, network: DirectedNetwork, previous=None,
                  covariates: Covariates | None = None) -> np.ndarray:
    """All n x n change values at once; the diagonal is zeroed."""
    adj, prev, vec, mat = _inputs(spec, network, previous, covariates)
    return _change(spec.kind, adj, prev, vec, mat)


def change_value(spec: StatisticSpec, network: DirectedNetwork, i: int, j: int,
                 previous=None, covariates: Covariates | None = None) -> float:
    """h(N with tie i->j) - h(N without it), all other ties fixed."""
    check_dyad(network.n, i, j)
    return float(change_matrix(spec, network, previous, covariates)[i, j])


def egocentric_value(spec: StatisticSpec, network: DirectedNetwork, actor: int,
                     previous=None, covariates: Covariates | None = None) -> float:
    """Actor-level value h_i(N) seen from ``actor``'s perspective."""
    n = network.n
    if not 0 <= actor < n:
        raise ConfigurationError(f"actor {actor} out of range for n={n}")
    adj, prev, vec, mat = _inputs(spec, network, previous, covariates)
    return float(_ego(spec.kind, adj, prev, vec, mat, actor))


def egocentric_change(spec: StatisticSpec, network: DirectedNetwork, actor: int,
                      previous=None, covariates: Covariates | None = None) -> np.ndarray:
    """Per-alter change of h_i when ``actor`` toggles its tie to each j.

    Entry j holds h_i(with tie actor->j) - h_i(without); entry for
    j == actor is 0.
    """
    n = network.n
    if not 0 <= actor < n:
        raise ConfigurationError(f"actor {actor} out of range for n={n}")
    adj, prev, vec, mat = _inputs(spec, network, previous, covariates)
    return _ego_change(spec.kind, adj, prev, vec, mat, actor)


# ---------------------------------------------------------------------------
# compilation for the sampling kernels

KERNEL_EDGES = 0
KERNEL_RECIPROCITY = 1
KERNEL_TRANSITIVE_TRIPLETS = 2
KERNEL_TRANSITIVE_TIES = 3
KERNEL_THREE_CYCLES = 4
KERNEL_INDEG_POP = 5
KERNEL_OUTDEG_POP = 6
KERNEL_OUTDEG_ACT = 7
KERNEL_SENDER = 8
KERNEL_RECEIVER = 9
KERNEL_DYADIC = 10

_KERNEL_CODES = {
    "edges": KERNEL_EDGES,
    "reciprocity": KERNEL_RECIPROCITY,
    "transitive_triplets": KERNEL_TRANSITIVE_TRIPLETS,
    "transitive_ties": KERNEL_TRANSITIVE_TIES,
    "three_cycles": KERNEL_THREE_CYCLES,
    "indegree_popularity_sqrt": KERNEL_INDEG_POP,
    "outdegree_popularity_sqrt": KERNEL_OUTDEG_POP,
    "outdegree_activity_1_5": KERNEL_OUTDEG_ACT,
    "covariate_sender": KERNEL_SENDER,
    "covariate_receiver": KERNEL_RECEIVER,
}


@dataclass(frozen=True)
class CompiledStatistics:
    """A model's statistics lowered to flat arrays for the sampling kernels.

    Memory terms depend only on fixed earlier waves during a simulation, so
    they compile to plain dyadic-score terms alongside covariate matches.
    """

    codes: np.ndarray      # (k,) int32 kernel opcodes
    vectors: np.ndarray    # (k, n) per-vertex data for sender/receiver terms
    matrices: np.ndarray   # (k, n, n) dyadic data for match/memory terms
    names: tuple

    @property
    def k(self) -> int:
        return self.codes.shape[0]


def compile_statistics(specs, n: int, covariates: Covariates | None = None,
                       previous=None) -> CompiledStatistics:
    """Lower statistic specs to kernel arrays for a fixed history/covariates."""
    specs = tuple(specs)
    k = len(specs)
    codes = np.zeros(k, dtype=np.int32)
    vectors = np.zeros((k, n), dtype=np.float64)
    matrices = np.zeros((k, n, n), dtype=np.float64)
    for q, spec in enumerate(specs):
        if spec.kind in MEMORY_KINDS:
            prev = _resolve_previous(spec, previous)
            codes[q] = KERNEL_DYADIC
            m = _memory_change(spec.kind, prev)
            np.fill_diagonal(m, 0.0)
            matrices[q] = m
        elif spec.kind == "covariate_match":
            codes[q] = KERNEL_DYADIC
            m = match_matrix(spec, covariates, n).copy()
            np.fill_diagonal(m, 0.0)
            matrices[q] = m
        elif spec.kind in VERTEX_COVARIATE_KINDS:
            codes[q] = _KERNEL_CODES[spec.kind]
            vectors[q] = _vertex_vector(spec, covariates)
        else:
            codes[q] = _KERNEL_CODES[spec.kind]
    return CompiledStatistics(
        codes=codes,
        vectors=vectors,
        matrices=matrices,
        names=tuple(s.name for s in specs),
    )
