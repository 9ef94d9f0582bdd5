"""Directed binary networks, panels of repeated observations, and graph summaries."""

from __future__ import annotations

import math
from collections import Counter, deque
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidDyadError, InvalidNetworkError


def _validated_adjacency(adjacency) -> np.ndarray:
    arr = np.asarray(adjacency)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise InvalidNetworkError(
            f"adjacency must be a square matrix, got shape {arr.shape}"
        )
    if arr.dtype == bool:
        arr = arr.astype(np.int8)
    if not np.issubdtype(arr.dtype, np.number):
        raise InvalidNetworkError("adjacency entries must be numeric 0/1")
    if not np.isin(arr, (0, 1)).all():
        raise InvalidNetworkError("adjacency entries must be 0 or 1")
    if np.diagonal(arr).any():
        raise InvalidNetworkError("self-ties are not allowed (nonzero diagonal)")
    out = np.ascontiguousarray(arr, dtype=np.int8)
    out.setflags(write=False)
    return out


class DirectedNetwork:
    """An immutable directed binary network on n labeled vertices.

    Vertices are identified positionally; ``labels`` carries external
    identifiers (defaults to 1..n).
    """

    __slots__ = ("adjacency", "labels")

    def __init__(self, adjacency, labels=None):
        adj = _validated_adjacency(adjacency)
        n = adj.shape[0]
        if labels is None:
            labels = tuple(range(1, n + 1))
        else:
            labels = tuple(labels)
            if len(labels) != n:
                raise InvalidNetworkError(
                    f"expected {n} labels, got {len(labels)}"
                )
            if len(set(labels)) != n:
                raise InvalidNetworkError("vertex labels must be distinct")
        object.__setattr__(self, "adjacency", adj)
        object.__setattr__(self, "labels", labels)

    def __setattr__(self, name, value):
        raise AttributeError("DirectedNetwork is immutable")

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]

    @property
    def edge_count(self) -> int:
        return int(self.adjacency.sum())

    def has_edge(self, i: int, j: int) -> bool:
        check_dyad(self.n, i, j)
        return bool(self.adjacency[i, j])

    def toggled(self, i: int, j: int) -> "DirectedNetwork":
        """Return a copy with the (i, j) entry flipped."""
        check_dyad(self.n, i, j)
        adj = np.array(self.adjacency)
        adj[i, j] = 1 - adj[i, j]
        return DirectedNetwork(adj, self.labels)

    def __eq__(self, other):
        if not isinstance(other, DirectedNetwork):
            return NotImplemented
        return self.labels == other.labels and np.array_equal(
            self.adjacency, other.adjacency
        )

    def __hash__(self):
        return hash((self.labels, self.adjacency.tobytes()))

    def __repr__(self):
        return f"DirectedNetwork(n={self.n}, edges={self.edge_count})"


def check_dyad(n: int, i: int, j: int) -> None:
    if not (0 <= i < n and 0 <= j < n):
        raise InvalidDyadError(f"dyad ({i}, {j}) out of range for n={n}")
    if i == j:
        raise InvalidDyadError(f"dyad ({i}, {i}) lies on the diagonal")


@dataclass(frozen=True)
class Covariates:
    """Named vertex attributes (length-n vectors) and dyad attributes (n x n)."""

    vertex: dict = field(default_factory=dict)
    dyad: dict = field(default_factory=dict)

    def validate(self, n: int) -> None:
        for name, values in self.vertex.items():
            arr = np.asarray(values, dtype=float)
            if arr.shape != (n,):
                raise InvalidNetworkError(
                    f"vertex covariate {name!r} must have shape ({n},), "
                    f"got {arr.shape}"
                )
            if not np.isfinite(arr).all():
                raise InvalidNetworkError(
                    f"vertex covariate {name!r} contains non-finite values"
                )
        for name, values in self.dyad.items():
            arr = np.asarray(values, dtype=float)
            if arr.shape != (n, n):
                raise InvalidNetworkError(
                    f"dyad covariate {name!r} must have shape ({n}, {n}), "
                    f"got {arr.shape}"
                )
            if not np.isfinite(arr).all():
                raise InvalidNetworkError(
                    f"dyad covariate {name!r} contains non-finite values"
                )


class NetworkPanel:
    """An ordered sequence of T >= 2 waves on a fixed vertex set.

    Covariates are constant across waves.
    """

    __slots__ = ("waves", "covariates")

    def __init__(self, waves, covariates: Covariates | None = None):
        waves = tuple(waves)
        if len(waves) < 2:
            raise InvalidNetworkError(
                f"a panel needs at least 2 waves, got {len(waves)}"
            )
        first = waves[0]
        for t, wave in enumerate(waves):
            if not isinstance(wave, DirectedNetwork):
                raise InvalidNetworkError(f"wave {t} is not a DirectedNetwork")
            if wave.labels != first.labels:
                raise InvalidNetworkError(
                    f"wave {t} has a different vertex set than wave 0"
                )
        covariates = covariates or Covariates()
        covariates.validate(first.n)
        object.__setattr__(self, "waves", waves)
        object.__setattr__(self, "covariates", covariates)

    def __setattr__(self, name, value):
        raise AttributeError("NetworkPanel is immutable")

    @property
    def n(self) -> int:
        return self.waves[0].n

    @property
    def wave_count(self) -> int:
        return len(self.waves)

    @property
    def labels(self):
        return self.waves[0].labels

    def subpanel(self, stop: int) -> "NetworkPanel":
        """The panel restricted to the first ``stop`` waves."""
        return NetworkPanel(self.waves[:stop], self.covariates)

    def __repr__(self):
        return f"NetworkPanel(n={self.n}, waves={self.wave_count})"


@dataclass(frozen=True)
class GeodesicDistribution:
    """Histogram of directed shortest-path lengths over ordered pairs.

    Keys are path lengths (ints), plus ``math.inf`` for unreachable pairs.
    Values sum to n(n-1).
    """

    counts: dict

    @property
    def reachable_pairs(self) -> int:
        return sum(v for k, v in self.counts.items() if k != math.inf)

    @property
    def unreachable_pairs(self) -> int:
        return self.counts.get(math.inf, 0)


def density(network: DirectedNetwork) -> float:
    """Fraction of the n(n-1) ordered dyads that carry a tie."""
    n = network.n
    if n < 2:
        raise InvalidNetworkError("density is undefined for n < 2")
    return network.edge_count / (n * (n - 1))


def geodesic_distribution(network: DirectedNetwork) -> GeodesicDistribution:
    """Breadth-first shortest directed path lengths, histogrammed."""
    n = network.n
    adj = network.adjacency
    neighbors = [np.flatnonzero(adj[v]) for v in range(n)]
    counts: Counter = Counter()
    for source in range(n):
        dist = np.full(n, -1, dtype=np.int64)
        dist[source] = 0
        queue = deque([source])
        while queue:
            v = queue.popleft()
            for w in neighbors[v]:
                if dist[w] < 0:
                    dist[w] = dist[v] + 1
                    queue.append(w)
        for v in range(n):
            if v == source:
                continue
            if dist[v] < 0:
                counts[math.inf] += 1
            else:
                counts[int(dist[v])] += 1
    return GeodesicDistribution(dict(counts))


def degree_distributions(network: DirectedNetwork):
    """(indegree histogram, outdegree histogram) as {degree: vertex count}."""
    adj = network.adjacency
    indeg = adj.sum(axis=0)
    outdeg = adj.sum(axis=1)
    return (
        dict(Counter(int(d) for d in indeg)),
        dict(Counter(int(d) for d in outdeg)),
    )


def shared_partner_distributions(network: DirectedNetwork):
    """Directed shared-partner histograms.

    A shared partner of the ordered dyad (i, j) is a vertex k with both
    i -> k and k -> j present.  Returns (edgewise, dyadwise): edgewise counts
    dyads that carry a tie, dyadwise counts all ordered dyads.
    """
    adj = network.adjacency.astype(np.int64)
    n = network.n
    two_paths = adj @ adj
    off = ~np.eye(n, dtype=bool)
    dyadwise = dict(Counter(int(c) for c in two_paths[off]))
    tie_mask = (network.adjacency == 1) & off
    edgewise = dict(Counter(int(c) for c in two_paths[tie_mask]))
    return edgewise, dyadwise
