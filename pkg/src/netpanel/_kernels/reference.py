"""Pure-Python sampling kernels.

These mirror the compiled kernels operation for operation: both consume the
same pre-drawn uniform blocks, accumulate floating-point terms in the same
order, and call the C library ``exp`` (via ``math.exp``), so a run is
bit-identical across backends.  Keep the two files in sync.
"""

from __future__ import annotations

import math

import numpy as np

from ..statistics import (
    KERNEL_DYADIC,
    KERNEL_EDGES,
    KERNEL_INDEG_POP,
    KERNEL_OUTDEG_ACT,
    KERNEL_OUTDEG_POP,
    KERNEL_RECEIVER,
    KERNEL_RECIPROCITY,
    KERNEL_SENDER,
    KERNEL_THREE_CYCLES,
    KERNEL_TRANSITIVE_TIES,
    KERNEL_TRANSITIVE_TRIPLETS,
)


def _change_one(code, adj, adjf, vec, mat, i, j):
    """Global change statistic for toggling (i, j); independent of adj[i, j]."""
    n = adjf.shape[0]
    if code == KERNEL_EDGES:
        return 1.0
    if code == KERNEL_RECIPROCITY:
        return 2.0 * adjf[j, i]
    if code == KERNEL_TRANSITIVE_TRIPLETS:
        return float(adjf[i] @ adjf[j] + adjf[i] @ adjf[:, j] + adjf[:, i] @ adjf[:, j])
    if code == KERNEL_TRANSITIVE_TIES:
        tp_ij = 0
        for b in range(n):
            if adj[i, b] and adj[b, j]:
                tp_ij += 1
        acc = 1.0 if tp_ij > 0 else 0.0
        for k in range(n):
            if k == i or k == j:
                continue
            if adj[i, k] and adj[j, k]:
                c = 0
                for b in range(n):
                    if b != j and adj[i, b] and adj[b, k]:
                        c += 1
                if c == 0:
                    acc += 1.0
            if adj[k, j] and adj[k, i]:
                c = 0
                for b in range(n):
                    if b != i and adj[k, b] and adj[b, j]:
                        c += 1
                if c == 0:
                    acc += 1.0
        return acc
    if code == KERNEL_THREE_CYCLES:
        return 3.0 * float(adjf[j] @ adjf[:, i])
    if code == KERNEL_INDEG_POP:
        d = float(adjf[:, j].sum()) - adjf[i, j]
        return (d + 1.0) * math.sqrt(d + 1.0) - d * math.sqrt(d)
    if code == KERNEL_OUTDEG_POP:
        r = float(adjf[i].sum()) - adjf[i, j]
        cin = float(adjf[:, i].sum())
        return math.sqrt(float(adjf[j].sum())) + cin * (
            math.sqrt(r + 1.0) - math.sqrt(r)
        )
    if code == KERNEL_OUTDEG_ACT:
        r = float(adjf[i].sum()) - adjf[i, j]
        return (r + 1.0) * math.sqrt(r + 1.0) - r * math.sqrt(r)
    if code == KERNEL_SENDER:
        return vec[i]
    if code == KERNEL_RECEIVER:
        return vec[j]
    if code == KERNEL_DYADIC:
        return mat[i, j]
    raise AssertionError(code)


def mh_block(adj, codes, vectors, matrices, theta, u, step0, burn_in, thinning,
             draws, recorded, extreme, edges, lo, hi):
    """Advance a tie-toggle Metropolis chain by one block of proposals.

    ``adj`` is updated in place; recorded draws land in ``draws``.  Returns
    the updated (recorded, extreme, edges) counters.
    """
    n = adj.shape[0]
    npairs = n * (n - 1)
    k = codes.shape[0]
    adjf = adj.astype(np.float64)
    draw_cap = draws.shape[0]
    for s in range(u.shape[0]):
        dyad = int(u[s, 0] * npairs)
        if dyad >= npairs:
            dyad = npairs - 1
        i = dyad // (n - 1)
        r = dyad % (n - 1)
        j = r + 1 if r >= i else r
        total = 0.0
        for q in range(k):
            total += theta[q] * _change_one(
                codes[q], adj, adjf, vectors[q], matrices[q], i, j
            )
        logr = total if adj[i, j] == 0 else -total
        if logr >= 0.0 or u[s, 1] < math.exp(logr):
            if adj[i, j] == 0:
                adj[i, j] = 1
                adjf[i, j] = 1.0
                edges += 1
            else:
                adj[i, j] = 0
                adjf[i, j] = 0.0
                edges -= 1
        completed = step0 + s + 1
        if completed > burn_in:
            if edges < lo or edges > hi:
                extreme += 1
            if (completed - burn_in) % thinning == 0 and recorded < draw_cap:
                draws[recorded] = adj
                recorded += 1
    return recorded, extreme, edges


def _ego_change_all(code, adjf, vec, mat, i):
    """Per-alter egocentric change vector for one statistic."""
    n = adjf.shape[0]
    row = adjf[i]
    if code == KERNEL_EDGES:
        return np.ones(n)
    if code == KERNEL_RECIPROCITY:
        return adjf[:, i].copy()
    if code == KERNEL_TRANSITIVE_TRIPLETS:
        return adjf @ row + row @ adjf
    if code == KERNEL_TRANSITIVE_TIES:
        tp = row @ adjf
        w0 = row * (tp == 0.0)
        w1 = row * (tp == 1.0)
        return (tp >= 1.0).astype(np.float64) + (1.0 - row) * (adjf @ w0) + row * (
            adjf @ w1
        )
    if code == KERNEL_THREE_CYCLES:
        return adjf @ adjf[:, i]
    if code == KERNEL_INDEG_POP:
        return np.sqrt(adjf.sum(axis=0) - row + 1.0)
    if code == KERNEL_OUTDEG_POP:
        return np.sqrt(adjf.sum(axis=1))
    if code == KERNEL_OUTDEG_ACT:
        r = row.sum() - row
        return (r + 1.0) * np.sqrt(r + 1.0) - r * np.sqrt(r)
    if code == KERNEL_SENDER:
        return np.full(n, vec[i])
    if code == KERNEL_RECEIVER:
        return vec.copy()
    if code == KERNEL_DYADIC:
        return mat[i].copy()
    raise AssertionError(code)


def saom_block(adj, codes, vectors, matrices, beta, u, actors, targets,
               obj_scratch=None, cum_scratch=None, tp_scratch=None):
    """Run a block of actor mini-steps, mutating ``adj`` in place.

    Each row of ``u`` drives one opportunity: the first uniform picks the
    actor, the second picks among its n alternatives (n-1 toggles plus
    keeping the network as is) with probability proportional to the
    exponentiated objective difference.
    """
    n = adj.shape[0]
    k = codes.shape[0]
    adjf = adj.astype(np.float64)
    for s in range(u.shape[0]):
        i = int(u[s, 0] * n)
        if i >= n:
            i = n - 1
        obj = np.zeros(n)
        for q in range(k):
            obj += beta[q] * _ego_change_all(
                codes[q], adjf, vectors[q], matrices[q], i
            )
        np.negative(obj, where=adjf[i] == 1.0, out=obj)
        obj[i] = 0.0
        m = obj.max()
        w = np.array([math.exp(v - m) for v in obj])
        cum = np.cumsum(w)
        threshold = u[s, 1] * float(cum[-1])
        chosen = int(np.searchsorted(cum, threshold, side="right"))
        if chosen >= n:
            chosen = n - 1
        if chosen != i:
            val = 1 - adj[i, chosen]
            adj[i, chosen] = val
            adjf[i, chosen] = float(val)
        actors[s] = i
        targets[s] = chosen
    return None
