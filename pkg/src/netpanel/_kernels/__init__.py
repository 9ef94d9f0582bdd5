"""Sampling kernels with backend selection.

The compiled extension is used when present; otherwise (or when
``NETPANEL_FORCE_PYTHON_KERNELS`` is set to a non-empty value other than
``0``) the pure-Python reference implementation takes over.  Both backends
consume identical uniform streams and produce identical output for the same
seed.
"""

from __future__ import annotations

import os

import numpy as np

from ..errors import ConfigurationError
from . import reference

try:
    from . import _speed
except ImportError:  # pragma: no cover - depends on the build environment
    _speed = None

_FORCED_PYTHON = os.environ.get("NETPANEL_FORCE_PYTHON_KERNELS", "") not in ("", "0")

BACKEND_NAME = "compiled" if (_speed is not None and not _FORCED_PYTHON) else "python"

_CHUNK = 1 << 20


def available_backends():
    names = ["python"]
    if _speed is not None:
        names.insert(0, "compiled")
    return tuple(names)


def _resolve(backend):
    if backend is None:
        backend = BACKEND_NAME
    if backend == "python":
        return reference
    if backend == "compiled":
        if _speed is None:
            raise ConfigurationError(
                "compiled kernels are not available in this installation"
            )
        return _speed
    raise ConfigurationError(
        f"unknown kernel backend {backend!r}; expected 'compiled' or 'python'"
    )


def mh_chain(adjacency, compiled, theta, burn_in, thinning, draw_count, rng,
             backend=None):
    """Run a tie-toggle Metropolis chain and collect thinned draws.

    Returns ``(draws, extreme_fraction)`` where draws has shape
    (draw_count, n, n) and extreme_fraction is the share of post-burn-in
    steps spent below density 0.01 or above 0.99.
    """
    impl = _resolve(backend)
    adj = np.array(adjacency, dtype=np.int8, order="C")
    n = adj.shape[0]
    draws = np.zeros((draw_count, n, n), dtype=np.int8)
    theta = np.ascontiguousarray(theta, dtype=np.float64)
    total = burn_in + draw_count * thinning
    npairs = n * (n - 1)
    lo = 0.01 * npairs
    hi = 0.99 * npairs
    recorded = 0
    extreme = 0
    edges = int(adj.sum())
    done = 0
    while done < total:
        m = min(_CHUNK, total - done)
        u = rng.random((m, 2))
        recorded, extreme, edges = impl.mh_block(
            adj, compiled.codes, compiled.vectors, compiled.matrices, theta,
            u, done, burn_in, thinning, draws, recorded, extreme, edges, lo, hi,
        )
        done += m
    post = total - burn_in
    fraction = extreme / post if post > 0 else 0.0
    return draws, fraction


def saom_period(adjacency, compiled, beta, opportunity_count, rng, backend=None):
    """Run ``opportunity_count`` actor mini-steps from a starting network.

    Returns ``(adj, actors, targets)``: the final adjacency plus the acting
    vertex and chosen alternative per mini-step (target == actor means the
    actor kept the network unchanged).
    """
    impl = _resolve(backend)
    adj = np.array(adjacency, dtype=np.int8, order="C")
    n = adj.shape[0]
    beta = np.ascontiguousarray(beta, dtype=np.float64)
    actors = np.empty(opportunity_count, dtype=np.int64)
    targets = np.empty(opportunity_count, dtype=np.int64)
    scratch_obj = np.empty(n, dtype=np.float64)
    scratch_cum = np.empty(n, dtype=np.float64)
    scratch_tp = np.zeros(n, dtype=np.int64)
    done = 0
    while done < opportunity_count:
        m = min(_CHUNK, opportunity_count - done)
        u = rng.random((m, 2))
        impl.saom_block(
            adj, compiled.codes, compiled.vectors, compiled.matrices,
            beta, u, actors[done:done + m], targets[done:done + m],
            scratch_obj, scratch_cum, scratch_tp,
        )
        done += m
    return adj, actors, targets
