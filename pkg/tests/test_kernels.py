"""Backend parity: compiled and reference kernels must agree bit for bit."""

import os
import subprocess
import sys

import numpy as np
import pytest

from conftest import random_covariates, random_network
from netpanel import _kernels
from netpanel.errors import ConfigurationError
from netpanel.statistics import StatisticSpec, compile_statistics

needs_compiled = pytest.mark.skipif(
    "compiled" not in _kernels.available_backends(),
    reason="compiled kernels are not built",
)

STRUCTURAL = (
    "edges",
    "reciprocity",
    "transitive_triplets",
    "transitive_ties",
    "three_cycles",
    "indegree_popularity_sqrt",
    "outdegree_popularity_sqrt",
    "outdegree_activity_1_5",
)


def _full_model(rng, n):
    """Every kernel opcode: structural, vertex-covariate, and dyadic terms."""
    specs = [StatisticSpec(k) for k in STRUCTURAL]
    specs.append(StatisticSpec("covariate_sender", covariate="attr"))
    specs.append(StatisticSpec("covariate_receiver", covariate="attr"))
    specs.append(StatisticSpec("covariate_match", covariate="group"))
    specs.append(StatisticSpec("memory_stability"))
    cov = random_covariates(rng, n)
    history = (random_network(rng, n),)
    compiled = compile_statistics(tuple(specs), n, cov, history)
    theta = rng.uniform(-0.8, 0.8, size=len(specs))
    return compiled, theta


def test_backend_listing_and_resolution():
    assert "python" in _kernels.available_backends()
    with pytest.raises(ConfigurationError):
        _kernels._resolve("fortran")


def test_env_override_forces_python_backend():
    env = dict(os.environ, NETPANEL_FORCE_PYTHON_KERNELS="1")
    out = subprocess.run(
        [sys.executable, "-c",
         "from netpanel import _kernels; print(_kernels.BACKEND_NAME)"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == "python"


@needs_compiled
def test_mh_chain_backend_parity():
    rng = np.random.default_rng(90)
    n = 12
    compiled, theta = _full_model(rng, n)
    start = random_network(rng, n)
    args = (start.adjacency, compiled, theta, 700, 37, 5)
    draws_c, frac_c = _kernels.mh_chain(*args, np.random.default_rng(17),
                                        backend="compiled")
    draws_p, frac_p = _kernels.mh_chain(*args, np.random.default_rng(17),
                                        backend="python")
    assert np.array_equal(draws_c, draws_p)
    assert frac_c == frac_p


@needs_compiled
def test_saom_period_backend_parity():
    rng = np.random.default_rng(91)
    n = 10
    compiled, theta = _full_model(rng, n)
    start = random_network(rng, n)
    out_c = _kernels.saom_period(start.adjacency, compiled, theta, 400,
                                 np.random.default_rng(23), backend="compiled")
    out_p = _kernels.saom_period(start.adjacency, compiled, theta, 400,
                                 np.random.default_rng(23), backend="python")
    for a, b in zip(out_c, out_p):
        assert np.array_equal(a, b)


def test_mh_chain_chunking_is_invisible(monkeypatch):
    # uniform consumption must not depend on the chunk size
    rng = np.random.default_rng(92)
    n = 8
    compiled, theta = _full_model(rng, n)
    start = random_network(rng, n)
    args = (start.adjacency, compiled, theta, 150, 11, 7)
    whole, frac_whole = _kernels.mh_chain(*args, np.random.default_rng(3))
    monkeypatch.setattr(_kernels, "_CHUNK", 13)
    pieces, frac_pieces = _kernels.mh_chain(*args, np.random.default_rng(3))
    assert np.array_equal(whole, pieces)
    assert frac_whole == frac_pieces


def test_saom_period_chunking_is_invisible(monkeypatch):
    rng = np.random.default_rng(93)
    n = 8
    compiled, theta = _full_model(rng, n)
    start = random_network(rng, n)
    whole = _kernels.saom_period(start.adjacency, compiled, theta, 203,
                                 np.random.default_rng(5))
    monkeypatch.setattr(_kernels, "_CHUNK", 17)
    pieces = _kernels.saom_period(start.adjacency, compiled, theta, 203,
                                  np.random.default_rng(5))
    for a, b in zip(whole, pieces):
        assert np.array_equal(a, b)


def test_same_seed_same_output():
    rng = np.random.default_rng(94)
    n = 9
    compiled, theta = _full_model(rng, n)
    start = random_network(rng, n)
    a, fa = _kernels.mh_chain(start.adjacency, compiled, theta, 200, 9, 4,
                              np.random.default_rng(41))
    b, fb = _kernels.mh_chain(start.adjacency, compiled, theta, 200, 9, 4,
                              np.random.default_rng(41))
    assert np.array_equal(a, b)
    assert fa == fb
