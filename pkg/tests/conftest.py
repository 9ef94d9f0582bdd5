"""Shared builders for the test suite."""

import numpy as np

from netpanel.network import Covariates, DirectedNetwork

ACCEPTANCE_LINES = []


def record_acceptance(number: int, passed: bool, detail: str,
                      word: str | None = None) -> bool:
    """Store one acceptance verdict for the end-of-run summary."""
    word = word or ("PASS" if passed else "FAIL")
    ACCEPTANCE_LINES.append((number, f"[acceptance {number:2d}] {word} - {detail}"))
    return passed


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(line)


def net_from_edges(n, edges, labels=None):
    """Network from 1-based (sender, receiver) pairs."""
    adj = np.zeros((n, n), dtype=np.int8)
    for i, j in edges:
        adj[i - 1, j - 1] = 1
    return DirectedNetwork(adj, labels)


def random_network(rng, n, p=0.3):
    adj = (rng.random((n, n)) < p).astype(np.int8)
    np.fill_diagonal(adj, 0)
    return DirectedNetwork(adj)


def random_covariates(rng, n):
    return Covariates(
        vertex={
            "attr": rng.normal(size=n),
            "group": rng.integers(0, 2, size=n).astype(float),
        },
        dyad={"closeness": rng.normal(size=(n, n))},
    )
