"""Seed plumbing: one master seed, deterministic children per task."""

from __future__ import annotations

import numpy as np


def fresh_seed() -> int:
    """An entropy-derived seed suitable for recording in reports."""
    return int(np.random.SeedSequence().generate_state(1)[0])


def child_rng(seed: int | None, *path: int) -> np.random.Generator:
    """Generator for the task at ``path`` in the seed tree rooted at ``seed``.

    Distinct paths yield independent streams; the same (seed, path) always
    yields the same stream.
    """
    if seed is None:
        return np.random.default_rng()
    if path:
        return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=path))
    return np.random.default_rng(np.random.SeedSequence(seed))


def child_seed(seed: int, *path: int) -> int:
    """Integer seed for the task at ``path``, for APIs that take plain seeds."""
    return int(np.random.SeedSequence(seed, spawn_key=path).generate_state(1)[0])
