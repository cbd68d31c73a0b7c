"""Seed handling.

Independent streams for cells and replicates are derived from one master
seed with ``SeedSequence`` spawn keys, so stream k is the same no matter
how many other streams exist or in which order they are created.
"""

from __future__ import annotations

import numpy as np


def as_seed_sequence(seed) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return seed
    if isinstance(seed, np.random.Generator):
        raise TypeError("pass an integer seed or SeedSequence, not a Generator")
    return np.random.SeedSequence(seed)


def make_rng(seed) -> np.random.Generator:
    """Generator from an integer seed, SeedSequence, or existing Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(as_seed_sequence(seed))


def subseed(seed, *key: int) -> np.random.SeedSequence:
    """Child seed for stream ``key`` (e.g. a cell index or replicate number)."""
    base = as_seed_sequence(seed)
    return np.random.SeedSequence(
        entropy=base.entropy, spawn_key=base.spawn_key + tuple(int(k) for k in key)
    )


def subrng(seed, *key: int) -> np.random.Generator:
    return np.random.default_rng(subseed(seed, *key))
