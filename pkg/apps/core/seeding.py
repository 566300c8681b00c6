"""
Seed handling shared by every simulator app.

Generators are always passed explicitly. A master seed is split into
independent per-trial streams by trial index.
"""

from typing import List, Union

import numpy as np

SeedLike = Union[None, int, np.random.SeedSequence, np.random.Generator]


def make_rng(seed: SeedLike = None) -> np.random.Generator:
    """Return a Generator for ``seed`` (an existing Generator is passed through)."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def split_seeds(master_seed: int, count: int) -> List[np.random.SeedSequence]:
    """Deterministic child seed sequences, one per trial index."""
    if count < 0:
        raise ValueError(f"count must be non-negative, got {count}")
    return np.random.SeedSequence(master_seed).spawn(count)


def trial_rngs(master_seed: int, count: int) -> List[np.random.Generator]:
    return [np.random.default_rng(child) for child in split_seeds(master_seed, count)]


def keyed_rng(master_seed: int, *key: int) -> np.random.Generator:
    """Stream for a (trial, arm, ...) key; independent of how many other keys are drawn."""
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=tuple(int(k) for k in key)))
