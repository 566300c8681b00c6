"""
Small instances with known answers, shared by checks and tests.
"""

from fractions import Fraction
from typing import List

import numpy as np

from apps.core.seeding import SeedLike, make_rng
from apps.linalg.datasets import PartitionedDataset

FIVE_BLOCK_FRACTIONS: List[Fraction] = [
    Fraction(3, 20), Fraction(3, 20), Fraction(4, 20), Fraction(5, 20), Fraction(5, 20),
]
FIVE_BLOCK_REPLICATION = (3, 3, 4, 5, 5)
FIVE_BLOCK_SERVERS = 20
FIVE_BLOCK_Q = 3
# responder multisets of the four worked iterations, 0-based block indices
FIVE_BLOCK_ROUNDS = ((0, 3, 4), (2, 4, 4), (1, 3, 4), (3, 0, 3))


def five_block_dataset(seed: SeedLike = 20) -> PartitionedDataset:
    """
    25 x 20 dataset with block leverage scores exactly (3, 3, 4, 5, 5) / 20.

    Block i starts with c_i distinct coordinate rows (c = FIVE_BLOCK_REPLICATION)
    followed by zero rows, so every coordinate row has leverage 1. Mixing the
    columns with a well-conditioned invertible matrix leaves the scores unchanged.
    """
    rng = make_rng(seed)
    K, tau = len(FIVE_BLOCK_REPLICATION), 5
    d = sum(FIVE_BLOCK_REPLICATION)
    E = np.zeros((K * tau, d))
    column = 0
    for block, count in enumerate(FIVE_BLOCK_REPLICATION):
        for offset in range(count):
            E[block * tau + offset, column] = 1.0
            column += 1
    Q, _ = np.linalg.qr(rng.standard_normal((d, d)))
    mixing = Q @ np.diag(np.linspace(1.0, 2.0, d))
    A = E @ mixing
    b = rng.standard_normal(K * tau)
    return PartitionedDataset(A=A, b=b, K=K, tau=tau)


def consistent_dataset(N: int, d: int, K: int, seed: SeedLike = 0) -> PartitionedDataset:
    """Gaussian instance with b in span(A)"""
    rng = make_rng(seed)
    A = rng.standard_normal((N, d))
    b = A @ rng.standard_normal(d)
    return PartitionedDataset(A=A, b=b, K=K, tau=N // K)
