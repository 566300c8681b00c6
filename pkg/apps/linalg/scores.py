"""
Row and block leverage scores.

Row score pi_i = ||U_(i)||^2 / d; block score Pi_l sums the row scores of
block l, which is the squared Frobenius norm of the block of U over d.
"""

import logging
from dataclasses import dataclass
from typing import Union

import numpy as np

from apps.core.exceptions import DistributionError
from apps.linalg.bases import OrthonormalBasis
from apps.linalg.datasets import PartitionedDataset

logger = logging.getLogger(__name__)

SUM_TOLERANCE = 1e-12
DISTRIBUTION_KINDS = ('exact', 'approximate', 'induced', 'uniform')

BlockLayout = Union[PartitionedDataset, int]


@dataclass(frozen=True, eq=False)
class SamplingDistribution:
    """Probabilities over the K blocks"""
    p: np.ndarray
    kind: str = 'exact'

    def __post_init__(self):
        p = np.array(self.p, dtype=np.float64, copy=True).reshape(-1)
        if self.kind not in DISTRIBUTION_KINDS:
            raise DistributionError(f"unknown distribution kind '{self.kind}'")
        if p.size == 0:
            raise DistributionError("distribution needs at least one block")
        if not np.all(np.isfinite(p)) or np.any(p < 0):
            raise DistributionError("probabilities must be finite and non-negative")
        total = float(np.sum(p))
        if abs(total - 1.0) > SUM_TOLERANCE:
            raise DistributionError(f"probabilities sum to {total!r}, not 1")
        p.setflags(write=False)
        object.__setattr__(self, 'p', p)

    @classmethod
    def uniform(cls, K: int) -> 'SamplingDistribution':
        return cls(np.full(K, 1.0 / K), kind='uniform')

    @classmethod
    def normalized(cls, weights, kind: str = 'approximate') -> 'SamplingDistribution':
        """Renormalize non-negative weights into a distribution"""
        weights = np.asarray(weights, dtype=np.float64)
        total = float(np.sum(weights))
        if total <= 0:
            raise DistributionError("weights must have a positive sum")
        return cls(weights / total, kind=kind)

    @property
    def K(self) -> int:
        return self.p.shape[0]

    def misestimation_factor(self, reference: 'SamplingDistribution') -> float:
        """beta = min_i reference_i / self_i over the support of self (0 if reference mass is unreachable)."""
        _check_same_length(self, reference)
        if np.any((self.p == 0) & (reference.p > 0)):
            return 0.0
        support = self.p > 0
        return float(np.min(reference.p[support] / self.p[support]))

    def additive_error(self, reference: 'SamplingDistribution') -> float:
        _check_same_length(self, reference)
        return float(np.max(np.abs(self.p - reference.p)))


def _check_same_length(first: SamplingDistribution, second: SamplingDistribution):
    if first.K != second.K:
        raise DistributionError(f"length mismatch: {first.K} vs {second.K} blocks")


def _block_count(rows: int, layout: BlockLayout) -> int:
    K = layout.K if isinstance(layout, PartitionedDataset) else int(layout)
    if K < 1 or rows % K != 0:
        raise DistributionError(f"{rows} rows cannot be split into {K} equal blocks")
    return K


def row_leverage_scores(basis: OrthonormalBasis) -> np.ndarray:
    return np.sum(basis.U ** 2, axis=1) / basis.d


def frobenius_block_scores(M: np.ndarray, layout: BlockLayout) -> np.ndarray:
    """Unnormalized ||M_block||_F^2 for each of the K row blocks of M."""
    M = np.atleast_2d(np.asarray(M, dtype=np.float64))
    K = _block_count(M.shape[0], layout)
    return np.sum(M.reshape(K, -1) ** 2, axis=1)


def block_leverage_scores(basis: OrthonormalBasis, layout: BlockLayout) -> SamplingDistribution:
    """Normalized block leverage scores; ``layout`` is the dataset or the block count K."""
    scores = frobenius_block_scores(basis.U, layout) / basis.d
    # sums to 1 up to rounding
    return SamplingDistribution(scores / np.sum(scores), kind='exact')
