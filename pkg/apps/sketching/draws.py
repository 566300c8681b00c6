"""
Block Leverage Score Sketching Engine
=====================================

Block sampling sketches stored as draws (block indices plus rescale factors),
never as dense r x N matrices.

Features:
- i.i.d. block sampling with replacement from a block distribution
- duplicate-collapsed weighted draws with identical Gram and gradient
- sketched data, Gram matrices and gradients computed blockwise
- measured subspace-embedding error ||I - U^T S^T S U||_2
- expected number of distinct sampled blocks
- controlled misestimation of a distribution (random or deflating the heaviest blocks)
"""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np

from apps.core.exceptions import DistributionError, SketchDimensionError
from apps.linalg.bases import OrthonormalBasis
from apps.linalg.datasets import PartitionedDataset
from apps.linalg.scores import SamplingDistribution
from apps.linalg.spectral import symmetric_spectral_norm

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class SketchDraw:
    """Ordered multiset of q sampled blocks with scales 1/sqrt(q * p_i)"""
    sampled: np.ndarray
    scales: np.ndarray
    source: SamplingDistribution

    @classmethod
    def from_indices(cls, sampled, source: SamplingDistribution) -> 'SketchDraw':
        sampled = np.asarray(sampled, dtype=np.int64).reshape(-1)
        if sampled.size == 0:
            raise SketchDimensionError("a sketch needs at least one sampled block")
        if np.any(sampled < 0) or np.any(sampled >= source.K):
            raise IndexError(f"sampled blocks must lie in [0, {source.K})")
        probabilities = source.p[sampled]
        if np.any(probabilities <= 0):
            raise DistributionError("sampled a block with zero probability")
        scales = 1.0 / np.sqrt(sampled.size * probabilities)
        return cls(sampled=sampled, scales=scales, source=source)

    @property
    def q(self) -> int:
        return int(self.sampled.shape[0])

    @property
    def blocks(self) -> np.ndarray:
        return self.sampled

    def dimension(self, tau: int) -> int:
        return self.q * tau


@dataclass(frozen=True, eq=False)
class WeightedSketchDraw:
    """Distinct sampled blocks with multiplicities w and scales sqrt(w / (q * p_i))"""
    distinct: np.ndarray
    weights: np.ndarray
    scales: np.ndarray
    q: int
    source: SamplingDistribution

    @property
    def q_bar(self) -> int:
        return int(self.distinct.shape[0])

    @property
    def compression_ratio(self) -> float:
        return self.q / self.q_bar

    @property
    def blocks(self) -> np.ndarray:
        return self.distinct

    def dimension(self, tau: int) -> int:
        return self.q_bar * tau


AnyDraw = Union[SketchDraw, WeightedSketchDraw]


def sample_blocks(p: np.ndarray, size, rng: np.random.Generator) -> np.ndarray:
    """Categorical draws by inverse CDF on the prefix sums of p."""
    p = np.asarray(p, dtype=np.float64)
    cdf = np.cumsum(p)
    cdf[-1] = 1.0
    last_supported = int(np.flatnonzero(p > 0)[-1])
    indices = np.searchsorted(cdf, rng.random(size), side='right')
    return np.minimum(indices, last_supported).astype(np.int64)


def draw_sketch(dist: SamplingDistribution, q: int, rng: np.random.Generator,
                ds: Optional[PartitionedDataset] = None,
                reference: Optional[SamplingDistribution] = None) -> SketchDraw:
    """
    Sample q blocks with replacement from ``dist``.

    With ``ds`` the embedding condition q * tau > d is enforced; with
    ``reference`` (the exact scores) a zero in ``dist`` where the reference is
    positive is rejected.
    """
    if q < 1:
        raise SketchDimensionError(f"q must be a positive integer, got {q}")
    if ds is not None:
        if ds.K != dist.K:
            raise DistributionError(f"distribution has {dist.K} blocks but dataset has {ds.K}")
        if q * ds.tau <= ds.d:
            raise SketchDimensionError(f"sketch dimension q*tau={q * ds.tau} must exceed d={ds.d}")
    if reference is not None and np.any((dist.p == 0) & (reference.p > 0)):
        raise DistributionError("sampling distribution misses blocks with positive leverage")
    return SketchDraw.from_indices(sample_blocks(dist.p, q, rng), dist)


def _sketched_rows(draw: AnyDraw, rows: np.ndarray, K: int) -> np.ndarray:
    blocks = rows.reshape((K, -1) + rows.shape[1:])[draw.blocks]
    scale_shape = (-1,) + (1,) * (blocks.ndim - 1)
    scaled = blocks * draw.scales.reshape(scale_shape)
    return scaled.reshape((-1,) + rows.shape[1:])


def apply_sketch(draw: AnyDraw, ds: PartitionedDataset) -> Tuple[np.ndarray, np.ndarray]:
    """(S A, S b) assembled block by block."""
    return _sketched_rows(draw, ds.A, ds.K), _sketched_rows(draw, ds.b, ds.K)


def weighted_collapse(draw: SketchDraw) -> WeightedSketchDraw:
    distinct, weights = np.unique(draw.sampled, return_counts=True)
    scales = np.sqrt(weights / (draw.q * draw.source.p[distinct]))
    return WeightedSketchDraw(distinct=distinct, weights=weights, scales=scales,
                              q=draw.q, source=draw.source)


def sketch_gram(draw: AnyDraw, ds: PartitionedDataset) -> np.ndarray:
    """A^T S^T S A"""
    A_hat, _ = apply_sketch(draw, ds)
    return A_hat.T @ A_hat


def sketch_gradient(draw: AnyDraw, ds: PartitionedDataset, x: np.ndarray) -> np.ndarray:
    """2 A^T S^T S (A x - b)"""
    A_hat, b_hat = apply_sketch(draw, ds)
    return 2.0 * A_hat.T @ (A_hat @ x - b_hat)


def embedding_error(draw: AnyDraw, basis: OrthonormalBasis, ds: PartitionedDataset) -> float:
    """||I_d - U^T S^T S U||_2 on the d x d deviation matrix."""
    if basis.N != ds.N:
        raise ValueError(f"basis has {basis.N} rows but dataset has {ds.N}")
    U_hat = _sketched_rows(draw, basis.U, ds.K)
    return symmetric_spectral_norm(np.eye(basis.d) - U_hat.T @ U_hat)


def expected_distinct(dist: SamplingDistribution, q: int) -> float:
    """Expected number of distinct blocks in q draws: K - sum (1 - p_i)^q"""
    return float(dist.K - np.sum((1.0 - dist.p) ** q))


def perturb_distribution(dist: SamplingDistribution, beta_target: float,
                         rng: np.random.Generator) -> SamplingDistribution:
    """
    Multiplicative perturbation with misestimation factor at least ``beta_target``.

    Each weight is multiplied by a factor in [beta, 1] and the result is
    renormalized; then p_i / p~_i = (sum_j p_j f_j) / f_i >= beta.
    """
    if not 0.0 < beta_target <= 1.0:
        raise DistributionError(f"beta_target must lie in (0, 1], got {beta_target}")
    if beta_target == 1.0:
        return SamplingDistribution(dist.p, kind='approximate')
    floor = min(1.0, beta_target * (1.0 + 1e-9))
    factors = floor + (1.0 - floor) * rng.random(dist.K)
    perturbed = SamplingDistribution.normalized(dist.p * factors, kind='approximate')
    logger.debug(f"Perturbed distribution: requested beta={beta_target}, "
                 f"measured beta={perturbed.misestimation_factor(dist):.4f}")
    return perturbed


def deflate_leading_blocks(dist: SamplingDistribution, beta_target: float) -> SamplingDistribution:
    """
    Deterministic misestimation: blocks at or above the median probability are
    scaled by ``beta_target`` and the result renormalized. The heaviest blocks
    end up under-sampled while the misestimation factor stays >= beta_target.
    """
    if not 0.0 < beta_target <= 1.0:
        raise DistributionError(f"beta_target must lie in (0, 1], got {beta_target}")
    leading = dist.p >= np.median(dist.p)
    factors = np.where(leading, beta_target, 1.0)
    return SamplingDistribution.normalized(dist.p * factors, kind='approximate')


def block_counts(samples: np.ndarray, K: int) -> np.ndarray:
    """Per-row multiplicity of each block index, shape (rows, K)"""
    samples = np.atleast_2d(np.asarray(samples, dtype=np.int64))
    rows = samples.shape[0]
    offsets = samples + K * np.arange(rows)[:, None]
    return np.bincount(offsets.ravel(), minlength=rows * K).reshape(rows, K)
