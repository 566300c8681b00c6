"""
Dense linear algebra substrate: row partitioning, orthonormal bases,
leverage scores, exact least squares and synthetic instances.
"""

from apps.linalg.bases import OrthonormalBasis, exact_solution, orthonormal_basis
from apps.linalg.datasets import (
    PartitionedDataset,
    RegressionInstance,
    generate_regression_instance,
    partition,
)
from apps.linalg.scores import (
    SamplingDistribution,
    block_leverage_scores,
    frobenius_block_scores,
    row_leverage_scores,
)
from apps.linalg.spectral import sigma_max, symmetric_spectral_norm

__all__ = [
    'OrthonormalBasis',
    'PartitionedDataset',
    'RegressionInstance',
    'SamplingDistribution',
    'block_leverage_scores',
    'exact_solution',
    'frobenius_block_scores',
    'generate_regression_instance',
    'orthonormal_basis',
    'partition',
    'row_leverage_scores',
    'sigma_max',
    'symmetric_spectral_norm',
]
