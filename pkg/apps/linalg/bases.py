"""
Orthonormal bases and exact least-squares solutions.

Both go through a column-pivoted thin QR. Rank is judged on the singular
values of the triangular factor, which are those of A.
"""

import logging
from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np
from scipy import linalg as sla

from apps.core.exceptions import RankDeficiencyError
from apps.linalg.datasets import PartitionedDataset

logger = logging.getLogger(__name__)

RANK_TOLERANCE = 1e-10
ORTHONORMALITY_TOLERANCE = 1e-10


@dataclass(frozen=True, eq=False)
class OrthonormalBasis:
    """Reduced left orthonormal basis U (N x d) of a full-rank matrix"""
    U: np.ndarray
    provenance: str = 'pivoted_qr'

    def __post_init__(self):
        U = np.asarray(self.U, dtype=np.float64)
        if U.ndim != 2 or U.shape[1] > U.shape[0]:
            raise ValueError(f"basis must be tall, got shape {U.shape}")
        deviation = np.max(np.abs(U.T @ U - np.eye(U.shape[1]))) if U.size else 0.0
        if deviation > ORTHONORMALITY_TOLERANCE:
            raise ValueError(f"columns are not orthonormal (max deviation {deviation:.3e})")
        object.__setattr__(self, 'U', U)

    @property
    def N(self) -> int:
        return self.U.shape[0]

    @property
    def d(self) -> int:
        return self.U.shape[1]

    def projector(self) -> np.ndarray:
        """U U^T; dense N x N, for small oracle instances only"""
        return self.U @ self.U.T


def _matrix_of(source: Union[PartitionedDataset, np.ndarray]) -> np.ndarray:
    if isinstance(source, PartitionedDataset):
        return source.A
    return np.atleast_2d(np.asarray(source, dtype=np.float64))


def pivoted_qr(A: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Thin QR with column pivoting; raises RankDeficiencyError below the rank tolerance."""
    N, d = A.shape
    if d > N:
        raise RankDeficiencyError(f"A has more columns ({d}) than rows ({N})")
    Q, R, pivots = sla.qr(A, mode='economic', pivoting=True)
    singular_values = np.linalg.svd(R, compute_uv=False)
    largest = float(singular_values[0]) if singular_values.size else 0.0
    smallest = float(singular_values[-1]) if singular_values.size else 0.0
    if largest == 0.0 or smallest < RANK_TOLERANCE * largest:
        raise RankDeficiencyError(
            f"A is rank deficient: sigma_min={smallest:.3e}, sigma_max={largest:.3e}",
            smallest=smallest, largest=largest,
        )
    return Q, R, pivots


def orthonormal_basis(source: Union[PartitionedDataset, np.ndarray]) -> OrthonormalBasis:
    """Basis of the column span of A (accepts a dataset or a bare matrix)."""
    Q, _, _ = pivoted_qr(_matrix_of(source))
    return OrthonormalBasis(U=Q, provenance='pivoted_qr')


def exact_solution(source: Union[PartitionedDataset, np.ndarray], b: np.ndarray = None) -> np.ndarray:
    """x* = A^+ b via the pivoted QR factors."""
    A = _matrix_of(source)
    if b is None:
        if not isinstance(source, PartitionedDataset):
            raise ValueError("b is required when a bare matrix is given")
        b = source.b
    Q, R, pivots = pivoted_qr(A)
    z = sla.solve_triangular(R, Q.T @ np.asarray(b, dtype=np.float64))
    x = np.empty_like(z)
    x[pivots] = z
    return x
