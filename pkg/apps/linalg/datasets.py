"""
Row-partitioned least-squares data.

A and b are split into K contiguous row blocks of equal size tau. When K does
not divide the number of rows, zero rows are appended to both A and b; these
padded rows have zero leverage and never change any score.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np

from apps.core.exceptions import ConfigurationError, PartitionError
from apps.core.seeding import SeedLike, make_rng

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class PartitionedDataset:
    """A (N x d), b (N,) and their K row blocks of tau rows each"""
    A: np.ndarray
    b: np.ndarray
    K: int
    tau: int
    raw_rows: int = field(default=-1)

    def __post_init__(self):
        A = np.array(self.A, dtype=np.float64, copy=True)
        b = np.array(self.b, dtype=np.float64, copy=True).reshape(-1)
        if A.ndim != 2:
            raise PartitionError(f"A must be a matrix, got shape {A.shape}")
        if self.K < 1 or self.tau < 1:
            raise PartitionError(f"K and tau must be positive, got K={self.K}, tau={self.tau}")
        if A.shape[0] != self.K * self.tau:
            raise PartitionError(f"N={A.shape[0]} rows do not split into K={self.K} blocks of tau={self.tau}")
        if b.shape[0] != A.shape[0]:
            raise PartitionError(f"b has {b.shape[0]} entries but A has {A.shape[0]} rows")
        if A.shape[1] >= A.shape[0]:
            raise PartitionError(f"overdetermined system required, got N={A.shape[0]} <= d={A.shape[1]}")
        A.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, 'A', A)
        object.__setattr__(self, 'b', b)
        if self.raw_rows < 0:
            object.__setattr__(self, 'raw_rows', A.shape[0])

    @property
    def N(self) -> int:
        return self.A.shape[0]

    @property
    def d(self) -> int:
        return self.A.shape[1]

    @property
    def block_ranges(self) -> List[range]:
        return [range(i * self.tau, (i + 1) * self.tau) for i in range(self.K)]

    @property
    def A_blocks(self) -> np.ndarray:
        """View of A as (K, tau, d)"""
        return self.A.reshape(self.K, self.tau, self.d)

    @property
    def b_blocks(self) -> np.ndarray:
        return self.b.reshape(self.K, self.tau)

    def block(self, i: int) -> Tuple[np.ndarray, np.ndarray]:
        if not 0 <= i < self.K:
            raise IndexError(f"block index {i} out of range for K={self.K}")
        rows = slice(i * self.tau, (i + 1) * self.tau)
        return self.A[rows], self.b[rows]

    def objective(self, x: np.ndarray) -> float:
        """Least-squares loss ||Ax - b||^2"""
        residual = self.A @ x - self.b
        return float(residual @ residual)


def partition(A_raw: np.ndarray, b_raw: np.ndarray, K: int) -> PartitionedDataset:
    """Split (A, b) into K contiguous blocks, zero-padding rows until K divides N."""
    A = np.atleast_2d(np.asarray(A_raw, dtype=np.float64))
    b = np.asarray(b_raw, dtype=np.float64).reshape(-1)
    if A.ndim != 2 or A.shape[0] < 1:
        raise PartitionError("A must have at least one row")
    if b.shape[0] != A.shape[0]:
        raise PartitionError(f"b has {b.shape[0]} entries but A has {A.shape[0]} rows")
    if K < 1:
        raise PartitionError(f"K must be a positive integer, got {K}")
    n_raw, d = A.shape
    if K > n_raw:
        raise PartitionError(f"K={K} exceeds the number of rows N={n_raw}; blocks would be empty")

    tau = math.ceil(n_raw / K)
    N = K * tau
    if d >= N:
        raise PartitionError(f"d={d} must be smaller than the padded row count N={N}")
    if N > n_raw:
        logger.debug(f"Padding {N - n_raw} zero rows so that K={K} divides N={N}")
        A = np.vstack([A, np.zeros((N - n_raw, d))])
        b = np.concatenate([b, np.zeros(N - n_raw)])
    return PartitionedDataset(A=A, b=b, K=K, tau=tau, raw_rows=n_raw)


@dataclass(frozen=True, eq=False)
class RegressionInstance:
    """Synthetic least-squares instance; x_true is the noiseless coefficient vector"""
    A: np.ndarray
    b: np.ndarray
    x_true: np.ndarray

    def partitioned(self, K: int) -> PartitionedDataset:
        return partition(self.A, self.b, K)


def generate_regression_instance(N: int, d: int, dof: float, noise_sigma: float,
                                 seed: SeedLike) -> RegressionInstance:
    """
    Student-t design matrix with Gaussian observation noise.

    A has i.i.d. t(dof) entries, x_true is standard normal and
    b = A x_true + noise_sigma * N(0, I). Heavy tails (small dof) give
    non-uniform block leverage scores. Deterministic under ``seed``.
    """
    if dof <= 0:
        raise ConfigurationError(f"degrees of freedom must be positive, got {dof}")
    if N <= d:
        raise ConfigurationError(f"need N > d, got N={N}, d={d}")
    if noise_sigma < 0:
        raise ConfigurationError(f"noise_sigma must be non-negative, got {noise_sigma}")
    rng = make_rng(seed)
    A = rng.standard_t(dof, size=(N, d))
    x_true = rng.standard_normal(d)
    b = A @ x_true
    if noise_sigma > 0:
        b = b + noise_sigma * rng.standard_normal(N)
    logger.debug(f"Generated {N}x{d} t({dof}) instance, sigma={noise_sigma}")
    return RegressionInstance(A=A, b=b, x_true=x_true)
