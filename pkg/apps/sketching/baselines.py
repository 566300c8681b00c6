"""
Baseline sketches: dense Gaussian projections and the block SRHT.

The block SRHT flips row signs at random, mixes rows with a normalized
Walsh-Hadamard transform and then samples blocks uniformly. N is zero-padded
to the next power of two for the transform and then to a multiple of tau so
the mixed rows split into whole blocks.
"""

import logging
from dataclasses import dataclass

import numpy as np

from apps.core.exceptions import SketchDimensionError
from apps.linalg.bases import OrthonormalBasis
from apps.linalg.datasets import PartitionedDataset
from apps.linalg.scores import SamplingDistribution
from apps.sketching.draws import SketchDraw, embedding_error, sample_blocks

logger = logging.getLogger(__name__)


def gaussian_sketch(r: int, N: int, rng: np.random.Generator) -> np.ndarray:
    """Dense r x N sketch with i.i.d. N(0, 1/r) entries"""
    if r < 1 or N < 1:
        raise SketchDimensionError(f"Gaussian sketch needs positive dimensions, got r={r}, N={N}")
    return rng.standard_normal((r, N)) / np.sqrt(r)


def next_power_of_two(n: int) -> int:
    return 1 << max(int(n) - 1, 0).bit_length()


def fwht(x: np.ndarray) -> np.ndarray:
    """Unnormalized fast Walsh-Hadamard transform along axis 0 (Sylvester order)."""
    a = np.array(x, dtype=np.float64, copy=True)
    n = a.shape[0]
    if n < 1 or n & (n - 1):
        raise ValueError(f"length must be a power of two, got {n}")
    trailing = a.shape[1:]
    h = 1
    while h < n:
        a = a.reshape((n // (2 * h), 2, h) + trailing)
        top, bottom = a[:, 0], a[:, 1]
        a = np.stack((top + bottom, top - bottom), axis=1).reshape((n,) + trailing)
        h *= 2
    return a


@dataclass(frozen=True, eq=False)
class BlockSRHTSketch:
    """Mixed dataset H D [A b] split into K' blocks and a uniform block draw over it"""
    mixed: PartitionedDataset
    draw: SketchDraw
    signs: np.ndarray
    transform_rows: int

    def mix(self, M: np.ndarray) -> np.ndarray:
        """Apply the same signs and normalized transform to another N-row matrix."""
        return _mix_rows(M, self.signs, self.transform_rows, self.mixed.N)

    def embedding_error(self, basis: OrthonormalBasis) -> float:
        mixed_basis = OrthonormalBasis(U=self.mix(basis.U), provenance='block_srht')
        return embedding_error(self.draw, mixed_basis, self.mixed)


def _mix_rows(M: np.ndarray, signs: np.ndarray, transform_rows: int, total_rows: int) -> np.ndarray:
    M = np.asarray(M, dtype=np.float64)
    padded = np.zeros((transform_rows,) + M.shape[1:])
    padded[:M.shape[0]] = M
    sign_shape = (-1,) + (1,) * (M.ndim - 1)
    mixed = fwht(padded * signs.reshape(sign_shape)) / np.sqrt(transform_rows)
    if total_rows > transform_rows:
        mixed = np.concatenate([mixed, np.zeros((total_rows - transform_rows,) + M.shape[1:])])
    return mixed


def block_srht_sketch(ds: PartitionedDataset, q: int, rng: np.random.Generator) -> BlockSRHTSketch:
    """Random signs, Walsh-Hadamard mixing, then q uniform block draws with scale sqrt(K'/q)."""
    if q < 1 or q * ds.tau <= ds.d:
        raise SketchDimensionError(f"sketch dimension q*tau={q * ds.tau} must exceed d={ds.d}")
    transform_rows = next_power_of_two(ds.N)
    mixed_blocks = -(-transform_rows // ds.tau)
    total_rows = mixed_blocks * ds.tau
    signs = rng.choice(np.array([-1.0, 1.0]), size=transform_rows)
    mixed = PartitionedDataset(
        A=_mix_rows(ds.A, signs, transform_rows, total_rows),
        b=_mix_rows(ds.b, signs, transform_rows, total_rows),
        K=mixed_blocks,
        tau=ds.tau,
    )
    uniform = SamplingDistribution.uniform(mixed_blocks)
    draw = SketchDraw.from_indices(sample_blocks(uniform.p, q, rng), uniform)
    return BlockSRHTSketch(mixed=mixed, draw=draw, signs=signs, transform_rows=transform_rows)
