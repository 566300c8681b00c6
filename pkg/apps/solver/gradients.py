"""
Exact, partial and encoded gradients of the least-squares loss
||Ax - b||^2, and their aggregation at the central server.
"""

import logging

import numpy as np

from apps.core.exceptions import DistributionError, EmptyRoundError
from apps.expansion.network import ExpansionNetwork
from apps.linalg.datasets import PartitionedDataset
from apps.sketching.draws import SketchDraw
from apps.stragglers.rounds import RoundOutcome

logger = logging.getLogger(__name__)


def gradient(ds: PartitionedDataset, x: np.ndarray) -> np.ndarray:
    """g = 2 A^T (A x - b)"""
    return 2.0 * ds.A.T @ (ds.A @ x - ds.b)


def partial_gradient(ds: PartitionedDataset, i: int, x: np.ndarray) -> np.ndarray:
    """g_i = 2 A_i^T (A_i x - b_i)"""
    A_i, b_i = ds.block(i)
    return 2.0 * A_i.T @ (A_i @ x - b_i)


def block_gradients(ds: PartitionedDataset, blocks: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Partial gradients of the listed blocks, one row each"""
    blocks = np.asarray(blocks, dtype=np.int64)
    A_sel = ds.A_blocks[blocks]
    residuals = np.einsum('ktd,d->kt', A_sel, x) - ds.b_blocks[blocks]
    return 2.0 * np.einsum('ktd,kt->kd', A_sel, residuals)


def all_partial_gradients(ds: PartitionedDataset, x: np.ndarray) -> np.ndarray:
    return block_gradients(ds, np.arange(ds.K), x)


def encoded_partial_gradient(net: ExpansionNetwork, ds: PartitionedDataset, i: int, x: np.ndarray,
                             q: int = None) -> np.ndarray:
    """g_i / (q Pi_bar_i), what a server holding block i returns"""
    q = net.q if q is None else q
    share = net.induced.p[i]
    if share <= 0:
        raise DistributionError(f"block {i} has no replicas in the network")
    return partial_gradient(ds, i, x) / (q * share)


def aggregate(outcome: RoundOutcome, ds: PartitionedDataset, net: ExpansionNetwork,
              x: np.ndarray) -> np.ndarray:
    """
    Sum of the received encoded partial gradients.

    Blocks are stored scaled for the network's q; when a different number of
    responses arrived (deadline mode) the sum is rescaled so every term
    carries 1 / (|S| Pi_bar_i).
    """
    if outcome.is_empty:
        raise EmptyRoundError(f"no server responded in {outcome.mode}")
    distinct, counts = np.unique(outcome.responders, return_counts=True)
    weights = counts / (outcome.q_responded * net.induced.p[distinct])
    return weights @ block_gradients(ds, distinct, x)


def outcome_to_draw(outcome: RoundOutcome, net: ExpansionNetwork) -> SketchDraw:
    """The block sampling sketch a round induces: responders sampled from Pi_bar"""
    if outcome.is_empty:
        raise EmptyRoundError(f"no server responded in {outcome.mode}")
    return SketchDraw.from_indices(outcome.responders, net.induced)
