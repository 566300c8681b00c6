"""
Expansion networks: which server stores which encoded block.

Servers are assigned contiguously: the first r_1 servers hold block 1, the
next r_2 hold block 2, and so on. Block i is stored pre-scaled by
g_i = 1 / sqrt(q * Pi_bar_i) so that the central server only sums what it
receives.
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from apps.core.exceptions import ReplicationError
from apps.expansion.replication import ReplicationPlan, design_replication
from apps.linalg.datasets import PartitionedDataset
from apps.linalg.scores import SamplingDistribution

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ExpansionNetwork:
    plan: ReplicationPlan
    q: int
    tau: int
    assignment: np.ndarray
    encoding_scales: np.ndarray

    @property
    def m(self) -> int:
        return int(self.assignment.shape[0])

    @property
    def K(self) -> int:
        return self.plan.K

    @property
    def induced(self) -> SamplingDistribution:
        return self.plan.induced

    @property
    def stored_rows(self) -> int:
        return self.m * self.tau

    def servers_of(self, block: int) -> range:
        start = int(np.sum(self.plan.r[:block]))
        return range(start, start + int(self.plan.r[block]))

    def gradient_weights(self, q: int = None) -> np.ndarray:
        """1 / (q Pi_bar_i): the factor each partial gradient carries after encoding"""
        q = self.q if q is None else q
        return 1.0 / (q * self.induced.p)


def build_network(plan: ReplicationPlan, q: int, tau: int, m: int = None) -> ExpansionNetwork:
    m = plan.R if m is None else m
    if plan.R != m:
        raise ReplicationError(f"replication uses {plan.R} servers, expected m={m}")
    if not 1 <= q <= m:
        raise ReplicationError(f"q={q} responses cannot be collected from m={m} servers")
    if tau < 1:
        raise ReplicationError(f"tau must be positive, got {tau}")
    assignment = np.repeat(np.arange(plan.K, dtype=np.int64), plan.r)
    encoding_scales = 1.0 / np.sqrt(q * plan.induced.p)
    logger.debug(f"Built expansion network: K={plan.K}, m={m}, q={q}")
    return ExpansionNetwork(plan=plan, q=q, tau=tau, assignment=assignment,
                            encoding_scales=encoding_scales)


def _check_layout(net: ExpansionNetwork, ds: PartitionedDataset):
    if net.K != ds.K or net.tau != ds.tau:
        raise ReplicationError(f"network layout (K={net.K}, tau={net.tau}) does not match "
                               f"dataset (K={ds.K}, tau={ds.tau})")


def encode_dataset(net: ExpansionNetwork, ds: PartitionedDataset) -> PartitionedDataset:
    """(G A, G b) with G = diag(g) kron I_tau, still K blocks"""
    _check_layout(net, ds)
    scales = np.repeat(net.encoding_scales, ds.tau)
    return PartitionedDataset(A=ds.A * scales[:, None], b=ds.b * scales, K=ds.K, tau=ds.tau)


def expand_dataset(net: ExpansionNetwork, ds: PartitionedDataset) -> PartitionedDataset:
    """Encoded data as stored across all m servers (one block per server)"""
    encoded = encode_dataset(net, ds)
    A = encoded.A_blocks[net.assignment].reshape(-1, ds.d)
    b = encoded.b_blocks[net.assignment].reshape(-1)
    return PartitionedDataset(A=A, b=b, K=net.m, tau=ds.tau)


def optimal_decoding_error(G_I: np.ndarray) -> float:
    """||I_K - G^+ G||_2 for the encoding rows of the responding servers."""
    G = np.atleast_2d(np.asarray(G_I, dtype=np.float64))
    if not np.any(G):
        raise ReplicationError("decoding error is undefined for a zero encoding matrix")
    projector = np.linalg.pinv(G) @ G
    return float(np.linalg.norm(np.eye(G.shape[1]) - projector, 2))


def design_network(P, m: int, q: int, tau: int, phi_T: Optional[float] = None,
                   nu: Optional[float] = None) -> ExpansionNetwork:
    """Replication design followed by server assignment"""
    return build_network(design_replication(P, m, phi_T=phi_T, nu=nu), q=q, tau=tau, m=m)
