"""
Replication Design Engine
=========================

Integer replication counts r_1..r_K whose induced distribution r_i / R
emulates a target block distribution when servers respond uniformly.

Features:
- l1 distortion and runtime-based distortion Delta
- perfect emulation for rational distributions (lcm construction)
- replication from the straggler survival probability, with its rounding bound
- proportional and ratio-scaled initial replications
- fitting any initial replication to exactly m servers
"""

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from apps.core.exceptions import DistributionError, ReplicationError
from apps.linalg.scores import SamplingDistribution

logger = logging.getLogger(__name__)

FractionLike = Union[Fraction, Tuple[int, int], str, int]


def round_half_up(values) -> np.ndarray:
    """floor(a + 1/2), elementwise"""
    return np.floor(np.asarray(values, dtype=np.float64) + 0.5).astype(np.int64)


def _as_probabilities(P) -> np.ndarray:
    if isinstance(P, SamplingDistribution):
        return P.p
    return np.asarray(P, dtype=np.float64).reshape(-1)


def distortion(P, Q) -> float:
    """(1/K) sum |P_i - Q_i|"""
    p, q = _as_probabilities(P), _as_probabilities(Q)
    if p.shape != q.shape:
        raise DistributionError(f"length mismatch: {p.shape[0]} vs {q.shape[0]} blocks")
    return float(np.mean(np.abs(p - q)))


def _check_survival(phi_T: float):
    if not 0.0 < phi_T < 1.0:
        raise ReplicationError(f"survival probability must lie in (0, 1), got {phi_T}")


def replication_exponents(P, phi_T: float) -> np.ndarray:
    """Real-valued rho_i = log(1 - P_i) / log(phi_T)"""
    _check_survival(phi_T)
    p = _as_probabilities(P)
    if np.any(p >= 1.0):
        raise ReplicationError("a block with probability 1 would need infinitely many replicas")
    return np.log1p(-p) / np.log(phi_T)


def replication_from_runtime(P, phi_T: float) -> np.ndarray:
    """r^_i = round-half-up(rho_i), clamped to at least one replica."""
    return np.maximum(round_half_up(replication_exponents(P, phi_T)), 1)


def rounding_bound(P, phi_T: float, r_hat) -> float:
    """(1 - sqrt(phi)) * sum_i phi^min(r^_i, rho_i)"""
    rho = replication_exponents(P, phi_T)
    exponents = np.minimum(np.asarray(r_hat, dtype=np.float64), rho)
    return float((1.0 - np.sqrt(phi_T)) * np.sum(phi_T ** exponents))


def delta_distortion(P, phi_T: float, r) -> float:
    """(1/K) sum |P_i - (1 - phi^r_i)|"""
    _check_survival(phi_T)
    p = _as_probabilities(P)
    return float(np.mean(np.abs(p - (1.0 - phi_T ** np.asarray(r, dtype=np.float64)))))


def _as_fraction(value: FractionLike) -> Fraction:
    if isinstance(value, bool) or isinstance(value, float):
        raise ReplicationError(f"{value!r} is not an exact rational; pass a fraction such as '3/20'")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, tuple) and len(value) == 2:
        return Fraction(int(value[0]), int(value[1]))
    if isinstance(value, str) and ('/' in value or value.strip().isdigit()):
        return Fraction(value.strip())
    raise ReplicationError(f"{value!r} is not a rational given as a fraction")


def perfect_replication(P: Sequence[FractionLike]) -> Tuple[int, np.ndarray]:
    """R = lcm of the denominators and r_i = (R / b_i) a_i; the induced distribution equals P."""
    fractions = [_as_fraction(value) for value in P]
    if any(f <= 0 for f in fractions):
        raise ReplicationError("every block needs a positive probability to receive a replica")
    if sum(fractions) != 1:
        raise ReplicationError(f"fractions sum to {sum(fractions)}, not 1")
    R = math.lcm(*(f.denominator for f in fractions))
    r = np.array([(R // f.denominator) * f.numerator for f in fractions], dtype=np.int64)
    return R, r


def proportional_replication(P, m: int) -> np.ndarray:
    """r~_i = round-half-up(m P_i), at least one"""
    return np.maximum(round_half_up(m * _as_probabilities(P)), 1)


def ratio_replication(P, nu: float) -> np.ndarray:
    """r~_i = round-half-up(nu P_i / min_j P_j), at least one"""
    p = _as_probabilities(P)
    if nu <= 0:
        raise ReplicationError(f"nu must be positive, got {nu}")
    if np.any(p <= 0):
        raise ReplicationError("ratio replication needs strictly positive probabilities")
    return np.maximum(round_half_up(nu * p / np.min(p)), 1)


def fit_to_m(P, r_tilde, m: int) -> np.ndarray:
    """
    Adjust an initial replication to use exactly m servers.

    One replica is removed (R~ > m) or added (R~ < m) per step at the block
    whose induced share deviates most in the offending direction; ties go to
    the lowest index. A block is skipped once when the change would overshoot
    its target twice in a row. Blocks never drop below one replica.
    """
    p = _as_probabilities(P)
    r = np.array(r_tilde, dtype=np.int64).reshape(-1)
    K = r.shape[0]
    if p.shape[0] != K:
        raise ReplicationError(f"{K} replication counts for {p.shape[0]} blocks")
    if m < K:
        raise ReplicationError(f"m={m} servers cannot hold K={K} blocks")
    if np.any(r < 1):
        raise ReplicationError("initial replication counts must be at least 1")

    R = int(r.sum())
    decreasing = R >= m
    sign = -1 if decreasing else 1
    gaps = p - r / m
    if not decreasing:
        gaps = -gaps
    previous = -1
    max_steps = 4 * (abs(R - m) + K) + 10
    steps = 0
    while R != m:
        steps += 1
        if steps > max_steps:
            logger.warning(f"Replication fitting stopped after {max_steps} steps at R={R}, m={m}")
            raise ReplicationError(f"replication fitting did not reach m={m} servers")
        candidates = gaps.copy()
        if decreasing:
            candidates[r <= 1] = np.inf
        j = int(np.argmin(candidates))
        overshoot = -sign * (p[j] - (r[j] + sign) / m)
        if overshoot > 0 and previous == j:
            gaps[j] = 1.0
            # re-picked right after its skip: no other block can move, so apply it next time
            previous = -1
            continue
        r[j] += sign
        R += sign
        gaps[j] = -sign * (p[j] - r[j] / m)
        previous = j
    return r


@dataclass(frozen=True, eq=False)
class ReplicationPlan:
    """Replication counts with their induced distribution and accuracy metrics"""
    pi: SamplingDistribution
    r: np.ndarray
    induced: SamplingDistribution
    method: str = 'given'
    initial: Optional[np.ndarray] = field(default=None)

    @classmethod
    def from_counts(cls, pi, r, method: str = 'given', initial=None) -> 'ReplicationPlan':
        if not isinstance(pi, SamplingDistribution):
            pi = SamplingDistribution(np.asarray(pi, dtype=np.float64), kind='exact')
        counts = np.asarray(r, dtype=np.int64).reshape(-1)
        if counts.shape[0] != pi.K:
            raise ReplicationError(f"{counts.shape[0]} replication counts for {pi.K} blocks")
        if np.any(counts < 1):
            raise ReplicationError("every block needs at least one replica")
        induced = SamplingDistribution(counts / counts.sum(), kind='induced')
        return cls(pi=pi, r=counts, induced=induced, method=method,
                   initial=None if initial is None else np.asarray(initial, dtype=np.int64))

    @property
    def K(self) -> int:
        return int(self.r.shape[0])

    @property
    def R(self) -> int:
        return int(self.r.sum())

    @property
    def m(self) -> int:
        return self.R

    @property
    def beta(self) -> float:
        return self.induced.misestimation_factor(self.pi)

    @property
    def additive_eps(self) -> float:
        return self.induced.additive_error(self.pi)

    @property
    def distortion(self) -> float:
        return distortion(self.pi, self.induced)


def design_replication(P, m: int, phi_T: Optional[float] = None,
                       nu: Optional[float] = None) -> ReplicationPlan:
    """
    Initial replication (runtime-based, ratio-based or proportional), scaled
    up by round-half-up(m / R^) when m >= 2 R^, then fitted to m servers.
    """
    pi = P if isinstance(P, SamplingDistribution) else SamplingDistribution(_as_probabilities(P))
    if phi_T is not None:
        initial, method = replication_from_runtime(pi, phi_T), 'runtime'
    elif nu is not None:
        initial, method = ratio_replication(pi, nu), 'ratio'
    else:
        initial, method = proportional_replication(pi, m), 'proportional'

    R_hat = int(initial.sum())
    if method != 'proportional' and m >= 2 * R_hat:
        factor = int(round_half_up(m / R_hat))
        logger.debug(f"Scaling {method} replication by {factor} (R^={R_hat}, m={m})")
        initial = initial * factor
    r = fit_to_m(pi, initial, m)
    plan = ReplicationPlan.from_counts(pi, r, method=method, initial=initial)
    logger.info(f"Designed {method} replication for K={plan.K}, m={m}: "
                f"beta={plan.beta:.4f}, distortion={plan.distortion:.3e}")
    return plan


def perfect_plan(P: Sequence[FractionLike]) -> ReplicationPlan:
    fractions = [_as_fraction(value) for value in P]
    R, r = perfect_replication(fractions)
    pi = SamplingDistribution(np.array([float(f) for f in fractions]), kind='exact')
    return ReplicationPlan.from_counts(pi, r, method='perfect', initial=r)
