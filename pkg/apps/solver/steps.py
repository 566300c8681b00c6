"""
Step-size policies for steepest descent on ||Ax - b||^2.
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from apps.core.exceptions import ConfigurationError
from apps.linalg.datasets import PartitionedDataset
from apps.linalg.spectral import sigma_max

logger = logging.getLogger(__name__)

FIXED = 'fixed'
CONSERVATIVE = 'conservative'
OPTIMAL = 'optimal'
DIMINISHING = 'diminishing'
POLICY_KINDS = (FIXED, CONSERVATIVE, OPTIMAL, DIMINISHING)


def optimal_step(ds: PartitionedDataset, g: np.ndarray, x: np.ndarray) -> float:
    """Exact line search <A g, A x - b> / ||A g||^2 along -g; 0 when A g = 0"""
    Ag = ds.A @ g
    denominator = float(Ag @ Ag)
    if denominator == 0.0:
        return 0.0
    return float(Ag @ (ds.A @ x - ds.b)) / denominator


@dataclass(frozen=True)
class StepPolicy:
    """
    fixed: xi_s = xi
    conservative: xi_s = scale * 2 / sigma_max(A)^2
    optimal: exact line search along the current gradient estimate
    diminishing: xi_s = 1 / (eta * s), s starting at 1
    """
    kind: str
    xi: Optional[float] = None
    scale: float = 1.0
    eta: Optional[float] = None

    def __post_init__(self):
        if self.kind not in POLICY_KINDS:
            raise ConfigurationError(f"unknown step policy '{self.kind}'")
        if self.kind == FIXED and not (self.xi is not None and self.xi > 0):
            raise ConfigurationError(f"fixed step needs xi > 0, got {self.xi}")
        if self.kind == CONSERVATIVE and not self.scale > 0:
            raise ConfigurationError(f"step scale must be positive, got {self.scale}")
        if self.kind == DIMINISHING and not (self.eta is not None and self.eta > 0):
            raise ConfigurationError(f"diminishing step needs eta > 0, got {self.eta}")

    @classmethod
    def fixed(cls, xi: float) -> 'StepPolicy':
        return cls(kind=FIXED, xi=float(xi))

    @classmethod
    def conservative(cls, scale: float = 1.0) -> 'StepPolicy':
        return cls(kind=CONSERVATIVE, scale=float(scale))

    @classmethod
    def optimal(cls) -> 'StepPolicy':
        return cls(kind=OPTIMAL)

    @classmethod
    def diminishing(cls, eta: float) -> 'StepPolicy':
        return cls(kind=DIMINISHING, eta=float(eta))

    def bind(self, ds: PartitionedDataset) -> 'BoundStepPolicy':
        """Resolve dataset-dependent constants once per run"""
        base = None
        if self.kind == CONSERVATIVE:
            top = sigma_max(ds.A)
            base = self.scale * 2.0 / top ** 2
            logger.debug(f"Conservative step {base:.4e} from sigma_max={top:.4e}")
        elif self.kind == FIXED:
            base = self.xi
        return BoundStepPolicy(policy=self, ds=ds, base=base)

    def to_dict(self) -> dict:
        return {'kind': self.kind, 'xi': self.xi, 'scale': self.scale, 'eta': self.eta}


@dataclass(frozen=True, eq=False)
class BoundStepPolicy:
    policy: StepPolicy
    ds: PartitionedDataset
    base: Optional[float]

    def step(self, s: int, g: np.ndarray, x: np.ndarray) -> float:
        """xi_s for iteration s >= 1 given the gradient estimate g at x"""
        kind = self.policy.kind
        if kind == OPTIMAL:
            return optimal_step(self.ds, g, x)
        if kind == DIMINISHING:
            return 1.0 / (self.policy.eta * s)
        return self.base
