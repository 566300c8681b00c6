"""
Per-iteration simulation of which servers respond.

Every server draws an i.i.d. completion time from F~. In ``fastest_q`` mode the
central server keeps the q earliest responses; in ``deadline`` mode it keeps
every response that arrived by T. Equal times are ordered by server index.
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from apps.core.exceptions import ConfigurationError
from apps.expansion.network import ExpansionNetwork
from apps.stragglers.runtime import RuntimeModel, sample

logger = logging.getLogger(__name__)

FASTEST_Q = 'fastest_q'
DEADLINE = 'deadline'


@dataclass(frozen=True)
class RoundMode:
    kind: str
    q: Optional[int] = None
    T: Optional[float] = None

    def __post_init__(self):
        if self.kind == FASTEST_Q:
            if self.q is None or self.q < 1:
                raise ConfigurationError(f"fastest_q mode needs q >= 1, got {self.q}")
        elif self.kind == DEADLINE:
            if self.T is None or self.T < 0:
                raise ConfigurationError(f"deadline mode needs T >= 0, got {self.T}")
        else:
            raise ConfigurationError(f"unknown round mode '{self.kind}'")

    @classmethod
    def fastest_q(cls, q: int) -> 'RoundMode':
        return cls(kind=FASTEST_Q, q=int(q))

    @classmethod
    def deadline(cls, T: float) -> 'RoundMode':
        return cls(kind=DEADLINE, T=float(T))

    @property
    def is_fixed(self) -> bool:
        return self.kind == FASTEST_Q

    def __str__(self):
        return f"fastest_q({self.q})" if self.is_fixed else f"deadline({self.T:g})"


@dataclass(frozen=True, eq=False)
class RoundOutcome:
    """Blocks whose computations arrived, in arrival order, with their servers"""
    responders: np.ndarray
    servers: np.ndarray
    server_times: np.ndarray
    mode: RoundMode

    @property
    def q_responded(self) -> int:
        return int(self.responders.shape[0])

    @property
    def is_empty(self) -> bool:
        return self.q_responded == 0


def _arrival_order(times: np.ndarray) -> np.ndarray:
    # stable sort keeps equal times in server-index order
    return np.argsort(times, axis=-1, kind='stable')


def _check_mode(net: ExpansionNetwork, mode: RoundMode):
    if mode.is_fixed and mode.q > net.m:
        raise ConfigurationError(f"cannot wait for q={mode.q} responses from m={net.m} servers")


def simulate_round(net: ExpansionNetwork, model: RuntimeModel, mode: RoundMode,
                   rng: np.random.Generator) -> RoundOutcome:
    _check_mode(net, mode)
    times = sample(model, net.m, rng)
    order = _arrival_order(times)
    if mode.is_fixed:
        kept = order[:mode.q]
    else:
        kept = order[times[order] <= mode.T]
    outcome = RoundOutcome(responders=net.assignment[kept], servers=kept,
                           server_times=times, mode=mode)
    if outcome.is_empty:
        logger.debug(f"No server responded in {mode}")
    return outcome


def simulate_fastest_rounds(net: ExpansionNetwork, model: RuntimeModel, q: int, rounds: int,
                            rng: np.random.Generator) -> np.ndarray:
    """
    Responder blocks of many independent fastest-q rounds at once, shape
    (rounds, q). Row s matches what ``simulate_round`` returns for the same
    stream of completion times.
    """
    _check_mode(net, RoundMode.fastest_q(q))
    times = sample(model, (rounds, net.m), rng)
    kept = _arrival_order(times)[:, :q]
    return net.assignment[kept]
