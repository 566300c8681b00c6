"""
Server Runtime Model
====================

Completion times of homogeneous servers. A mother runtime distribution F(t)
describes one machine working through the whole dataset; a server holding a
single block of tau rows finishes according to F~(t) = F(t * tau / N).

Features:
- shifted exponential and empirical (trace) mother distributions
- scaled CDF, survival probability phi(t) and responders q(T)
- inverse-CDF sampling of completion times
- runtime specs (`shifted-exp:rate,shift`, `trace:PATH`) and trace files
- deadline / straggler-ratio tables
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Union

import numpy as np
import pandas as pd

from apps.core.exceptions import RuntimeModelError

logger = logging.getLogger(__name__)

SHIFTED_EXPONENTIAL = 'shifted_exponential'
EMPIRICAL = 'empirical'

# absorbs F~(T) * m landing a hair below an integer
RESPONDER_SLACK = 1e-9


@dataclass(frozen=True, eq=False)
class RuntimeModel:
    kind: str
    rate: float = 1.0
    shift: float = 0.0
    samples: np.ndarray = field(default=None)
    task_scale: float = 1.0

    def __post_init__(self):
        if self.task_scale <= 0:
            raise RuntimeModelError(f"task scale must be positive, got {self.task_scale}")
        if self.kind == SHIFTED_EXPONENTIAL:
            if not self.rate > 0:
                raise RuntimeModelError(f"rate must be positive, got {self.rate}")
            if self.shift < 0:
                raise RuntimeModelError(f"shift must be non-negative, got {self.shift}")
        elif self.kind == EMPIRICAL:
            samples = np.sort(np.asarray(self.samples, dtype=np.float64).reshape(-1))
            if samples.size == 0:
                raise RuntimeModelError("empirical runtime model needs at least one sample")
            if not np.all(np.isfinite(samples)) or samples[0] < 0:
                raise RuntimeModelError("completion times must be finite and non-negative")
            samples.setflags(write=False)
            object.__setattr__(self, 'samples', samples)
        else:
            raise RuntimeModelError(f"unknown runtime model kind '{self.kind}'")

    @classmethod
    def shifted_exponential(cls, rate: float, shift: float = 0.0,
                            task_scale: float = 1.0) -> 'RuntimeModel':
        return cls(kind=SHIFTED_EXPONENTIAL, rate=float(rate), shift=float(shift),
                   task_scale=float(task_scale))

    @classmethod
    def empirical(cls, samples, task_scale: float = 1.0) -> 'RuntimeModel':
        return cls(kind=EMPIRICAL, samples=samples, task_scale=float(task_scale))

    def with_task_scale(self, task_scale: float) -> 'RuntimeModel':
        """Same mother distribution for servers holding tau / N of the data"""
        return RuntimeModel(kind=self.kind, rate=self.rate, shift=self.shift,
                            samples=self.samples, task_scale=float(task_scale))

    def describe(self) -> str:
        if self.kind == SHIFTED_EXPONENTIAL:
            return f"shifted-exp:{self.rate:g},{self.shift:g}"
        return f"trace[{self.samples.size} samples]"


def _as_output(values: np.ndarray, like):
    return float(values) if np.ndim(like) == 0 else values


def scaled_cdf(model: RuntimeModel, t):
    """F~(t) = F(t * task_scale); the empirical CDF counts samples <= t * task_scale"""
    u = np.asarray(t, dtype=np.float64) * model.task_scale
    if model.kind == SHIFTED_EXPONENTIAL:
        elapsed = np.maximum(u - model.shift, 0.0)
        values = np.where(u >= model.shift, -np.expm1(-model.rate * elapsed), 0.0)
    else:
        values = np.searchsorted(model.samples, u, side='right') / model.samples.size
    return _as_output(values, t)


def survival(model: RuntimeModel, t):
    """phi(t) = 1 - F~(t), the probability that a server is still straggling at t"""
    return _as_output(1.0 - np.asarray(scaled_cdf(model, t)), t)


def responders_at(model: RuntimeModel, T: float, m: int, strict: bool = False) -> int:
    """q(T) = floor(F~(T) * m)"""
    if m < 1:
        raise RuntimeModelError(f"m must be positive, got {m}")
    q = int(np.floor(scaled_cdf(model, T) * m + RESPONDER_SLACK))
    q = min(max(q, 0), m)
    if q == 0:
        message = f"No server is expected to respond by T={T:g} ({model.describe()}, m={m})"
        if strict:
            raise RuntimeModelError(message)
        logger.warning(message)
    return q


def sample(model: RuntimeModel, size, rng: np.random.Generator) -> np.ndarray:
    """
    Completion times drawn from F~.

    Shifted exponential times come from the inverse CDF; empirical times are
    resampled with replacement from the trace, then divided by the task scale.
    """
    if model.kind == SHIFTED_EXPONENTIAL:
        u = rng.random(size)
        mother = model.shift - np.log1p(-u) / model.rate
    else:
        mother = rng.choice(model.samples, size=size, replace=True)
    return mother / model.task_scale


def load_trace(path: Union[str, Path]) -> np.ndarray:
    """One non-negative completion time per line; blank lines are skipped"""
    try:
        frame = pd.read_csv(path, header=None, skip_blank_lines=True, dtype=np.float64)
    except pd.errors.EmptyDataError:
        raise RuntimeModelError(f"trace file {path} contains no completion times")
    except ValueError as e:
        raise RuntimeModelError(f"trace file {path} is not numeric: {e}")
    if frame.shape[1] != 1:
        raise RuntimeModelError(f"trace file {path} must hold one value per line")
    times = frame.iloc[:, 0].to_numpy(dtype=np.float64)
    if times.size == 0:
        raise RuntimeModelError(f"trace file {path} contains no completion times")
    if np.any(times < 0) or not np.all(np.isfinite(times)):
        raise RuntimeModelError(f"trace file {path} has negative or non-finite times")
    logger.info(f"Loaded {times.size} completion times from {path}")
    return times


def parse_runtime_spec(text: str, task_scale: float = 1.0) -> RuntimeModel:
    """Parse ``shifted-exp:rate,shift`` or ``trace:PATH``"""
    kind, sep, argument = text.partition(':')
    if not sep or not argument:
        raise RuntimeModelError(f"runtime spec '{text}' must look like 'shifted-exp:RATE,SHIFT' or 'trace:PATH'")
    kind = kind.strip().lower()
    if kind == 'shifted-exp':
        parts = [part.strip() for part in argument.split(',')]
        if len(parts) not in (1, 2):
            raise RuntimeModelError(f"shifted-exp takes RATE[,SHIFT], got '{argument}'")
        try:
            rate = float(parts[0])
            shift = float(parts[1]) if len(parts) == 2 else 0.0
        except ValueError:
            raise RuntimeModelError(f"shifted-exp parameters must be numbers, got '{argument}'")
        return RuntimeModel.shifted_exponential(rate, shift, task_scale=task_scale)
    if kind == 'trace':
        return RuntimeModel.empirical(load_trace(argument), task_scale=task_scale)
    raise RuntimeModelError(f"unknown runtime kind '{kind}'")


def straggler_ratio_table(model: RuntimeModel, m: int, deadlines: Iterable[float]) -> pd.DataFrame:
    """Per deadline T: F~(T), phi(T), q(T) and the expected stragglers m * phi(T)"""
    rows = []
    for T in deadlines:
        cdf = scaled_cdf(model, float(T))
        rows.append({
            'T': float(T),
            'cdf': cdf,
            'survival': 1.0 - cdf,
            'q': responders_at(model, float(T), m),
            'expected_stragglers': m * (1.0 - cdf),
        })
    return pd.DataFrame(rows, columns=['T', 'cdf', 'survival', 'q', 'expected_stragglers'])
