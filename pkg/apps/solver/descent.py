"""
Coded Steepest Descent Engine
=============================

Steepest descent driven by the expansion network: at every iteration the
servers race, the central server sums the encoded partial gradients it
received and takes a step.

Features:
- simulated rounds (fastest q or deadline) feeding the aggregated gradient
- per-iteration telemetry, including the gradient error bound
  ||g - g^||_2 <= 2 eps ||A||_2 ||Ax - b||_2 with eps the measured embedding
  error of the round's induced sketch
- reference batch stochastic descent over the expanded encoded data
- log residuals and running-average regret
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd

from apps.core.exceptions import ConfigurationError
from apps.core.seeding import SeedLike, make_rng
from apps.expansion.network import ExpansionNetwork
from apps.linalg.bases import OrthonormalBasis, orthonormal_basis
from apps.linalg.datasets import PartitionedDataset
from apps.linalg.spectral import sigma_max
from apps.sketching.draws import embedding_error
from apps.solver.gradients import aggregate, block_gradients, gradient, outcome_to_draw
from apps.solver.steps import StepPolicy
from apps.stragglers.rounds import RoundMode, simulate_round
from apps.stragglers.runtime import RuntimeModel

logger = logging.getLogger(__name__)

RESIDUAL_FLOOR = -16.0

RUN_COLUMNS = ['iter', 'step_size', 'q_responded', 'log10_residual', 'objective',
               'grad_error_bound_lhs', 'grad_error_bound_rhs']


@dataclass(frozen=True, eq=False)
class IterationRecord:
    iteration: int
    step_size: float
    q_responded: int
    objective: float
    gradient: Optional[np.ndarray] = None
    responders: Optional[np.ndarray] = None
    embedding_error: float = np.nan
    grad_error_lhs: float = np.nan
    grad_error_rhs: float = np.nan


@dataclass(eq=False)
class SolverRun:
    """Iterates x^[0..S] and one record per iteration"""
    iterates: np.ndarray
    records: List[IterationRecord]
    n_rows: int
    seed: Any = None
    config: Dict[str, Any] = field(default_factory=dict)

    @property
    def iterations(self) -> int:
        return len(self.records)

    @property
    def final(self) -> np.ndarray:
        return self.iterates[-1]

    def bound_violations(self, slack: float = 1e-9) -> int:
        """Iterations where the gradient error exceeded its embedding bound"""
        lhs = np.array([r.grad_error_lhs for r in self.records])
        rhs = np.array([r.grad_error_rhs for r in self.records])
        tracked = ~(np.isnan(lhs) | np.isnan(rhs))
        return int(np.sum(lhs[tracked] > rhs[tracked] * (1.0 + slack) + slack))

    def to_dataframe(self, x_star: np.ndarray) -> pd.DataFrame:
        residuals = residual_metric(self, x_star)[1:]
        return pd.DataFrame({
            'iter': [r.iteration for r in self.records],
            'step_size': [r.step_size for r in self.records],
            'q_responded': [r.q_responded for r in self.records],
            'log10_residual': residuals,
            'objective': [r.objective for r in self.records],
            'grad_error_bound_lhs': [r.grad_error_lhs for r in self.records],
            'grad_error_bound_rhs': [r.grad_error_rhs for r in self.records],
        }, columns=RUN_COLUMNS)


def initial_point(ds: PartitionedDataset, x0: Optional[np.ndarray]) -> np.ndarray:
    if x0 is None:
        return np.zeros(ds.d)
    x = np.array(x0, dtype=np.float64).reshape(-1)
    if x.shape[0] != ds.d:
        raise ConfigurationError(f"x0 has {x.shape[0]} entries, expected d={ds.d}")
    return x


def solve(ds: PartitionedDataset, net: ExpansionNetwork, model: RuntimeModel, policy: StepPolicy,
          iterations: int, q: Optional[int] = None, rng: SeedLike = None,
          mode: Optional[RoundMode] = None, x0: Optional[np.ndarray] = None,
          basis: Optional[OrthonormalBasis] = None, track_bound: bool = True,
          config: Optional[Dict[str, Any]] = None) -> SolverRun:
    """
    Run ``iterations`` rounds of simulate -> aggregate -> step.

    ``mode`` defaults to waiting for the fastest q responses (q defaults to
    the network's). A round in which nobody responds leaves x unchanged.
    """
    if iterations < 0:
        raise ConfigurationError(f"iterations must be non-negative, got {iterations}")
    if net.K != ds.K or net.tau != ds.tau:
        raise ConfigurationError(f"network (K={net.K}, tau={net.tau}) does not match "
                                 f"dataset (K={ds.K}, tau={ds.tau})")
    seed = rng if not isinstance(rng, np.random.Generator) else None
    rng = make_rng(rng)
    mode = RoundMode.fastest_q(q or net.q) if mode is None else mode
    stepper = policy.bind(ds)
    if track_bound:
        basis = orthonormal_basis(ds) if basis is None else basis
        a_norm = sigma_max(ds.A)

    x = initial_point(ds, x0)
    iterates = [x.copy()]
    records = []
    for s in range(1, iterations + 1):
        outcome = simulate_round(net, model, mode, rng)
        if outcome.is_empty:
            logger.warning(f"Iteration {s}: no server responded in {mode}, keeping x")
            iterates.append(x.copy())
            records.append(IterationRecord(iteration=s, step_size=0.0, q_responded=0,
                                           objective=ds.objective(x), responders=outcome.responders))
            continue

        g_hat = aggregate(outcome, ds, net, x)
        eps = lhs = rhs = np.nan
        if track_bound:
            eps = embedding_error(outcome_to_draw(outcome, net), basis, ds)
            residual = ds.A @ x - ds.b
            lhs = float(np.linalg.norm(gradient(ds, x) - g_hat))
            rhs = 2.0 * eps * a_norm * float(np.linalg.norm(residual))

        xi = stepper.step(s, g_hat, x)
        x = x - xi * g_hat
        iterates.append(x.copy())
        records.append(IterationRecord(
            iteration=s, step_size=xi, q_responded=outcome.q_responded, objective=ds.objective(x),
            gradient=g_hat, responders=outcome.responders, embedding_error=eps,
            grad_error_lhs=lhs, grad_error_rhs=rhs,
        ))
        logger.debug(f"Iteration {s}: q={outcome.q_responded}, xi={xi:.3e}, loss={records[-1].objective:.6e}")

    run = SolverRun(iterates=np.array(iterates), records=records, n_rows=ds.N, seed=seed,
                    config=dict(config or {}, mode=str(mode), policy=policy.to_dict(), iterations=iterations))
    logger.info(f"Coded descent finished {iterations} iterations in {mode}, final loss "
                f"{records[-1].objective if records else ds.objective(x):.6e}")
    return run


def solve_reference_ssd(ds_expanded: PartitionedDataset, policy: StepPolicy, iterations: int, q: int,
                        rng: SeedLike = None, x0: Optional[np.ndarray] = None,
                        original: Optional[PartitionedDataset] = None) -> SolverRun:
    """
    Batch stochastic descent on the expanded encoded data: each iteration sums
    the gradients of q encoded blocks drawn uniformly without replacement.

    ``original`` (the unencoded dataset) supplies the step-size constants and
    the recorded objective; without it the expanded data is used.
    """
    if not 1 <= q <= ds_expanded.K:
        raise ConfigurationError(f"q={q} blocks cannot be drawn from {ds_expanded.K} expanded blocks")
    seed = rng if not isinstance(rng, np.random.Generator) else None
    rng = make_rng(rng)
    reference = ds_expanded if original is None else original
    stepper = policy.bind(reference)

    x = initial_point(ds_expanded, x0)
    iterates = [x.copy()]
    records = []
    for s in range(1, iterations + 1):
        chosen = rng.choice(ds_expanded.K, size=q, replace=False)
        g_hat = block_gradients(ds_expanded, chosen, x).sum(axis=0)
        xi = stepper.step(s, g_hat, x)
        x = x - xi * g_hat
        iterates.append(x.copy())
        records.append(IterationRecord(iteration=s, step_size=xi, q_responded=q,
                                       objective=reference.objective(x), gradient=g_hat,
                                       responders=np.sort(chosen)))
    return SolverRun(iterates=np.array(iterates), records=records, n_rows=reference.N, seed=seed,
                     config={'solver': 'reference_ssd', 'policy': policy.to_dict(),
                             'iterations': iterations, 'q': q})


def residual_metric(run: SolverRun, x_star: np.ndarray, floor: float = RESIDUAL_FLOOR) -> np.ndarray:
    """log10(||x* - x^[s]||_2 / sqrt(N)) for every iterate, floored"""
    distances = np.linalg.norm(run.iterates - np.asarray(x_star)[None, :], axis=1) / np.sqrt(run.n_rows)
    with np.errstate(divide='ignore'):
        values = np.log10(distances)
    return np.maximum(values, floor)


def objective_values(ds: PartitionedDataset, iterates: np.ndarray) -> np.ndarray:
    residuals = iterates @ ds.A.T - ds.b[None, :]
    return np.einsum('sn,sn->s', residuals, residuals)


def regret_trace(run: SolverRun, ds: PartitionedDataset, x_star: np.ndarray) -> np.ndarray:
    """Running average of L(x^[s]) - L(x*) over s = 1..S"""
    gaps = objective_values(ds, run.iterates[1:]) - ds.objective(x_star)
    return np.cumsum(gaps) / np.arange(1, gaps.shape[0] + 1)
