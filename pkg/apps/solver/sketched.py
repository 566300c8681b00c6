"""
Steepest descent with a fresh sketch at every iteration, and the one-shot
sketch-and-solve counterpart, for the block leverage score sketch and its
baselines.
"""

import logging
from typing import Optional

import numpy as np
from scipy import linalg as sla

from apps.core.exceptions import ConfigurationError
from apps.core.seeding import SeedLike, make_rng
from apps.linalg.bases import exact_solution, orthonormal_basis
from apps.linalg.datasets import PartitionedDataset
from apps.linalg.scores import SamplingDistribution, block_leverage_scores
from apps.sketching.baselines import block_srht_sketch, gaussian_sketch
from apps.sketching.draws import apply_sketch, draw_sketch
from apps.solver.descent import IterationRecord, SolverRun, initial_point
from apps.solver.gradients import gradient
from apps.solver.steps import StepPolicy

logger = logging.getLogger(__name__)

BLOCK_LVG = 'block_lvg'
GAUSSIAN = 'gaussian'
BLOCK_SRHT = 'block_srht'
NONE = 'none'
SKETCH_KINDS = (BLOCK_LVG, GAUSSIAN, BLOCK_SRHT, NONE)


def _check_kind(sketch_kind: str):
    if sketch_kind not in SKETCH_KINDS:
        raise ConfigurationError(f"unknown sketch '{sketch_kind}', expected one of {', '.join(SKETCH_KINDS)}")


def _leverage_distribution(ds: PartitionedDataset, dist: Optional[SamplingDistribution]) -> SamplingDistribution:
    return block_leverage_scores(orthonormal_basis(ds), ds) if dist is None else dist


def sketch_data(ds: PartitionedDataset, sketch_kind: str, q: int, rng: np.random.Generator,
                dist: Optional[SamplingDistribution] = None):
    """(S A, S b) for one fresh sketch of q blocks' worth of rows"""
    if sketch_kind == BLOCK_LVG:
        return apply_sketch(draw_sketch(dist, q, rng, ds=ds), ds)
    if sketch_kind == GAUSSIAN:
        S = gaussian_sketch(q * ds.tau, ds.N, rng)
        return S @ ds.A, S @ ds.b
    if sketch_kind == BLOCK_SRHT:
        sketch = block_srht_sketch(ds, q, rng)
        return apply_sketch(sketch.draw, sketch.mixed)
    return ds.A, ds.b


def sketched_descent(ds: PartitionedDataset, sketch_kind: str, policy: StepPolicy, iterations: int,
                     q: int, rng: SeedLike = None, x0: Optional[np.ndarray] = None,
                     dist: Optional[SamplingDistribution] = None) -> SolverRun:
    """
    x^[s+1] = x^[s] - xi_s * 2 (SA)^T (SAx - Sb) with S redrawn every iteration.

    ``none`` runs exact steepest descent. Block leverage sampling uses the
    exact scores unless ``dist`` is given.
    """
    _check_kind(sketch_kind)
    if sketch_kind != NONE and q * ds.tau <= ds.d:
        raise ConfigurationError(f"sketch dimension q*tau={q * ds.tau} must exceed d={ds.d}")
    seed = rng if not isinstance(rng, np.random.Generator) else None
    rng = make_rng(rng)
    if sketch_kind == BLOCK_LVG:
        dist = _leverage_distribution(ds, dist)
    stepper = policy.bind(ds)

    x = initial_point(ds, x0)
    iterates = [x.copy()]
    records = []
    for s in range(1, iterations + 1):
        if sketch_kind == NONE:
            g_hat = gradient(ds, x)
        else:
            A_hat, b_hat = sketch_data(ds, sketch_kind, q, rng, dist)
            g_hat = 2.0 * A_hat.T @ (A_hat @ x - b_hat)
        xi = stepper.step(s, g_hat, x)
        x = x - xi * g_hat
        iterates.append(x.copy())
        records.append(IterationRecord(iteration=s, step_size=xi,
                                       q_responded=ds.K if sketch_kind == NONE else q,
                                       objective=ds.objective(x), gradient=g_hat))
    logger.debug(f"{sketch_kind} descent: {iterations} iterations, final loss {ds.objective(x):.6e}")
    return SolverRun(iterates=np.array(iterates), records=records, n_rows=ds.N, seed=seed,
                     config={'sketch': sketch_kind, 'policy': policy.to_dict(),
                             'iterations': iterations, 'q': q})


def sketch_and_solve(ds: PartitionedDataset, sketch_kind: str, q: int, rng: SeedLike = None,
                     dist: Optional[SamplingDistribution] = None) -> np.ndarray:
    """Minimizer of ||S A x - S b|| for a single sketch (``none`` gives x*)"""
    _check_kind(sketch_kind)
    if sketch_kind == NONE:
        return exact_solution(ds)
    rng = make_rng(rng)
    if sketch_kind == BLOCK_LVG:
        dist = _leverage_distribution(ds, dist)
    A_hat, b_hat = sketch_data(ds, sketch_kind, q, rng, dist)
    x_hat, _, rank, _ = sla.lstsq(A_hat, b_hat)
    if rank < ds.d:
        logger.warning(f"{sketch_kind} sketch with q={q} lost rank ({rank} < d={ds.d})")
    return x_hat
