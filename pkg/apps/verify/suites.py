"""
Named verification suites built from the simulator defaults.

Every suite draws from its own stream of the master seed, indexed by its
position in ``SUITE_ORDER``, so a suite gives the same report whether it
runs alone or as part of ``all``.
"""

import logging
from typing import Callable, Dict, List, Optional

import numpy as np
from django.conf import settings

from apps.core.exceptions import ConfigurationError
from apps.core.seeding import split_seeds
from apps.expansion.network import build_network, design_network
from apps.expansion.replication import design_replication, perfect_plan
from apps.linalg.bases import orthonormal_basis
from apps.linalg.datasets import PartitionedDataset, generate_regression_instance
from apps.linalg.scores import SamplingDistribution, block_leverage_scores
from apps.sketching.draws import draw_sketch
from apps.solver.descent import solve
from apps.solver.steps import StepPolicy
from apps.stragglers.runtime import RuntimeModel, parse_runtime_spec
from apps.verify.checks import (
    CheckReport,
    check_contraction,
    check_convergence_trend,
    check_decoding_error_bound,
    check_distortion_bounds,
    check_embedding_trend,
    check_embedding_vs_srht,
    check_expected_distinct,
    check_expected_sts_identity,
    check_flattened_scores,
    check_unbiased_gradient,
    check_weighted_identities,
    check_worked_example,
)
from apps.verify.fixtures import FIVE_BLOCK_FRACTIONS, FIVE_BLOCK_Q, five_block_dataset

logger = logging.getLogger(__name__)

# small weighted-identity instances: 64 x 8 in 16 blocks of 4 rows
WEIGHTED_SHAPE = (64, 8, 16)
WEIGHTED_Q = 8
# E[S^T S] instance: N = 64, tau = 4, every probability >= 0.04
STS_K, STS_TAU, STS_Q = 16, 4, 32
DISTINCT_P = (0.9, 0.1)
DISTINCT_Q = 2


class SuiteContext:
    """Lazily built shared instance: the default dataset, its leverage network and runtime model"""

    def __init__(self, simulation: Optional[dict] = None, verification: Optional[dict] = None):
        self.simulation = dict(settings.SIMULATION_CONFIG, **(simulation or {}))
        self.verification = dict(settings.VERIFICATION_CONFIG, **(verification or {}))
        self._dataset = None
        self._network = None

    @property
    def dataset(self) -> PartitionedDataset:
        if self._dataset is None:
            sim = self.simulation
            instance = generate_regression_instance(sim['n_rows'], sim['n_columns'], sim['dof'],
                                                    sim['noise_sigma'], seed=sim['instance_seed'])
            self._dataset = instance.partitioned(sim['n_blocks'])
        return self._dataset

    @property
    def network(self):
        if self._network is None:
            ds = self.dataset
            scores = block_leverage_scores(orthonormal_basis(ds), ds)
            self._network = design_network(scores, self.simulation['servers'], self.simulation['q'], ds.tau)
        return self._network

    @property
    def runtime(self) -> RuntimeModel:
        ds = self.dataset
        return parse_runtime_spec(self.simulation['runtime'], task_scale=ds.tau / ds.N)


def _worked_example(ctx: SuiteContext, rng: np.random.Generator) -> List[CheckReport]:
    return [check_worked_example()]


def _weighted(ctx: SuiteContext, rng: np.random.Generator) -> List[CheckReport]:
    N, d, K = WEIGHTED_SHAPE
    reports = []
    for _ in range(ctx.verification['weighted_instances']):
        ds = PartitionedDataset(A=rng.standard_normal((N, d)), b=rng.standard_normal(N), K=K, tau=N // K)
        dist = block_leverage_scores(orthonormal_basis(ds), ds)
        draws = [draw_sketch(dist, WEIGHTED_Q, rng, ds=ds) for _ in range(ctx.verification['weighted_draws'])]
        reports.append(check_weighted_identities(ds, draws, x=rng.standard_normal(d)))
    return reports


def _sts_identity(ctx: SuiteContext, rng: np.random.Generator) -> List[CheckReport]:
    dist = SamplingDistribution.normalized(np.linspace(1.0, 2.0, STS_K), kind='exact')
    return [check_expected_sts_identity(dist, STS_Q, STS_TAU, ctx.verification['sts_trials'], rng)]


def _expected_distinct(ctx: SuiteContext, rng: np.random.Generator) -> List[CheckReport]:
    dist = SamplingDistribution(np.array(DISTINCT_P))
    return [check_expected_distinct(dist, DISTINCT_Q, ctx.verification['distinct_trials'], rng)]


def _distortion(ctx: SuiteContext, rng: np.random.Generator) -> List[CheckReport]:
    return [check_distortion_bounds(ctx.verification['distortion_instances'], rng)]


def _flattened_scores(ctx: SuiteContext, rng: np.random.Generator) -> List[CheckReport]:
    exact = check_flattened_scores(five_block_dataset(), perfect_plan(FIVE_BLOCK_FRACTIONS), FIVE_BLOCK_Q)
    ds = ctx.dataset
    return [exact, check_flattened_scores(ds, ctx.network.plan, ctx.simulation['q'])]


def _unbiased(ctx: SuiteContext, rng: np.random.Generator) -> List[CheckReport]:
    x = rng.standard_normal(ctx.dataset.d)
    return [check_unbiased_gradient(ctx.dataset, ctx.network, ctx.runtime, x,
                                    ctx.verification['unbiased_rounds'], rng)]


def _decoding_bound(ctx: SuiteContext, rng: np.random.Generator) -> List[CheckReport]:
    # noisy default instance: Ax* != b, so the bound's right side stays positive
    run = solve(ctx.dataset, ctx.network, ctx.runtime, StepPolicy.conservative(0.25),
                ctx.verification['decoding_iterations'], rng=rng)
    report = check_decoding_error_bound(run, ctx.dataset)
    report.params['noise_sigma'] = ctx.simulation['noise_sigma']
    return [report]


def _contraction(ctx: SuiteContext, rng: np.random.Generator) -> List[CheckReport]:
    ds = ctx.dataset
    xi = StepPolicy.conservative(0.25).bind(ds).base
    return [check_contraction(ds, ctx.network, ctx.runtime, xi, np.zeros(ds.d),
                              ctx.verification['contraction_trials'], rng)]


def _embedding_trend(ctx: SuiteContext, rng: np.random.Generator) -> List[CheckReport]:
    v = ctx.verification
    return [check_embedding_trend(ctx.dataset, v['embedding_qs'], v['betas'], v['embedding_trials'],
                                  v['embedding_threshold'], rng)]


def _srht_comparison(ctx: SuiteContext, rng: np.random.Generator) -> List[CheckReport]:
    v = ctx.verification
    return [check_embedding_vs_srht(ctx.dataset, v['srht_qs'], v['srht_trials'], rng)]


def _convergence(ctx: SuiteContext, rng: np.random.Generator) -> List[CheckReport]:
    sizes = ctx.verification['convergence_instance']
    instance = generate_regression_instance(sizes['n_rows'], sizes['n_columns'], sizes['dof'],
                                            ctx.simulation['noise_sigma'], seed=rng)
    ds = instance.partitioned(sizes['n_blocks'])
    scores = block_leverage_scores(orthonormal_basis(ds), ds)
    net = build_network(design_replication(scores, sizes['servers']), q=sizes['q'], tau=ds.tau)
    model = parse_runtime_spec(ctx.simulation['runtime'], task_scale=ds.tau / ds.N)
    master = int(rng.integers(2 ** 31))
    return [check_convergence_trend(ds, net, model, ctx.verification['convergence_horizons'],
                                    ctx.verification['convergence_seeds'], master_seed=master)]


SUITES: Dict[str, Callable[[SuiteContext, np.random.Generator], List[CheckReport]]] = {
    'worked-example': _worked_example,
    'weighted': _weighted,
    'sts-identity': _sts_identity,
    'expected-distinct': _expected_distinct,
    'distortion': _distortion,
    'flattened-scores': _flattened_scores,
    'unbiased': _unbiased,
    'decoding-bound': _decoding_bound,
    'contraction': _contraction,
    'embedding-trend': _embedding_trend,
    'srht-comparison': _srht_comparison,
    'convergence': _convergence,
}
SUITE_ORDER = list(SUITES)
ALL = 'all'
SUITE_NAMES = SUITE_ORDER + [ALL]


def run_suite(name: str, master_seed: Optional[int] = None,
              context: Optional[SuiteContext] = None) -> List[CheckReport]:
    """Run one named suite (or ``all``) and return its reports in order"""
    if name not in SUITE_NAMES:
        raise ConfigurationError(f"unknown suite '{name}', expected one of {', '.join(SUITE_NAMES)}")
    context = SuiteContext() if context is None else context
    master_seed = context.verification['master_seed'] if master_seed is None else master_seed
    streams = split_seeds(master_seed, len(SUITE_ORDER))
    names = SUITE_ORDER if name == ALL else [name]

    reports = []
    for suite in names:
        logger.info(f"Running verification suite '{suite}'")
        rng = np.random.default_rng(streams[SUITE_ORDER.index(suite)])
        reports.extend(SUITES[suite](context, rng))
    return reports
