"""
Verification Checks Engine
==========================

Property checks over the simulator, each returning a ``CheckReport`` with the
measured quantities, the bound they were held against and a pass flag.

Features:
- flattened leverage scores of the expanded encoded basis
- weighted vs unweighted sketch identities and sketch unbiasedness
- E[S^T S] = I_N on small instances, with a dense structure check
- embedding error of block leverage sampling vs block SRHT (report only)
- per-iteration gradient error bound of a coded run
- unbiased aggregated gradients and contraction in expectation
- embedding failure trends in q and beta
- expected number of distinct sampled blocks
- replication distortion bounds on random instances
- convergence and regret trends under diminishing steps
- the five-block fixture end to end
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, Optional, Sequence

import numpy as np

from apps.core.seeding import SeedLike, make_rng, trial_rngs
from apps.expansion.network import ExpansionNetwork, build_network, expand_dataset
from apps.expansion.replication import (
    ReplicationPlan,
    delta_distortion,
    distortion,
    fit_to_m,
    perfect_plan,
    replication_from_runtime,
    rounding_bound,
)
from apps.linalg.bases import OrthonormalBasis, exact_solution, orthonormal_basis
from apps.linalg.datasets import PartitionedDataset
from apps.linalg.scores import SamplingDistribution, block_leverage_scores, frobenius_block_scores
from apps.linalg.spectral import sigma_max
from apps.sketching.baselines import block_srht_sketch
from apps.sketching.draws import (
    SketchDraw,
    block_counts,
    deflate_leading_blocks,
    draw_sketch,
    embedding_error,
    expected_distinct,
    sample_blocks,
    sketch_gradient,
    sketch_gram,
    weighted_collapse,
)
from apps.solver.descent import SolverRun, regret_trace, solve
from apps.solver.gradients import aggregate, all_partial_gradients, gradient
from apps.solver.steps import StepPolicy
from apps.stragglers.rounds import RoundMode, RoundOutcome, simulate_fastest_rounds
from apps.stragglers.runtime import RuntimeModel
from apps.verify.fixtures import (
    FIVE_BLOCK_FRACTIONS,
    FIVE_BLOCK_Q,
    FIVE_BLOCK_REPLICATION,
    FIVE_BLOCK_ROUNDS,
    FIVE_BLOCK_SERVERS,
    five_block_dataset,
)
from apps.verify.oracles import dense_sketch_gradient, materialize_sketch

logger = logging.getLogger(__name__)

EXACT_TOLERANCE = 1e-10
MONTE_CARLO_SIGMAS = 5.0


@dataclass
class CheckReport:
    check: str
    params: Dict[str, Any] = field(default_factory=dict)
    measured: Dict[str, Any] = field(default_factory=dict)
    bound: Dict[str, Any] = field(default_factory=dict)
    passed: bool = False

    def to_dict(self) -> Dict[str, Any]:
        return {'check': self.check, 'params': self.params, 'measured': self.measured,
                'bound': self.bound, 'pass': bool(self.passed)}


def _finish(report: CheckReport) -> CheckReport:
    level = logging.INFO if report.passed else logging.WARNING
    logger.log(level, f"Check {report.check}: {'passed' if report.passed else 'FAILED'}")
    return report


def _relative_gap(first: np.ndarray, second: np.ndarray) -> float:
    scale = max(float(np.max(np.abs(second))), 1.0)
    return float(np.max(np.abs(first - second))) / scale


def _monte_carlo_excess(samples: np.ndarray, target: np.ndarray) -> Dict[str, float]:
    """Largest |mean - target| and how far it sits beyond 5 standard errors"""
    trials = samples.shape[0]
    mean = samples.mean(axis=0)
    spread = samples.std(axis=0, ddof=1) / np.sqrt(trials)
    deviation = np.abs(mean - target)
    tolerance = MONTE_CARLO_SIGMAS * spread + 1e-12 * max(float(np.max(np.abs(target))), 1.0)
    return {
        'max_deviation': float(np.max(deviation)),
        'max_standard_error': float(np.max(spread)),
        'worst_excess': float(np.max(deviation - tolerance)),
    }


def flattened_scores(ds: PartitionedDataset, plan: ReplicationPlan, q: int,
                     basis: Optional[OrthonormalBasis] = None) -> np.ndarray:
    """
    Frobenius block scores of the expanded encoded basis, one per server,
    normalized by q / (R d). They are uniform (1/R) when the replication
    reproduces the leverage scores exactly.
    """
    basis = orthonormal_basis(ds) if basis is None else basis
    net = build_network(plan, q=q, tau=ds.tau)
    encoded = expand_dataset(net, PartitionedDataset(A=basis.U, b=np.zeros(ds.N), K=ds.K, tau=ds.tau))
    return frobenius_block_scores(encoded.A, net.m) * q / (plan.R * basis.d)


def check_flattened_scores(ds: PartitionedDataset, plan: ReplicationPlan, q: int,
                           basis: Optional[OrthonormalBasis] = None) -> CheckReport:
    basis = orthonormal_basis(ds) if basis is None else basis
    scores = flattened_scores(ds, plan, q, basis)
    leverage = block_leverage_scores(basis, ds)
    R = plan.R
    beta = plan.induced.misestimation_factor(leverage)
    exact = distortion(leverage, plan.induced) <= 1e-12
    spread = float(np.max(np.abs(scores - 1.0 / R)))
    flat_distortion = float(np.mean(np.abs(scores - 1.0 / R)))
    if exact:
        bound = {'max_abs_gap': EXACT_TOLERANCE}
        passed = spread <= EXACT_TOLERANCE
    else:
        bound = {'distortion': 1.0 / (R * beta) if beta > 0 else float('inf')}
        passed = flat_distortion <= bound['distortion']
    return _finish(CheckReport(
        check='flattened_scores',
        params={'K': ds.K, 'R': R, 'q': q, 'exact': bool(exact)},
        measured={'max_abs_gap': spread, 'distortion': flat_distortion, 'beta': beta,
                  'score_sum': float(np.sum(scores))},
        bound=bound,
        passed=passed,
    ))


def check_weighted_identities(ds: PartitionedDataset, draws: Sequence[SketchDraw],
                              x: Optional[np.ndarray] = None) -> CheckReport:
    """
    Each draw and its duplicate-collapsed weighted form give the same gradient
    and Gram matrix; the Monte Carlo mean of the Gram over all draws
    approaches A^T A.
    """
    x = np.ones(ds.d) if x is None else np.asarray(x, dtype=np.float64)
    worst_gradient = worst_gram = 0.0
    grams = []
    for draw in draws:
        weighted = weighted_collapse(draw)
        gram = sketch_gram(draw, ds)
        grams.append(gram)
        worst_gram = max(worst_gram, _relative_gap(sketch_gram(weighted, ds), gram))
        worst_gradient = max(worst_gradient, _relative_gap(sketch_gradient(weighted, ds, x),
                                                           sketch_gradient(draw, ds, x)))
    unbiased = _monte_carlo_excess(np.array(grams), ds.A.T @ ds.A) if len(grams) > 1 else None
    passed = worst_gradient <= EXACT_TOLERANCE and worst_gram <= EXACT_TOLERANCE
    if unbiased is not None:
        passed = passed and unbiased['worst_excess'] <= 0.0
    return _finish(CheckReport(
        check='weighted_identities',
        params={'draws': len(draws), 'N': ds.N, 'd': ds.d, 'K': ds.K},
        measured={'gradient_gap': worst_gradient, 'gram_gap': worst_gram, 'gram_mean': unbiased},
        bound={'relative_gap': EXACT_TOLERANCE, 'sigmas': MONTE_CARLO_SIGMAS},
        passed=passed,
    ))


def check_expected_sts_identity(dist: SamplingDistribution, q: int, tau: int, trials: int,
                                rng: SeedLike = None, dense_draws: int = 5) -> CheckReport:
    """
    S^T S = diag(c_i / (q p_i)) kron I_tau for block counts c, so its mean is
    I_N exactly when every c_i / (q p_i) averages to one. A few draws are
    materialized densely to confirm the block-diagonal structure.
    """
    rng = make_rng(rng)
    p = dist.p
    counts = block_counts(sample_blocks(p, (trials, q), rng), dist.K)
    diagonal = (counts / (q * p)).mean(axis=0)
    deviation = float(np.max(np.abs(diagonal - 1.0)))
    sigma = np.sqrt((1.0 - p) / (q * p))
    bound = MONTE_CARLO_SIGMAS * float(np.max(sigma)) / np.sqrt(trials)

    structure_gap = 0.0
    for _ in range(dense_draws):
        draw = draw_sketch(dist, q, rng)
        S = materialize_sketch(draw, dist.K, tau)
        single = block_counts(draw.sampled, dist.K)[0] / (q * p)
        structure_gap = max(structure_gap, float(np.max(np.abs(S.T @ S - np.kron(np.diag(single), np.eye(tau))))))

    return _finish(CheckReport(
        check='expected_sts_identity',
        params={'K': dist.K, 'q': q, 'tau': tau, 'N': dist.K * tau, 'trials': trials},
        measured={'max_deviation': deviation, 'structure_gap': structure_gap},
        bound={'max_deviation': bound, 'structure_gap': EXACT_TOLERANCE},
        passed=deviation <= bound and structure_gap <= EXACT_TOLERANCE,
    ))


def check_embedding_vs_srht(ds: PartitionedDataset, qs: Iterable[int], trials: int,
                            rng: SeedLike = None, basis: Optional[OrthonormalBasis] = None) -> CheckReport:
    """Median embedding errors of both sketches at equal q; report only"""
    rng = make_rng(rng)
    basis = orthonormal_basis(ds) if basis is None else basis
    dist = block_leverage_scores(basis, ds)
    rows = []
    for q in qs:
        leverage = [embedding_error(draw_sketch(dist, q, rng, ds=ds), basis, ds) for _ in range(trials)]
        srht = [block_srht_sketch(ds, q, rng).embedding_error(basis) for _ in range(trials)]
        rows.append({'q': int(q), 'block_lvg': float(np.median(leverage)),
                     'block_srht': float(np.median(srht))})
        logger.debug(f"q={q}: median eps block_lvg={rows[-1]['block_lvg']:.4f}, "
                     f"block_srht={rows[-1]['block_srht']:.4f}")
    return _finish(CheckReport(
        check='embedding_vs_srht',
        params={'N': ds.N, 'd': ds.d, 'K': ds.K, 'trials': trials},
        measured={'median_errors': rows},
        bound={},
        passed=True,
    ))


def check_decoding_error_bound(run: SolverRun, ds: PartitionedDataset, slack: float = 1e-9) -> CheckReport:
    """
    Recompute ||g - g^|| <= 2 sqrt(K) err ||A|| ||Ax - b|| for every
    iteration of a coded run, with the implied decoding error err = eps / sqrt(K).
    """
    a_norm = sigma_max(ds.A)
    root_K = np.sqrt(ds.K)
    checked = violations = 0
    worst_ratio = worst_err = 0.0
    for record, x in zip(run.records, run.iterates[:-1]):
        if record.gradient is None or np.isnan(record.embedding_error):
            continue
        decoding_err = record.embedding_error / root_K
        lhs = float(np.linalg.norm(gradient(ds, x) - record.gradient))
        rhs = 2.0 * root_K * decoding_err * a_norm * float(np.linalg.norm(ds.A @ x - ds.b))
        checked += 1
        worst_err = max(worst_err, decoding_err)
        if rhs > 0:
            worst_ratio = max(worst_ratio, lhs / rhs)
        if lhs > rhs * (1.0 + slack) + slack:
            violations += 1
    return _finish(CheckReport(
        check='decoding_error_bound',
        params={'iterations': run.iterations, 'K': ds.K},
        measured={'checked': checked, 'violations': violations, 'max_ratio': worst_ratio,
                  'max_decoding_error': worst_err},
        bound={'violations': 0},
        passed=violations == 0,
    ))


def _round_estimates(ds: PartitionedDataset, net: ExpansionNetwork, model: RuntimeModel, x: np.ndarray,
                     rounds: int, rng: np.random.Generator, q: int) -> np.ndarray:
    """Aggregated gradients of many fastest-q rounds, one row each"""
    responders = simulate_fastest_rounds(net, model, q, rounds, rng)
    weights = block_counts(responders, net.K) / (q * net.induced.p)
    return weights @ all_partial_gradients(ds, x)


def check_unbiased_gradient(ds: PartitionedDataset, net: ExpansionNetwork, model: RuntimeModel,
                            x: np.ndarray, rounds: int, rng: SeedLike = None,
                            q: Optional[int] = None) -> CheckReport:
    rng = make_rng(rng)
    q = net.q if q is None else q
    estimates = _round_estimates(ds, net, model, np.asarray(x, dtype=np.float64), rounds, rng, q)
    summary = _monte_carlo_excess(estimates, gradient(ds, x))
    return _finish(CheckReport(
        check='unbiased_gradient',
        params={'rounds': rounds, 'q': q, 'm': net.m, 'K': net.K},
        measured=summary,
        bound={'sigmas': MONTE_CARLO_SIGMAS},
        passed=summary['worst_excess'] <= 0.0,
    ))


def check_contraction(ds: PartitionedDataset, net: ExpansionNetwork, model: RuntimeModel, xi: float,
                      x: np.ndarray, trials: int, rng: SeedLike = None,
                      q: Optional[int] = None, slack: float = 0.05) -> CheckReport:
    """
    One coded step from x contracts the error in expectation:
    E[x+ - x*] = (I - 2 xi A^T A)(x - x*), whose norm is at most
    max_i |1 - 2 xi sigma_i^2| ||x - x*||.
    """
    rng = make_rng(rng)
    q = net.q if q is None else q
    x = np.asarray(x, dtype=np.float64)
    x_star = exact_solution(ds)
    error = x - x_star
    estimates = _round_estimates(ds, net, model, x, trials, rng, q)
    mean_next = error - xi * estimates.mean(axis=0)
    expected_next = error - 2.0 * xi * ds.A.T @ (ds.A @ error)
    singular = np.linalg.svd(ds.A, compute_uv=False)
    factor = float(np.max(np.abs(1.0 - 2.0 * xi * singular ** 2)))
    measured_norm = float(np.linalg.norm(mean_next))
    limit = factor * float(np.linalg.norm(error)) * (1.0 + slack)
    return _finish(CheckReport(
        check='contraction',
        params={'xi': xi, 'trials': trials, 'q': q},
        measured={'mean_error_norm': measured_norm, 'start_error_norm': float(np.linalg.norm(error)),
                  'gap_to_expected': float(np.linalg.norm(mean_next - expected_next)),
                  'contraction_factor': factor},
        bound={'mean_error_norm': limit},
        passed=measured_norm <= limit,
    ))


def _failure_rate(ds: PartitionedDataset, dist: SamplingDistribution, basis: OrthonormalBasis, q: int,
                  trials: int, threshold: float, rng: np.random.Generator) -> float:
    errors = [embedding_error(draw_sketch(dist, q, rng, ds=ds), basis, ds) for _ in range(trials)]
    return float(np.mean(np.array(errors) > threshold))


def _inversions(rates: Sequence[float]) -> int:
    """Consecutive increases in a sequence expected to be non-increasing"""
    return int(np.sum(np.diff(np.asarray(rates)) > 0))


def check_embedding_trend(ds: PartitionedDataset, qs: Sequence[int], betas: Sequence[float], trials: int,
                          threshold: float = 0.5, rng: SeedLike = None, beta_q: Optional[int] = None,
                          max_q_inversions: int = 1) -> CheckReport:
    """
    Pr[eps > threshold] falls as q grows and rises as beta shrinks.

    The beta sweep deflates the heaviest blocks (misestimation at least beta)
    and reuses one seed for every beta so the rates differ only through the
    distribution.
    """
    rng = make_rng(rng)
    basis = orthonormal_basis(ds)
    dist = block_leverage_scores(basis, ds)
    qs = sorted(int(q) for q in qs)
    q_rates = [_failure_rate(ds, dist, basis, q, trials, threshold, rng) for q in qs]

    beta_q = qs[len(qs) // 2] if beta_q is None else beta_q
    betas = sorted((float(b) for b in betas), reverse=True)
    shared_seed = int(rng.integers(2 ** 32))
    beta_rates, measured_betas = [], []
    for beta in betas:
        deflated = deflate_leading_blocks(dist, beta)
        measured_betas.append(deflated.misestimation_factor(dist))
        beta_rates.append(_failure_rate(ds, deflated, basis, beta_q, trials, threshold, make_rng(shared_seed)))

    q_inversions = _inversions(q_rates)
    # rates must not drop as beta shrinks
    beta_inversions = _inversions([-rate for rate in beta_rates])
    betas_hold = all(m >= b - 1e-12 for m, b in zip(measured_betas, betas))
    return _finish(CheckReport(
        check='embedding_trend',
        params={'qs': qs, 'betas': betas, 'beta_q': beta_q, 'trials': trials, 'threshold': threshold},
        measured={'q_failure_rates': q_rates, 'beta_failure_rates': beta_rates,
                  'measured_betas': measured_betas, 'q_inversions': q_inversions,
                  'beta_inversions': beta_inversions},
        bound={'q_inversions': max_q_inversions, 'beta_inversions': 0},
        passed=q_inversions <= max_q_inversions and beta_inversions == 0 and betas_hold,
    ))


def check_expected_distinct(dist: SamplingDistribution, q: int, trials: int, rng: SeedLike = None,
                            comparisons: int = 20, comparison_K: int = 10,
                            comparison_q: int = 20) -> CheckReport:
    """
    Monte Carlo mean of the number of distinct sampled blocks against
    K - sum (1 - p_i)^q, and the uniform distribution maximizing it among
    random distributions.
    """
    rng = make_rng(rng)
    samples = np.sort(sample_blocks(dist.p, (trials, q), rng), axis=1)
    distinct = 1 + np.sum(np.diff(samples, axis=1) != 0, axis=1)
    expected = expected_distinct(dist, q)
    deviation = abs(float(distinct.mean()) - expected)
    tolerance = MONTE_CARLO_SIGMAS * float(distinct.std(ddof=1)) / np.sqrt(trials) + 1e-12

    uniform_value = expected_distinct(SamplingDistribution.uniform(comparison_K), comparison_q)
    worst_margin = np.inf
    for _ in range(comparisons):
        other = SamplingDistribution.normalized(rng.dirichlet(np.ones(comparison_K)))
        worst_margin = min(worst_margin, uniform_value - expected_distinct(other, comparison_q))
    return _finish(CheckReport(
        check='expected_distinct',
        params={'K': dist.K, 'q': q, 'trials': trials, 'comparisons': comparisons,
                'comparison_K': comparison_K, 'comparison_q': comparison_q},
        measured={'mean_distinct': float(distinct.mean()), 'expected_distinct': expected,
                  'uniform_expected': uniform_value, 'uniform_margin': float(worst_margin)},
        bound={'deviation': tolerance, 'uniform_margin': -1e-12},
        passed=deviation <= tolerance and worst_margin >= -1e-12,
    ))


def check_distortion_bounds(instances: int, rng: SeedLike = None) -> CheckReport:
    """
    Random (P, phi, m): the runtime-rounded replication stays within its
    distortion bound, and the replication fitted to m servers sums to m,
    keeps every block and sits between the floor and ceiling gap bounds.
    """
    rng = make_rng(rng)
    failures = {'rounding': 0, 'sum': 0, 'positive': 0, 'sandwich': 0}
    for _ in range(instances):
        K = int(rng.integers(2, 15))
        P = np.clip(rng.dirichlet(np.full(K, 0.7)), 1e-6, None)
        P = P / P.sum()
        phi = float(rng.uniform(0.05, 0.95))
        m = int(rng.integers(K, 10 * K + 1))

        r_hat = replication_from_runtime(P, phi)
        if delta_distortion(P, phi, r_hat) > rounding_bound(P, phi, r_hat) + 1e-15:
            failures['rounding'] += 1
        r = fit_to_m(P, r_hat, m)
        failures['sum'] += int(r.sum()) != m
        failures['positive'] += bool(np.any(r < 1))
        gaps = np.abs(m * P - r)
        d = distortion(P, r / m)
        lower, upper = np.min(np.floor(gaps)) / m, np.max(np.ceil(gaps)) / m
        if lower > d + 1e-15 or d > upper + 1e-15:
            failures['sandwich'] += 1
    return _finish(CheckReport(
        check='distortion_bounds',
        params={'instances': instances},
        measured={'failures': failures},
        bound={'failures': 0},
        passed=sum(failures.values()) == 0,
    ))


def check_convergence_trend(ds: PartitionedDataset, net: ExpansionNetwork, model: RuntimeModel,
                            horizons: Sequence[int], seeds: int, eta: Optional[float] = None,
                            master_seed: int = 0) -> CheckReport:
    """
    Diminishing steps 1 / (eta s): the median squared distance to x* and the
    median running-average regret both fall across the horizons.
    """
    horizons = sorted(int(S) for S in horizons)
    eta = sigma_max(ds.A) ** 2 if eta is None else eta
    policy = StepPolicy.diminishing(eta)
    x_star = exact_solution(ds)
    errors = {S: [] for S in horizons}
    regrets = {S: [] for S in horizons}
    for trial_rng in trial_rngs(master_seed, seeds):
        run = solve(ds, net, model, policy, horizons[-1], rng=trial_rng, track_bound=False)
        trace = regret_trace(run, ds, x_star)
        for S in horizons:
            errors[S].append(float(np.sum((run.iterates[S] - x_star) ** 2)))
            regrets[S].append(float(trace[S - 1]))
    error_medians = [float(np.median(errors[S])) for S in horizons]
    regret_medians = [float(np.median(regrets[S])) for S in horizons]
    decreasing = all(later < earlier for earlier, later in zip(error_medians, error_medians[1:]))
    return _finish(CheckReport(
        check='convergence_trend',
        params={'horizons': horizons, 'seeds': seeds, 'eta': eta, 'master_seed': master_seed},
        measured={'median_squared_error': error_medians, 'median_regret': regret_medians},
        bound={'decreasing': True},
        passed=decreasing and regret_medians[-1] < regret_medians[0],
    ))


def check_worked_example() -> CheckReport:
    """
    The five-block fixture: exact replication on 20 servers, contiguous
    assignment, leverage scores equal to the fractions, uniform flattened
    scores, and the worked rounds aggregating to the dense sketch gradient.
    """
    plan = perfect_plan(FIVE_BLOCK_FRACTIONS)
    net = build_network(plan, q=FIVE_BLOCK_Q, tau=5)
    ds = five_block_dataset()
    basis = orthonormal_basis(ds)
    scores = block_leverage_scores(basis, ds)
    servers = [[s + 1 for s in net.servers_of(i)] for i in range(net.K)]
    x = np.linspace(-1.0, 1.0, ds.d)

    round_gaps = []
    for responders in FIVE_BLOCK_ROUNDS:
        servers_hit = np.array([net.servers_of(block).start for block in responders])
        outcome = RoundOutcome(responders=np.array(responders), servers=servers_hit,
                               server_times=np.zeros(len(responders)), mode=RoundMode.fastest_q(FIVE_BLOCK_Q))
        S = materialize_sketch(SketchDraw.from_indices(responders, net.induced), ds.K, ds.tau)
        round_gaps.append(_relative_gap(aggregate(outcome, ds, net, x),
                                        dense_sketch_gradient(S, ds.A, ds.b, x)))

    checks = {
        'replication': tuple(int(v) for v in plan.r) == FIVE_BLOCK_REPLICATION,
        'servers': plan.R == FIVE_BLOCK_SERVERS,
        'zero_distortion': plan.distortion == 0.0,
        'scores': float(np.max(np.abs(scores.p - plan.pi.p))) <= 1e-12,
        'flattened': float(np.max(np.abs(flattened_scores(ds, plan, FIVE_BLOCK_Q, basis) - 1.0 / plan.R)))
        <= EXACT_TOLERANCE,
        'rounds': max(round_gaps) <= EXACT_TOLERANCE,
    }
    return _finish(CheckReport(
        check='worked_example',
        params={'fractions': [str(f) for f in FIVE_BLOCK_FRACTIONS], 'q': FIVE_BLOCK_Q},
        measured={'replication': plan.r.tolist(), 'servers': servers, 'round_gaps': round_gaps,
                  'checks': checks},
        bound={'round_gap': EXACT_TOLERANCE},
        passed=all(checks.values()),
    ))
