"""
Experiment Pipelines Engine
===========================

Pure functions from a validated ExperimentConfig (and its master seed) to
result tables, shared by the management commands.

Features:
- configuration loading: settings defaults < command-line flags < --config JSON
- dataset construction (synthetic or CSV), network design and runtime model
- block leverage score summaries and replication design tables
- single coded or sketched solve
- multi-trial comparison of sketches and step scales, plus sketch-and-solve
- ranking of the sketches within each comparison arm
"""

import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from apps.core.exceptions import ConfigurationError
from apps.core.outputs import config_hash, load_matrix_csv, load_vector_csv, read_json
from apps.core.seeding import keyed_rng
from apps.expansion.network import ExpansionNetwork, design_network
from apps.expansion.replication import (
    ReplicationPlan,
    delta_distortion,
    design_replication,
    fit_to_m,
    perfect_plan,
    replication_from_runtime,
    rounding_bound,
)
from apps.expansion.serializers import ReplicationPlanSerializer
from apps.linalg.bases import OrthonormalBasis, exact_solution, orthonormal_basis
from apps.linalg.datasets import PartitionedDataset, generate_regression_instance, partition
from apps.linalg.scores import SamplingDistribution, block_leverage_scores
from apps.sketching.draws import expected_distinct
from apps.solver.descent import RESIDUAL_FLOOR, SolverRun, residual_metric, solve
from apps.solver.sketched import BLOCK_LVG, sketch_and_solve, sketched_descent
from apps.solver.steps import StepPolicy
from apps.stragglers.rounds import RoundMode
from apps.stragglers.runtime import RuntimeModel, parse_runtime_spec, responders_at, survival
from apps.experiments.serializers import ExperimentConfigSerializer

logger = logging.getLogger(__name__)

TABLE_COLUMNS = ['sketch', 'policy', 'step_scale', 'mean_final_log10_residual',
                 'median_final_log10_residual', 'trials']
SERIES_COLUMNS = ['sketch', 'policy', 'step_scale', 'iter', 'mean_log10_residual']
SKETCH_AND_SOLVE_COLUMNS = ['sketch', 'trial', 'log10_residual', 'objective_ratio']
DESIGN_COLUMNS = ['T', 'survival', 'q_T', 'R_hat', 'delta', 'delta_bound', 'distortion', 'beta',
                  'additive_eps', 'method']


def _merge(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    merged = dict(base)
    for key, value in override.items():
        if isinstance(value, dict):
            merged[key] = _merge(merged.get(key) or {}, value)
        elif value is not None:
            merged[key] = value
    return merged


def load_config(flags: Optional[Dict[str, Any]] = None, config_path: Optional[str] = None) -> Dict[str, Any]:
    """
    Validate an ExperimentConfig. Settings supply the defaults, ``flags``
    (nested like the JSON, None meaning unset) override them and a JSON file
    at ``config_path`` overrides both.
    """
    raw = _merge({}, flags or {})
    if config_path is not None:
        try:
            raw = _merge(raw, read_json(config_path))
        except (OSError, ValueError) as exc:
            raise ConfigurationError(f"cannot read config {config_path}: {exc}")
    serializer = ExperimentConfigSerializer(data=raw)
    if not serializer.is_valid():
        raise ConfigurationError(f"invalid experiment configuration: {dict(serializer.errors)}")
    config = _plain(serializer.validated_data)
    config['config_hash'] = config_hash(config)
    return config


def _plain(value):
    if isinstance(value, dict):
        return {key: _plain(item) for key, item in value.items()}
    if isinstance(value, list):
        return [_plain(item) for item in value]
    return value


def build_dataset(instance: Dict[str, Any]) -> PartitionedDataset:
    if instance.get('matrix_csv'):
        A = load_matrix_csv(instance['matrix_csv'])
        b = load_vector_csv(instance['vector_csv'])
        return partition(A, b, instance['n_blocks'])
    generated = generate_regression_instance(instance['n_rows'], instance['n_columns'], instance['dof'],
                                             instance['noise_sigma'], seed=instance['seed'])
    return generated.partitioned(instance['n_blocks'])


def check_dataset(config: Dict[str, Any], ds: PartitionedDataset):
    """Cross-field checks that need the loaded data (CSV instances)"""
    network = config['network']
    if network['q'] * ds.tau <= ds.d:
        raise ConfigurationError(f"q*tau={network['q'] * ds.tau} must exceed d={ds.d}")
    if network['servers'] < ds.K:
        raise ConfigurationError(f"servers={network['servers']} cannot store K={ds.K} blocks")


def build_runtime(network: Dict[str, Any], ds: PartitionedDataset) -> RuntimeModel:
    """Runtime model on the subtask time axis, task scale tau / N"""
    return parse_runtime_spec(network['runtime'], task_scale=ds.tau / ds.N)


def build_policy(policy: Dict[str, Any]) -> StepPolicy:
    return StepPolicy(kind=policy['kind'], xi=policy.get('xi'), scale=policy.get('scale', 1.0),
                      eta=policy.get('eta'))


def round_mode(network: Dict[str, Any]) -> RoundMode:
    if network.get('deadline') is not None:
        return RoundMode.deadline(network['deadline'])
    return RoundMode.fastest_q(network['q'])


def build_experiment_network(network: Dict[str, Any], ds: PartitionedDataset, model: RuntimeModel,
                             scores: Optional[SamplingDistribution] = None) -> ExpansionNetwork:
    """Leverage-score network; a deadline switches to runtime-based replication"""
    scores = block_leverage_scores(orthonormal_basis(ds), ds) if scores is None else scores
    phi_T = None
    if network.get('deadline') is not None:
        phi_T = float(survival(model, network['deadline']))
        if not 0.0 < phi_T < 1.0:
            logger.warning(f"Survival {phi_T:.3g} at T={network['deadline']} is degenerate, "
                           f"falling back to proportional replication")
            phi_T = None
    return design_network(scores, network['servers'], network['q'], ds.tau, phi_T=phi_T, nu=network.get('nu'))


def score_summary(ds: PartitionedDataset, q: Optional[int] = None,
                  basis: Optional[OrthonormalBasis] = None) -> Dict[str, Any]:
    """Block leverage scores with concentration statistics"""
    basis = orthonormal_basis(ds) if basis is None else basis
    scores = block_leverage_scores(basis, ds)
    p = scores.p
    summary = {
        'N': ds.N,
        'd': ds.d,
        'K': ds.K,
        'tau': ds.tau,
        'raw_rows': ds.raw_rows,
        'scores': p.tolist(),
        'stats': {
            'min': float(p.min()),
            'max': float(p.max()),
            'coherence': float(ds.K * p.max()),
            'effective_blocks': float(1.0 / np.sum(p ** 2)),
        },
    }
    if q is not None:
        summary['stats']['expected_distinct'] = expected_distinct(scores, q)
    return summary


def scores_from_json(path: str) -> SamplingDistribution:
    try:
        payload = read_json(path)
        return SamplingDistribution(np.asarray(payload['scores'], dtype=np.float64), kind='exact')
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise ConfigurationError(f"cannot read scores from {path}: {exc}")


def _design_row(plan: ReplicationPlan, T: Optional[float], phi_T: Optional[float], q_T: Optional[int]) -> Dict:
    delta = bound = np.nan
    R_hat = int(plan.initial.sum()) if plan.initial is not None else plan.R
    if phi_T is not None and plan.method == 'runtime':
        # metrics of the unscaled runtime rounding r^
        r_hat = replication_from_runtime(plan.pi, phi_T)
        delta = delta_distortion(plan.pi, phi_T, r_hat)
        bound = rounding_bound(plan.pi, phi_T, r_hat)
        R_hat = int(r_hat.sum())
    return {
        'T': np.nan if T is None else float(T),
        'survival': np.nan if phi_T is None else float(phi_T),
        'q_T': np.nan if q_T is None else int(q_T),
        'R_hat': R_hat,
        'delta': delta,
        'delta_bound': bound,
        'distortion': plan.distortion,
        'beta': plan.beta,
        'additive_eps': plan.additive_eps,
        'method': plan.method,
    }


def design_table(scores: SamplingDistribution, m: int, model: Optional[RuntimeModel],
                 deadlines: Sequence[float], nu: Optional[float] = None) -> Tuple[pd.DataFrame, List[Dict]]:
    """
    One replication design per deadline (a single proportional or ratio
    design when no deadline is given), with q(T) = floor(F~(T) m) and the
    accuracy metrics of each plan.
    """
    rows, plans = [], []
    for T in (deadlines or [None]):
        phi_T = q_T = None
        if T is not None:
            if model is None:
                raise ConfigurationError("deadlines need a runtime model")
            phi_T = float(survival(model, T))
            q_T = responders_at(model, T, m)
            if not 0.0 < phi_T < 1.0:
                logger.warning(f"Survival {phi_T:.3g} at T={T} is degenerate, using proportional replication")
                phi_T = None
        plan = design_replication(scores, m, phi_T=phi_T, nu=nu)
        rows.append(_design_row(plan, T, phi_T, q_T))
        plans.append({'T': T, 'q_T': q_T, 'plan': dict(ReplicationPlanSerializer(plan).data)})
    return pd.DataFrame(rows, columns=DESIGN_COLUMNS), plans


def perfect_design(fractions: Sequence[str], m: Optional[int] = None) -> ReplicationPlan:
    """Exact replication from rational scores, fitted to m servers when m differs from R"""
    plan = perfect_plan(fractions)
    if m is None or m == plan.R:
        return plan
    return ReplicationPlan.from_counts(plan.pi, fit_to_m(plan.pi, plan.r, m), method='perfect', initial=plan.r)


def run_solve(config: Dict[str, Any], ds: Optional[PartitionedDataset] = None) -> Tuple[pd.DataFrame, SolverRun]:
    """
    One run of the configured solver: the coded network solve for block
    leverage sampling, iterative sketching for the baselines.
    """
    ds = build_dataset(config['instance']) if ds is None else ds
    check_dataset(config, ds)
    network = config['network']
    policy = build_policy(config['policy'])
    rng = keyed_rng(config['master_seed'], 0)
    if config['sketch'] == BLOCK_LVG:
        model = build_runtime(network, ds)
        net = build_experiment_network(network, ds, model)
        run = solve(ds, net, model, policy, config['iterations'], q=network['q'], rng=rng,
                    mode=round_mode(network), config={'config_hash': config['config_hash']})
    else:
        run = sketched_descent(ds, config['sketch'], policy, config['iterations'], network['q'], rng=rng)
    frame = run.to_dataframe(exact_solution(ds))
    logger.info(f"Solve finished: final log10 residual {frame['log10_residual'].iloc[-1] if len(frame) else np.nan}")
    return frame, run


def _compare_arms(config: Dict[str, Any]) -> List[Tuple[str, StepPolicy, float]]:
    arms = [('conservative', StepPolicy.conservative(scale), scale) for scale in config['compare']['scales']]
    if config['compare']['include_optimal']:
        arms.append(('optimal', StepPolicy.optimal(), np.nan))
    return arms


def run_compare(config: Dict[str, Any], ds: Optional[PartitionedDataset] = None
                ) -> Tuple[pd.DataFrame, pd.DataFrame, pd.DataFrame]:
    """
    Every (sketch, step) arm over ``trials`` seeds: final log residual table,
    iteration-wise mean series, and one sketch-and-solve solution per sketch
    and trial. Trial t of arm (i, j) draws from stream (t, i, j) of the
    master seed.
    """
    ds = build_dataset(config['instance']) if ds is None else ds
    check_dataset(config, ds)
    basis = orthonormal_basis(ds)
    dist = block_leverage_scores(basis, ds)
    x_star = exact_solution(ds)
    q, trials, master = config['network']['q'], config['trials'], config['master_seed']
    sketches = config['compare']['sketches']

    table, series = [], []
    for i, sketch in enumerate(sketches):
        for j, (label, policy, scale) in enumerate(_compare_arms(config)):
            residuals = []
            for t in range(trials):
                run = sketched_descent(ds, sketch, policy, config['iterations'], q,
                                       rng=keyed_rng(master, t, i, j), dist=dist)
                residuals.append(residual_metric(run, x_star))
            residuals = np.array(residuals)
            finals = residuals[:, -1]
            table.append({'sketch': sketch, 'policy': label, 'step_scale': scale,
                          'mean_final_log10_residual': float(finals.mean()),
                          'median_final_log10_residual': float(np.median(finals)), 'trials': trials})
            for s, value in enumerate(residuals.mean(axis=0)):
                series.append({'sketch': sketch, 'policy': label, 'step_scale': scale, 'iter': s,
                               'mean_log10_residual': float(value)})
            logger.info(f"{sketch} / {label} {scale}: mean final log10 residual {finals.mean():.4f}")

    optimum = ds.objective(x_star)
    solved = []
    for i, sketch in enumerate(sketches):
        for t in range(trials):
            x_hat = sketch_and_solve(ds, sketch, q, rng=keyed_rng(master, t, i, len(_compare_arms(config))),
                                     dist=dist)
            distance = np.linalg.norm(x_hat - x_star) / np.sqrt(ds.N)
            with np.errstate(divide='ignore'):
                log_residual = max(float(np.log10(distance)), RESIDUAL_FLOOR)
            solved.append({'sketch': sketch, 'trial': t, 'log10_residual': log_residual,
                           'objective_ratio': ds.objective(x_hat) / optimum if optimum > 0 else np.nan})
    return (pd.DataFrame(table, columns=TABLE_COLUMNS), pd.DataFrame(series, columns=SERIES_COLUMNS),
            pd.DataFrame(solved, columns=SKETCH_AND_SOLVE_COLUMNS))


def sketch_ordering(table: pd.DataFrame) -> List[Dict[str, Any]]:
    """
    Sketches of every (policy, step scale) arm ranked by mean final log
    residual, best first, with the gap between block leverage sampling and
    the best other sketch (negative when block leverage sampling leads).
    """
    ordering = []
    for (label, scale), arm in table.groupby(['policy', 'step_scale'], dropna=False, sort=False):
        ranked = arm.sort_values(['mean_final_log10_residual', 'sketch'], kind='mergesort')
        means = dict(zip(ranked['sketch'], ranked['mean_final_log10_residual']))
        others = [value for sketch, value in means.items() if sketch != BLOCK_LVG]
        gap = means[BLOCK_LVG] - min(others) if BLOCK_LVG in means and others else None
        ordering.append({'policy': label, 'step_scale': None if pd.isna(scale) else float(scale),
                         'ranking': list(means), 'block_lvg_gap': gap})
    return ordering


def output_path(config: Dict[str, Any], name: str, override: Optional[str] = None) -> Path:
    return Path(override) if override else Path(config['output_dir']) / name
