"""
Steepest descent over the simulated network, step-size policies and the
sketched reference solvers.
"""

from apps.solver.descent import (
    IterationRecord,
    SolverRun,
    objective_values,
    regret_trace,
    residual_metric,
    solve,
    solve_reference_ssd,
)
from apps.solver.gradients import (
    aggregate,
    all_partial_gradients,
    block_gradients,
    encoded_partial_gradient,
    gradient,
    outcome_to_draw,
    partial_gradient,
)
from apps.solver.sketched import SKETCH_KINDS, sketch_and_solve, sketch_data, sketched_descent
from apps.solver.steps import StepPolicy, optimal_step

__all__ = [
    'IterationRecord',
    'SKETCH_KINDS',
    'SolverRun',
    'StepPolicy',
    'aggregate',
    'all_partial_gradients',
    'block_gradients',
    'encoded_partial_gradient',
    'gradient',
    'objective_values',
    'optimal_step',
    'outcome_to_draw',
    'partial_gradient',
    'regret_trace',
    'residual_metric',
    'sketch_and_solve',
    'sketch_data',
    'sketched_descent',
    'solve',
    'solve_reference_ssd',
]
