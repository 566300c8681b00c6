"""
Replication design and expansion networks that turn uniform straggler
arrivals into importance sampling.
"""

from apps.expansion.network import (
    ExpansionNetwork,
    build_network,
    design_network,
    encode_dataset,
    expand_dataset,
    optimal_decoding_error,
)
from apps.expansion.replication import (
    ReplicationPlan,
    delta_distortion,
    design_replication,
    distortion,
    fit_to_m,
    perfect_plan,
    perfect_replication,
    proportional_replication,
    ratio_replication,
    replication_exponents,
    replication_from_runtime,
    round_half_up,
    rounding_bound,
)

__all__ = [
    'ExpansionNetwork',
    'ReplicationPlan',
    'build_network',
    'design_network',
    'delta_distortion',
    'design_replication',
    'distortion',
    'encode_dataset',
    'expand_dataset',
    'fit_to_m',
    'optimal_decoding_error',
    'perfect_plan',
    'perfect_replication',
    'proportional_replication',
    'ratio_replication',
    'replication_exponents',
    'replication_from_runtime',
    'round_half_up',
    'rounding_bound',
]
