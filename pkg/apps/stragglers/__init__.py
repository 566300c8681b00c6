"""
Runtime models of homogeneous servers and simulated response rounds.
"""

from apps.stragglers.rounds import RoundMode, RoundOutcome, simulate_fastest_rounds, simulate_round
from apps.stragglers.runtime import (
    RuntimeModel,
    load_trace,
    parse_runtime_spec,
    responders_at,
    sample,
    scaled_cdf,
    straggler_ratio_table,
    survival,
)

__all__ = [
    'RoundMode',
    'RoundOutcome',
    'RuntimeModel',
    'load_trace',
    'parse_runtime_spec',
    'responders_at',
    'sample',
    'scaled_cdf',
    'simulate_fastest_rounds',
    'simulate_round',
    'straggler_ratio_table',
    'survival',
]
