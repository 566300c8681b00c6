"""
Property checks, dense oracles and the named verification suites.
"""

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
    flattened_scores,
)

__all__ = [
    'CheckReport',
    'check_contraction',
    'check_convergence_trend',
    'check_decoding_error_bound',
    'check_distortion_bounds',
    'check_embedding_trend',
    'check_embedding_vs_srht',
    'check_expected_distinct',
    'check_expected_sts_identity',
    'check_flattened_scores',
    'check_unbiased_gradient',
    'check_weighted_identities',
    'check_worked_example',
    'flattened_scores',
]
