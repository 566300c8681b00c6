"""
Block leverage score sketches, weighted sketches and baseline sketches.
"""

from apps.sketching.baselines import BlockSRHTSketch, block_srht_sketch, fwht, gaussian_sketch
from apps.sketching.draws import (
    SketchDraw,
    WeightedSketchDraw,
    apply_sketch,
    block_counts,
    deflate_leading_blocks,
    draw_sketch,
    embedding_error,
    expected_distinct,
    perturb_distribution,
    sample_blocks,
    sketch_gradient,
    sketch_gram,
    weighted_collapse,
)

__all__ = [
    'BlockSRHTSketch',
    'SketchDraw',
    'WeightedSketchDraw',
    'apply_sketch',
    'block_counts',
    'deflate_leading_blocks',
    'block_srht_sketch',
    'draw_sketch',
    'embedding_error',
    'expected_distinct',
    'fwht',
    'gaussian_sketch',
    'perturb_distribution',
    'sample_blocks',
    'sketch_gradient',
    'sketch_gram',
    'weighted_collapse',
]
