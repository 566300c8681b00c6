"""
Management command computing block leverage scores (scores.json)
"""

import numpy as np

from apps.core.outputs import config_hash, load_matrix_csv, write_json
from apps.experiments.commands import SimulatorCommand
from apps.experiments.pipelines import build_dataset, load_config, output_path, score_summary
from apps.linalg.datasets import partition


class Command(SimulatorCommand):
    help = 'Compute block leverage scores of a CSV matrix or the synthetic instance'

    def add_arguments(self, parser):
        parser.add_argument('--input', help='headerless CSV matrix A; omit to use the synthetic instance')
        parser.add_argument('--output', help='scores.json path (default: <output-dir>/scores.json)')
        parser.add_argument('--expected-q', type=int, help='also report expected distinct blocks for q draws')
        self.add_config_argument(parser)
        self.add_instance_arguments(parser)
        parser.add_argument('--output-dir')

    def run(self, **options):
        config = load_config(self.flags_from_options(options), options.get('config_path'))
        if options.get('input'):
            A = load_matrix_csv(options['input'])
            ds = partition(A, np.zeros(A.shape[0]), config['instance']['n_blocks'])
            source = {'input': options['input'], 'K': config['instance']['n_blocks']}
        else:
            ds = build_dataset(config['instance'])
            source = {'instance': config['instance']}

        summary = score_summary(ds, q=options.get('expected_q'))
        summary['source'] = source
        summary['config_hash'] = config_hash(source)
        target = write_json(output_path(config, 'scores.json', options.get('output')), summary)
        stats = summary['stats']
        self.stdout.write(self.style.SUCCESS(
            f"K={ds.K} block leverage scores written to {target} "
            f"(min {stats['min']:.4g}, max {stats['max']:.4g}, coherence {stats['coherence']:.3f})"
        ))
