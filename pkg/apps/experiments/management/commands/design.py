"""
Management command designing replication plans (plan.json, design.csv)
"""

from pathlib import Path

import pandas as pd
from django.conf import settings

from apps.core.exceptions import ConfigurationError
from apps.core.outputs import config_hash, write_frame, write_json
from apps.expansion.serializers import ReplicationPlanSerializer
from apps.experiments.commands import SimulatorCommand
from apps.experiments.pipelines import DESIGN_COLUMNS, design_table, perfect_design, scores_from_json
from apps.stragglers.runtime import parse_runtime_spec


class Command(SimulatorCommand):
    help = 'Design the replication of block leverage scores over m servers, one row per deadline'

    def add_arguments(self, parser):
        source = parser.add_mutually_exclusive_group(required=True)
        source.add_argument('--scores', help='scores.json written by the scores command')
        source.add_argument('--fractions', nargs='+', help="exact scores as reduced fractions, e.g. 3/20")
        parser.add_argument('--servers', type=int, help='number of servers m')
        parser.add_argument('--runtime', help="'shifted-exp:RATE[,SHIFT]' or 'trace:PATH'")
        parser.add_argument('--task-scale', type=float,
                            help='time-axis scale tau / N of a subtask (default 1 / K, as in solve)')
        parser.add_argument('--deadline', type=float, action='append', default=[],
                            help='ending time T; repeat for several rows')
        parser.add_argument('--nu', type=float, help='ratio replication scale when no deadline is given')
        parser.add_argument('--output', help='plan.json path (default: <results>/plan.json)')

    def run(self, **options):
        output = Path(options.get('output') or Path(settings.RESULTS_DIR) / 'plan.json')
        m = options.get('servers')
        params = {key: options.get(key) for key in ('scores', 'fractions', 'servers', 'runtime',
                                                     'task_scale', 'deadline', 'nu')}

        if options.get('fractions'):
            plan = perfect_design(options['fractions'], m)
            table = pd.DataFrame([{
                'R_hat': plan.R if plan.initial is None else int(plan.initial.sum()), 'distortion': plan.distortion, 'beta': plan.beta,
                'additive_eps': plan.additive_eps, 'method': plan.method,
            }], columns=DESIGN_COLUMNS)
            plans = [{'T': None, 'q_T': None, 'plan': dict(ReplicationPlanSerializer(plan).data)}]
        else:
            if m is None:
                raise ConfigurationError('--servers is required with --scores')
            scores = scores_from_json(options['scores'])
            if m < scores.K:
                raise ConfigurationError(f"servers={m} cannot store K={scores.K} blocks")
            runtime = options.get('runtime') or settings.SIMULATION_CONFIG['runtime']
            # uniform blocks: tau / N = 1 / K
            task_scale = options.get('task_scale')
            if task_scale is None:
                task_scale = 1.0 / scores.K
            params['task_scale'] = task_scale
            model = parse_runtime_spec(runtime, task_scale=task_scale)
            table, plans = design_table(scores, m, model, options['deadline'], nu=options.get('nu'))

        write_json(output, {'params': params, 'config_hash': config_hash(params),
                            'rows': table.to_dict(orient='records'), 'plans': plans})
        write_frame(table, output.with_name('design.csv'))
        for row in table.to_dict(orient='records'):
            self.stdout.write(f"{row['method']}: distortion={row['distortion']:.3e}, beta={row['beta']:.4f}, "
                              f"q(T)={row['q_T']}")
        self.stdout.write(self.style.SUCCESS(f'Replication plans written to {output}'))
