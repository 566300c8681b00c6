"""
Management command comparing sketches and step sizes over many trials
(table.csv, series.csv, sketch_and_solve.csv, compare.json)
"""

from apps.core.outputs import write_frame, write_json
from apps.experiments.commands import SimulatorCommand
from apps.experiments.pipelines import load_config, output_path, run_compare, sketch_ordering
from apps.solver.sketched import SKETCH_KINDS


class Command(SimulatorCommand):
    help = 'Compare block leverage sampling against the baseline sketches across step scales'

    def add_arguments(self, parser):
        self.add_config_argument(parser)
        self.add_instance_arguments(parser)
        self.add_network_arguments(parser)
        self.add_solver_arguments(parser)
        group = parser.add_argument_group('comparison')
        group.add_argument('--sketches', nargs='+', choices=SKETCH_KINDS)
        group.add_argument('--scales', nargs='+', type=float, help='conservative step multipliers')
        group.add_argument('--include-optimal', action='store_true', default=None,
                           help='add the exact line search arm')

    def flags_from_options(self, options) -> dict:
        flags = super().flags_from_options(options)
        flags['compare'] = {
            'sketches': options.get('sketches'),
            'scales': options.get('scales'),
            'include_optimal': options.get('include_optimal'),
        }
        return flags

    def run(self, **options):
        config = load_config(self.flags_from_options(options), options.get('config_path'))
        table, series, solved = run_compare(config)

        target = write_frame(table, output_path(config, 'table.csv'))
        write_frame(series, output_path(config, 'series.csv'))
        write_frame(solved, output_path(config, 'sketch_and_solve.csv'))
        ordering = sketch_ordering(table)
        write_json(output_path(config, 'compare.json'),
                   {'config': config, 'config_hash': config['config_hash'], 'ordering': ordering})

        for row in table.to_dict(orient='records'):
            self.stdout.write(f"{row['sketch']:>10} {row['policy']:>12} {row['step_scale']:<10.4g} "
                              f"{row['mean_final_log10_residual']:.4f}")
        for arm in ordering:
            self.stdout.write(f"{arm['policy']} {arm['step_scale']}: {' < '.join(arm['ranking'])}")
        self.stdout.write(self.style.SUCCESS(f'Comparison of {len(table)} arms written to {target}'))
