"""
Management command running one coded (or sketched) solve (run.csv, run.json)
"""

from apps.core.outputs import write_frame, write_json
from apps.experiments.commands import SimulatorCommand
from apps.experiments.pipelines import load_config, output_path, run_solve


class Command(SimulatorCommand):
    help = 'Run the block leverage score coded solver (or a sketching baseline) once'

    def add_arguments(self, parser):
        self.add_config_argument(parser)
        self.add_instance_arguments(parser)
        self.add_network_arguments(parser)
        self.add_solver_arguments(parser)

    def run(self, **options):
        config = load_config(self.flags_from_options(options), options.get('config_path'))
        frame, run = run_solve(config)

        target = write_frame(frame, output_path(config, 'run.csv'))
        manifest = {
            'config': config,
            'config_hash': config['config_hash'],
            'iterations': run.iterations,
            'final_log10_residual': float(frame['log10_residual'].iloc[-1]) if len(frame) else None,
            'bound_violations': run.bound_violations(),
            'x_final': run.final,
        }
        write_json(output_path(config, 'run.json'), manifest)
        self.stdout.write(self.style.SUCCESS(
            f"{config['sketch']} solve with {run.iterations} iterations written to {target}"
        ))
