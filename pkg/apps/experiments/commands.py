"""
Shared base for the simulator management commands: flag groups that mirror
ExperimentConfig, flag-to-config mapping and error translation to exit codes.
"""

import logging

from django.core.management.base import BaseCommand, CommandError
from rest_framework import serializers

from apps.core.exceptions import SimulatorError
from apps.solver.sketched import SKETCH_KINDS
from apps.solver.steps import POLICY_KINDS

logger = logging.getLogger(__name__)

EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2


class SimulatorCommand(BaseCommand):
    """
    Subclasses implement ``run(**options)``. Simulator and validation errors
    become ``CommandError`` with exit code 2; a failed check raises exit code 1.
    """

    def handle(self, *args, **options):
        try:
            return self.run(**options)
        except CommandError:
            raise
        except (SimulatorError, serializers.ValidationError, OSError, ValueError) as exc:
            logger.error(f"{self.__module__.rsplit('.', 1)[-1]} failed: {exc}", exc_info=True)
            raise CommandError(str(exc), returncode=EXIT_USAGE)

    def run(self, **options):
        raise NotImplementedError

    def fail_checks(self, message: str):
        raise CommandError(message, returncode=EXIT_CHECK_FAILED)

    def add_config_argument(self, parser):
        parser.add_argument('--config', dest='config_path', help='ExperimentConfig JSON; overrides flags')

    def add_instance_arguments(self, parser):
        group = parser.add_argument_group('instance')
        group.add_argument('--rows', type=int, help='N for the synthetic instance')
        group.add_argument('--columns', type=int, help='d for the synthetic instance')
        group.add_argument('--blocks', type=int, help='number of row blocks K')
        group.add_argument('--dof', type=float, help='t-distribution degrees of freedom')
        group.add_argument('--noise-sigma', type=float, help='observation noise standard deviation')
        group.add_argument('--instance-seed', type=int, help='seed of the synthetic instance')
        group.add_argument('--matrix', help='headerless CSV with the rows of A')
        group.add_argument('--vector', help='headerless CSV with b, one entry per line')

    def add_network_arguments(self, parser):
        group = parser.add_argument_group('network')
        group.add_argument('--servers', type=int, help='number of servers m')
        group.add_argument('--q', type=int, help='responses collected per round')
        group.add_argument('--deadline', type=float, help='ending time T (deadline rounds)')
        group.add_argument('--runtime', help="'shifted-exp:RATE[,SHIFT]' or 'trace:PATH'")
        group.add_argument('--nu', type=float, help='ratio replication scale')

    def add_solver_arguments(self, parser):
        group = parser.add_argument_group('solver')
        group.add_argument('--sketch', choices=SKETCH_KINDS)
        group.add_argument('--policy', choices=POLICY_KINDS)
        group.add_argument('--xi', type=float, help='fixed step size')
        group.add_argument('--step-scale', type=float, help='multiplier of the conservative step')
        group.add_argument('--eta', type=float, help='diminishing step constant')
        group.add_argument('--iterations', type=int)
        group.add_argument('--trials', type=int)
        group.add_argument('--seed', type=int, help='master seed')
        group.add_argument('--output-dir')

    def flags_from_options(self, options) -> dict:
        """Nested ExperimentConfig overrides; unset flags stay None"""
        get = options.get
        return {
            'instance': {
                'n_rows': get('rows'), 'n_columns': get('columns'), 'n_blocks': get('blocks'),
                'dof': get('dof'), 'noise_sigma': get('noise_sigma'), 'seed': get('instance_seed'),
                'matrix_csv': get('matrix'), 'vector_csv': get('vector'),
            },
            'network': {
                'servers': get('servers'), 'q': get('q'), 'deadline': get('deadline'),
                'runtime': get('runtime'), 'nu': get('nu'),
            },
            'policy': {
                'kind': get('policy'), 'xi': get('xi'), 'scale': get('step_scale'), 'eta': get('eta'),
            },
            'sketch': get('sketch'),
            'iterations': get('iterations'),
            'trials': get('trials'),
            'master_seed': get('seed'),
            'output_dir': get('output_dir'),
        }
