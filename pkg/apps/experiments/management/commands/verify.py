"""
Management command running the property verification suites (reports.json)
"""

from pathlib import Path

from django.conf import settings

from apps.core.outputs import write_json
from apps.experiments.commands import SimulatorCommand
from apps.verify.serializers import CheckReportSerializer
from apps.verify.suites import ALL, SUITE_NAMES, run_suite


class Command(SimulatorCommand):
    help = 'Run a named verification suite (or all) and exit non-zero when a check fails'

    def add_arguments(self, parser):
        parser.add_argument('--suite', choices=SUITE_NAMES, default=ALL)
        parser.add_argument('--seed', type=int, help='master seed (default from VERIFICATION_CONFIG)')
        parser.add_argument('--output', help='reports.json path (default: <results>/reports.json)')

    def run(self, **options):
        reports = run_suite(options['suite'], master_seed=options.get('seed'))
        payload = CheckReportSerializer(reports, many=True).data
        output = Path(options.get('output') or Path(settings.RESULTS_DIR) / 'reports.json')
        write_json(output, {'suite': options['suite'], 'seed': options.get('seed'), 'reports': payload})

        failed = [report for report in reports if not report.passed]
        for report in reports:
            status = self.style.SUCCESS('PASS') if report.passed else self.style.ERROR('FAIL')
            self.stdout.write(f"{status} {report.check}")
        if failed:
            self.fail_checks(f"{len(failed)} of {len(reports)} checks failed: "
                             f"{', '.join(report.check for report in failed)}")
        self.stdout.write(self.style.SUCCESS(f'All {len(reports)} checks passed, reports written to {output}'))
