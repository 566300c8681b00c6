"""
Experiment Commands Test Suite
==============================

Covers configuration loading and validation, the management commands'
output files, exit codes and run-to-run determinism.
"""

import json
import tempfile
from io import StringIO
from pathlib import Path
from unittest.mock import patch

import numpy as np
import pandas as pd
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase, tag

from apps.core.exceptions import ConfigurationError
from apps.experiments.pipelines import load_config, run_compare, sketch_ordering
from apps.experiments.serializers import ExperimentConfigSerializer
from apps.verify.checks import CheckReport

SMALL_INSTANCE = ['--rows', '120', '--columns', '4', '--blocks', '12', '--instance-seed', '3']
SMALL_NETWORK = ['--servers', '24', '--q', '6']


class ExperimentConfigTestCase(SimpleTestCase):
    """Defaults, precedence and cross-field validation"""

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.root = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def test_defaults_come_from_settings(self):
        config = load_config()
        self.assertEqual(config['sketch'], 'block_lvg')
        self.assertEqual(config['instance']['n_blocks'], 100)
        self.assertEqual(config['network']['runtime'], 'shifted-exp:1.0,0.0')
        self.assertEqual(len(config['config_hash']), 64)

    def test_json_file_overrides_flags(self):
        path = self.root / 'config.json'
        path.write_text(json.dumps({'network': {'q': 30}, 'iterations': 5}))
        config = load_config({'network': {'q': 10, 'servers': 400}, 'iterations': 50}, str(path))
        self.assertEqual(config['network']['q'], 30)
        self.assertEqual(config['network']['servers'], 400)
        self.assertEqual(config['iterations'], 5)

    def test_unset_flags_keep_defaults(self):
        config = load_config({'instance': {'n_rows': None}, 'policy': {'kind': None}})
        self.assertEqual(config['instance']['n_rows'], 2000)
        self.assertEqual(config['policy']['kind'], 'conservative')

    def test_hash_tracks_configuration(self):
        self.assertEqual(load_config()['config_hash'], load_config()['config_hash'])
        self.assertNotEqual(load_config()['config_hash'], load_config({'master_seed': 9})['config_hash'])

    def test_q_must_not_exceed_servers(self):
        serializer = ExperimentConfigSerializer(data={'network': {'servers': 120, 'q': 150}})
        self.assertFalse(serializer.is_valid())
        self.assertIn('network', serializer.errors)

    def test_sketch_must_embed(self):
        """q * tau = 2 * 20 does not exceed d = 40"""
        serializer = ExperimentConfigSerializer(data={'network': {'q': 2}})
        self.assertFalse(serializer.is_valid())

    def test_every_block_needs_a_server(self):
        serializer = ExperimentConfigSerializer(data={'network': {'servers': 60, 'q': 50}})
        self.assertFalse(serializer.is_valid())

    def test_policy_constants(self):
        serializer = ExperimentConfigSerializer(data={'policy': {'kind': 'fixed'}})
        self.assertFalse(serializer.is_valid())
        serializer = ExperimentConfigSerializer(data={'policy': {'kind': 'diminishing', 'eta': 0.5}})
        self.assertTrue(serializer.is_valid(), serializer.errors)

    def test_bad_runtime_spec(self):
        serializer = ExperimentConfigSerializer(data={'network': {'runtime': 'weibull:2'}})
        self.assertFalse(serializer.is_valid())

    def test_unreadable_config_file(self):
        with self.assertRaises(ConfigurationError):
            load_config(config_path=str(self.root / 'missing.json'))

    def test_csv_instances_need_both_files(self):
        serializer = ExperimentConfigSerializer(data={'instance': {'matrix_csv': 'A.csv'}})
        self.assertFalse(serializer.is_valid())


class SketchOrderingTestCase(SimpleTestCase):
    """Ranking of sketches inside each comparison arm"""

    def test_ranks_best_first_per_arm(self):
        table = pd.DataFrame({
            'sketch': ['block_lvg', 'gaussian', 'none'] * 2,
            'policy': ['conservative'] * 3 + ['optimal'] * 3,
            'step_scale': [0.42] * 3 + [np.nan] * 3,
            'mean_final_log10_residual': [-2.6, -2.5, -16.0, -3.0, -3.1, -16.0],
        })
        ordering = sketch_ordering(table)
        self.assertEqual(len(ordering), 2)
        self.assertEqual(ordering[0]['step_scale'], 0.42)
        self.assertEqual(ordering[0]['ranking'], ['none', 'block_lvg', 'gaussian'])
        self.assertAlmostEqual(ordering[0]['block_lvg_gap'], 13.4)
        self.assertIsNone(ordering[1]['step_scale'])
        self.assertEqual(ordering[1]['ranking'], ['none', 'gaussian', 'block_lvg'])

    def test_gap_needs_another_sketch(self):
        table = pd.DataFrame({'sketch': ['block_lvg'], 'policy': ['conservative'], 'step_scale': [0.1],
                              'mean_final_log10_residual': [-2.0]})
        self.assertIsNone(sketch_ordering(table)[0]['block_lvg_gap'])

    @tag('slow')
    def test_fixed_step_comparison_on_default_instance(self):
        """
        Same fixed step for every sketch: exact descent reaches the residual
        floor, the unbiased sketches stall together at a noise floor set by
        the step size.
        """
        config = load_config({'iterations': 300, 'trials': 6,
                              'compare': {'sketches': ['block_lvg', 'gaussian', 'block_srht', 'none'],
                                          'scales': [0.4207], 'include_optimal': False}})
        table, _, _ = run_compare(config)
        means = table.set_index('sketch')['mean_final_log10_residual']
        sketched = means[['block_lvg', 'gaussian', 'block_srht']]
        self.assertLess(means['none'], sketched.min() - 5.0)
        self.assertLess(sketched.max(), -1.5)
        self.assertLess(sketched.max() - sketched.min(), 0.2)
        ranking = sketch_ordering(table)[0]['ranking']
        self.assertEqual(ranking[0], 'none')


class CommandTestCase(SimpleTestCase):
    """Management commands write their files under a temporary results directory"""

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.root = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def call(self, name, *args):
        out = StringIO()
        call_command(name, *args, stdout=out, stderr=StringIO())
        return out.getvalue()

    def test_scores_command(self):
        target = self.root / 'scores.json'
        self.call('scores', *SMALL_INSTANCE, '--expected-q', '6', '--output', str(target))
        payload = json.loads(target.read_text())
        self.assertEqual(payload['K'], 12)
        self.assertAlmostEqual(sum(payload['scores']), 1.0, places=12)
        self.assertLessEqual(payload['stats']['expected_distinct'], 6.0)
        self.assertIn('config_hash', payload)

    def test_design_from_scores_with_deadlines(self):
        scores = self.root / 'scores.json'
        self.call('scores', *SMALL_INSTANCE, '--output', str(scores))
        plan_path = self.root / 'plan.json'
        self.call('design', '--scores', str(scores), '--servers', '60', '--task-scale', '1',
                  '--deadline', '0.5', '--deadline', '1.5', '--output', str(plan_path))
        payload = json.loads(plan_path.read_text())
        self.assertEqual(len(payload['plans']), 2)
        for entry in payload['plans']:
            self.assertEqual(sum(entry['plan']['r']), 60)
            self.assertTrue(all(count >= 1 for count in entry['plan']['r']))
        design = pd.read_csv(self.root / 'design.csv')
        self.assertEqual(list(design['method']), ['runtime', 'runtime'])
        self.assertTrue(design['delta'].notna().all())
        # shifted exponential: floor((1 - e^-T) * 60)
        self.assertEqual(list(design['q_T']), [23, 46])

    def test_design_task_scale_defaults_to_one_block(self):
        """K = 12 blocks: deadlines 6 and 18 land at 0.5 and 1.5 on the mother distribution"""
        scores = self.root / 'scores.json'
        self.call('scores', *SMALL_INSTANCE, '--output', str(scores))
        plan_path = self.root / 'plan.json'
        self.call('design', '--scores', str(scores), '--servers', '60', '--deadline', '6',
                  '--deadline', '18', '--output', str(plan_path))
        self.assertAlmostEqual(json.loads(plan_path.read_text())['params']['task_scale'], 1.0 / 12)
        design = pd.read_csv(self.root / 'design.csv')
        self.assertEqual(list(design['q_T']), [23, 46])

    def test_design_from_fractions(self):
        plan_path = self.root / 'plan.json'
        self.call('design', '--fractions', '3/20', '3/20', '4/20', '5/20', '5/20', '--servers', '20',
                  '--output', str(plan_path))
        plan = json.loads(plan_path.read_text())['plans'][0]['plan']
        self.assertEqual(plan['r'], [3, 3, 4, 5, 5])
        self.assertEqual(plan['beta'], 1.0)
        self.assertEqual(plan['distortion'], 0.0)

    def test_design_needs_servers_for_scores(self):
        scores = self.root / 'scores.json'
        self.call('scores', *SMALL_INSTANCE, '--output', str(scores))
        with self.assertRaises(CommandError) as raised:
            self.call('design', '--scores', str(scores), '--output', str(self.root / 'plan.json'))
        self.assertEqual(raised.exception.returncode, 2)

    def test_solve_writes_run_files(self):
        self.call('solve', *SMALL_INSTANCE, *SMALL_NETWORK, '--iterations', '15', '--output-dir', str(self.root))
        run = pd.read_csv(self.root / 'run.csv')
        self.assertEqual(list(run['iter']), list(range(1, 16)))
        self.assertTrue((run['q_responded'] == 6).all())
        manifest = json.loads((self.root / 'run.json').read_text())
        self.assertEqual(manifest['iterations'], 15)
        self.assertEqual(manifest['config_hash'], manifest['config']['config_hash'])
        self.assertEqual(len(manifest['x_final']), 4)

    def test_solve_is_deterministic(self):
        first, second = self.root / 'first', self.root / 'second'
        for directory in (first, second):
            self.call('solve', *SMALL_INSTANCE, *SMALL_NETWORK, '--iterations', '10', '--seed', '4',
                      '--output-dir', str(directory))
        self.assertEqual((first / 'run.csv').read_bytes(), (second / 'run.csv').read_bytes())

    def test_solve_with_deadline_rounds(self):
        self.call('solve', *SMALL_INSTANCE, *SMALL_NETWORK, '--deadline', '2.0', '--iterations', '10',
                  '--output-dir', str(self.root))
        run = pd.read_csv(self.root / 'run.csv')
        self.assertEqual(len(run), 10)

    def test_sketched_baseline_solve(self):
        self.call('solve', *SMALL_INSTANCE, *SMALL_NETWORK, '--sketch', 'gaussian', '--iterations', '10',
                  '--output-dir', str(self.root))
        self.assertEqual(len(pd.read_csv(self.root / 'run.csv')), 10)

    def test_invalid_configuration_exits_with_usage_code(self):
        with self.assertRaises(CommandError) as raised:
            self.call('solve', *SMALL_INSTANCE, '--servers', '24', '--q', '30', '--output-dir', str(self.root))
        self.assertEqual(raised.exception.returncode, 2)

    def test_compare_writes_tables(self):
        self.call('compare', *SMALL_INSTANCE, *SMALL_NETWORK, '--iterations', '10', '--trials', '2',
                  '--sketches', 'block_lvg', 'gaussian', '--scales', '0.1', '0.25',
                  '--output-dir', str(self.root))
        table = pd.read_csv(self.root / 'table.csv')
        self.assertEqual(len(table), 4)
        self.assertTrue((table['trials'] == 2).all())
        series = pd.read_csv(self.root / 'series.csv')
        self.assertEqual(len(series), 4 * 11)
        solved = pd.read_csv(self.root / 'sketch_and_solve.csv')
        self.assertEqual(len(solved), 4)
        self.assertTrue((solved['objective_ratio'] >= 1.0 - 1e-9).all())
        ordering = json.loads((self.root / 'compare.json').read_text())['ordering']
        self.assertEqual([arm['step_scale'] for arm in ordering], [0.1, 0.25])
        for arm in ordering:
            self.assertEqual(sorted(arm['ranking']), ['block_lvg', 'gaussian'])

    def test_compare_is_deterministic(self):
        first, second = self.root / 'first', self.root / 'second'
        for directory in (first, second):
            self.call('compare', *SMALL_INSTANCE, *SMALL_NETWORK, '--iterations', '5', '--trials', '2',
                      '--sketches', 'block_lvg', '--scales', '0.25', '--include-optimal',
                      '--output-dir', str(directory))
        for name in ('table.csv', 'series.csv', 'sketch_and_solve.csv'):
            self.assertEqual((first / name).read_bytes(), (second / name).read_bytes())

    def test_verify_worked_example(self):
        target = self.root / 'reports.json'
        output = self.call('verify', '--suite', 'worked-example', '--output', str(target))
        self.assertIn('PASS', output)
        reports = json.loads(target.read_text())['reports']
        self.assertEqual(len(reports), 1)
        self.assertTrue(reports[0]['pass'])

    def test_verify_failure_exits_with_check_code(self):
        failing = [CheckReport(check='always_fails', params={}, measured={'gap': 1.0}, bound={'gap': 0.0},
                               passed=False)]
        with patch('apps.experiments.management.commands.verify.run_suite', return_value=failing):
            with self.assertRaises(CommandError) as raised:
                self.call('verify', '--suite', 'weighted', '--output', str(self.root / 'reports.json'))
        self.assertEqual(raised.exception.returncode, 1)
        self.assertFalse(json.loads((self.root / 'reports.json').read_text())['reports'][0]['pass'])
