"""
Core Utilities Test Suite
=========================

Covers the error hierarchy, seed streams and the result file helpers.
"""

import tempfile
from pathlib import Path

import numpy as np
import pandas as pd
from django.test import SimpleTestCase

from apps.core.exceptions import (
    ConfigurationError,
    EmptyRoundError,
    PartitionError,
    RankDeficiencyError,
    SimulatorError,
)
from apps.core.outputs import (
    config_hash,
    load_matrix_csv,
    load_vector_csv,
    read_json,
    to_builtin,
    write_frame,
    write_json,
    write_matrix_csv,
)
from apps.core.seeding import keyed_rng, make_rng, split_seeds, trial_rngs


class ExceptionHierarchyTestCase(SimpleTestCase):

    def test_simulator_errors_keep_builtin_bases(self):
        self.assertTrue(issubclass(PartitionError, ValueError))
        self.assertTrue(issubclass(ConfigurationError, SimulatorError))
        self.assertTrue(issubclass(EmptyRoundError, ArithmeticError))

    def test_rank_deficiency_carries_singular_values(self):
        error = RankDeficiencyError('rank deficient', smallest=1e-14, largest=3.0)
        self.assertEqual((error.smallest, error.largest), (1e-14, 3.0))


class SeedingTestCase(SimpleTestCase):
    """Independent, reproducible random streams"""

    def test_make_rng_passes_generators_through(self):
        rng = np.random.default_rng(3)
        self.assertIs(make_rng(rng), rng)

    def test_trial_streams_are_reproducible(self):
        first = [rng.random() for rng in trial_rngs(7, 3)]
        second = [rng.random() for rng in trial_rngs(7, 3)]
        self.assertEqual(first, second)
        self.assertEqual(len(set(first)), 3)

    def test_split_seeds_rejects_negative_count(self):
        with self.assertRaises(ValueError):
            split_seeds(0, -1)

    def test_keyed_stream_ignores_other_keys(self):
        """Stream (2, 1) is the same whether or not other keys were drawn first"""
        keyed_rng(5, 0, 0).random(100)
        a = keyed_rng(5, 2, 1).random(4)
        b = keyed_rng(5, 2, 1).random(4)
        np.testing.assert_array_equal(a, b)
        self.assertFalse(np.array_equal(a, keyed_rng(5, 1, 2).random(4)))


class OutputsTestCase(SimpleTestCase):
    """JSON and CSV helpers write byte-identical files for identical input"""

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.root = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def test_to_builtin_converts_numpy_values(self):
        converted = to_builtin({'a': np.arange(2), 'b': np.float64(np.nan), 'c': (np.int64(3), np.bool_(True)),
                                'd': np.inf})
        self.assertEqual(converted, {'a': [0, 1], 'b': None, 'c': [3, True], 'd': 'inf'})

    def test_config_hash_is_key_order_independent(self):
        self.assertEqual(config_hash({'x': 1, 'y': [1, 2]}), config_hash({'y': [1, 2], 'x': 1}))
        self.assertNotEqual(config_hash({'x': 1}), config_hash({'x': 2}))

    def test_write_json_creates_parents(self):
        target = write_json(self.root / 'nested' / 'out.json', {'b': 1, 'a': np.float64(0.5)})
        self.assertEqual(read_json(target), {'a': 0.5, 'b': 1})
        self.assertTrue(target.read_text().startswith('{\n  "a"'))

    def test_write_frame_is_deterministic(self):
        frame = pd.DataFrame({'iter': [0, 1], 'value': [1.0 / 3.0, np.nan]})
        first = write_frame(frame, self.root / 'one.csv').read_bytes()
        second = write_frame(frame.copy(), self.root / 'two.csv').read_bytes()
        self.assertEqual(first, second)
        self.assertEqual(first.decode().splitlines()[1], '0,0.333333333333')

    def test_matrix_csv_round_trip(self):
        A = np.array([[1.0, -2.5], [1e-3, 4.0], [0.1, 0.2]])
        path = write_matrix_csv(A, self.root / 'A.csv')
        np.testing.assert_array_equal(load_matrix_csv(path), A)

    def test_vector_csv_is_one_entry_per_line(self):
        path = write_matrix_csv(np.array([1.0, 2.0, 3.0]), self.root / 'b.csv')
        self.assertEqual(path.read_text().splitlines(), ['1', '2', '3'])
        np.testing.assert_array_equal(load_vector_csv(path), [1.0, 2.0, 3.0])
