"""
Expansion Network Test Suite
============================

Replication design (lcm construction, runtime-based rounding, fitting to m
servers), server assignment, encoding and decoding error.
"""

import itertools
from fractions import Fraction

import numpy as np
from django.test import SimpleTestCase

from apps.core.exceptions import DistributionError, ReplicationError
from apps.expansion import (
    ReplicationPlan,
    build_network,
    delta_distortion,
    design_replication,
    distortion,
    encode_dataset,
    expand_dataset,
    fit_to_m,
    optimal_decoding_error,
    perfect_plan,
    perfect_replication,
    ratio_replication,
    replication_exponents,
    replication_from_runtime,
    rounding_bound,
)
from apps.expansion.serializers import ReplicationPlanSerializer
from apps.linalg import SamplingDistribution
from apps.verify.fixtures import FIVE_BLOCK_FRACTIONS, five_block_dataset

FIVE_BLOCK_P = np.array([3, 3, 4, 5, 5]) / 20.0


class DistortionTestCase(SimpleTestCase):
    """l1 distortion between block distributions"""

    def test_identical_distributions(self):
        self.assertEqual(distortion(FIVE_BLOCK_P, FIVE_BLOCK_P), 0.0)

    def test_two_block_arithmetic(self):
        self.assertAlmostEqual(distortion([0.6, 0.4], [0.5, 0.5]), 0.1)

    def test_symmetry(self):
        P, Q = [0.7, 0.2, 0.1], [0.3, 0.3, 0.4]
        self.assertEqual(distortion(P, Q), distortion(Q, P))

    def test_length_mismatch(self):
        with self.assertRaises(DistributionError):
            distortion([0.5, 0.5], [1.0])


class RuntimeReplicationTestCase(SimpleTestCase):
    """Replication from the survival probability phi(T)"""

    def test_exact_exponent(self):
        """phi=0.5 and Pi=0.75 give rho=2 exactly"""
        self.assertEqual(replication_exponents([0.75], 0.5)[0], 2.0)
        self.assertEqual(replication_from_runtime([0.75], 0.5)[0], 2)

    def test_small_probability_is_clamped(self):
        """rho = log(0.75)/log(0.5) ~ 0.415 rounds to 0 and is clamped to 1"""
        self.assertAlmostEqual(replication_exponents([0.25], 0.5)[0], 0.41503749927884376)
        self.assertEqual(replication_from_runtime([0.25], 0.5)[0], 1)

    def test_five_block_matches_summand_minimizer(self):
        r_hat = replication_from_runtime(FIVE_BLOCK_P, 0.5)
        candidates = np.arange(1, 21)
        for p, r in zip(FIVE_BLOCK_P, r_hat):
            brute = candidates[np.argmin(np.abs(p - (1.0 - 0.5 ** candidates)))]
            self.assertEqual(r, brute)
            self.assertGreaterEqual(r, 1)

    def test_invalid_survival(self):
        for phi in (0.0, 1.0, 1.5):
            with self.assertRaises(ReplicationError):
                replication_from_runtime([0.5, 0.5], phi)

    def test_certain_block_is_rejected(self):
        with self.assertRaises(ReplicationError):
            rounding_bound([1.0], 0.5, [1])

    def test_bound_positive_and_below_k(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            K = int(rng.integers(2, 12))
            P = rng.dirichlet(np.ones(K))
            phi = float(rng.uniform(0.05, 0.95))
            bound = rounding_bound(P, phi, replication_from_runtime(P, phi))
            self.assertGreater(bound, 0.0)
            self.assertLess(bound, K)

    def test_delta_within_bound_across_phi(self):
        for phi in np.arange(1, 10) / 10.0:
            r_hat = replication_from_runtime(FIVE_BLOCK_P, phi)
            self.assertLessEqual(delta_distortion(FIVE_BLOCK_P, phi, r_hat),
                                 rounding_bound(FIVE_BLOCK_P, phi, r_hat))

    def test_delta_examples(self):
        self.assertAlmostEqual(delta_distortion([0.5, 0.75, 0.875], 0.5, [1, 2, 3]), 0.0)
        self.assertAlmostEqual(delta_distortion([0.75, 0.25], 0.5, [2, 1]), 0.125)

    def test_delta_grows_away_from_rho(self):
        P, phi = np.array([0.6, 0.3, 0.1]), 0.4
        rho = replication_exponents(P, phi)
        base = replication_from_runtime(P, phi)
        for i in range(3):
            previous = delta_distortion(P, phi, base)
            for step in range(1, 5):
                r = base.copy()
                r[i] = int(np.ceil(rho[i])) + step
                current = delta_distortion(P, phi, r)
                self.assertGreaterEqual(current, previous - 1e-15)
                previous = current


class PerfectReplicationTestCase(SimpleTestCase):
    """lcm construction for rational distributions"""

    def test_thirds_and_sixths(self):
        R, r = perfect_replication([Fraction(1, 2), Fraction(1, 3), Fraction(1, 6)])
        self.assertEqual(R, 6)
        np.testing.assert_array_equal(r, [3, 2, 1])

    def test_lcm_is_minimal(self):
        """No positive r with smaller total reproduces (1/2, 1/3, 1/6) exactly"""
        target = (Fraction(1, 2), Fraction(1, 3), Fraction(1, 6))
        exact_totals = [
            sum(r) for r in itertools.product(range(1, 11), repeat=3)
            if sum(r) <= 12 and all(Fraction(ri, sum(r)) == t for ri, t in zip(r, target))
        ]
        self.assertEqual(min(exact_totals), 6)

    def test_five_block_fractions(self):
        R, r = perfect_replication(FIVE_BLOCK_FRACTIONS)
        self.assertEqual(R, 20)
        np.testing.assert_array_equal(r, [3, 3, 4, 5, 5])
        self.assertEqual(perfect_plan(FIVE_BLOCK_FRACTIONS).distortion, 0.0)

    def test_halves_and_string_input(self):
        R, r = perfect_replication(['1/2', (1, 2)])
        self.assertEqual(R, 2)
        np.testing.assert_array_equal(r, [1, 1])

    def test_floats_are_rejected(self):
        with self.assertRaises(ReplicationError):
            perfect_replication([0.5, 0.5])

    def test_irrational_surrogate_never_exact(self):
        p = np.array([np.sqrt(2.0), 1.0]) / (1.0 + np.sqrt(2.0))
        totals = np.arange(2, 10_001)
        first = np.clip(np.floor(totals * p[0] + 0.5), 1, totals - 1)
        gaps = np.abs(p[0] - first / totals) + np.abs(p[1] - (totals - first) / totals)
        self.assertGreater(float(np.min(gaps)), 0.0)


class FitToServersTestCase(SimpleTestCase):
    """Fitting an initial replication to exactly m servers"""

    def test_already_fitted(self):
        np.testing.assert_array_equal(fit_to_m([0.5, 0.3, 0.2], [2, 1, 1], 4), [2, 1, 1])

    def test_traced_instance(self):
        np.testing.assert_array_equal(fit_to_m([0.5, 0.3, 0.2], [3, 2, 1], 4), [2, 1, 1])

    def test_traced_instance_does_not_reduce_distortion(self):
        """Fitting can increase distortion: 1/30 after versus 1/45 before"""
        P = np.array([0.5, 0.3, 0.2])
        r_tilde = np.array([3, 2, 1])
        before = distortion(P, r_tilde / r_tilde.sum())
        after = distortion(P, fit_to_m(P, r_tilde, 4) / 4)
        self.assertAlmostEqual(before, 1 / 45)
        self.assertAlmostEqual(after, 1 / 30)
        self.assertGreater(after, before)

    def test_decrements_on_over_replicated_blocks_reduce_distortion(self):
        """Every decrement hits a block with Pi_j < r_j/m, and distortion drops"""
        P = np.array([0.5, 0.3, 0.2])
        r_tilde = np.array([6, 3, 3])
        r = fit_to_m(P, r_tilde, 10)
        np.testing.assert_array_equal(r, [5, 3, 2])
        self.assertLess(distortion(P, r / 10), distortion(P, r_tilde / r_tilde.sum()))

    def test_increments(self):
        r = fit_to_m([0.5, 0.3, 0.2], [1, 1, 1], 10)
        self.assertEqual(int(r.sum()), 10)
        np.testing.assert_array_equal(r, [5, 3, 2])

    def test_five_block_unchanged(self):
        np.testing.assert_array_equal(fit_to_m(FIVE_BLOCK_P, [3, 3, 4, 5, 5], 20), [3, 3, 4, 5, 5])

    def test_too_few_servers(self):
        with self.assertRaises(ReplicationError):
            fit_to_m([0.5, 0.3, 0.2], [1, 1, 1], 2)

    def test_random_instances_satisfy_bounds(self):
        """Sum, positivity, rounding bound and the floor/ceiling sandwich on random instances"""
        rng = np.random.default_rng(1)
        for _ in range(100):
            K = int(rng.integers(2, 15))
            P = rng.dirichlet(np.full(K, 0.7))
            P = np.clip(P, 1e-6, None)
            P = P / P.sum()
            phi = float(rng.uniform(0.05, 0.95))
            m = int(rng.integers(K, 10 * K + 1))
            r_hat = replication_from_runtime(P, phi)
            self.assertLessEqual(delta_distortion(P, phi, r_hat), rounding_bound(P, phi, r_hat) + 1e-15)

            r = fit_to_m(P, r_hat, m)
            self.assertEqual(int(r.sum()), m)
            self.assertTrue(np.all(r >= 1))
            gaps = np.abs(m * P - r)
            d = distortion(P, r / m)
            self.assertLessEqual(np.min(np.floor(gaps)) / m, d + 1e-15)
            self.assertLessEqual(d, np.max(np.ceil(gaps)) / m + 1e-15)


class DesignReplicationTestCase(SimpleTestCase):
    """End-to-end replication design"""

    def test_runtime_design_is_scaled_then_fitted(self):
        P = SamplingDistribution(np.array([0.4, 0.3, 0.2, 0.1]))
        plan = design_replication(P, 200, phi_T=0.5)
        self.assertEqual(plan.R, 200)
        self.assertEqual(plan.method, 'runtime')
        self.assertTrue(np.all(plan.r >= 1))
        self.assertLessEqual(plan.beta, 1.0)

    def test_ratio_and_proportional(self):
        P = np.array([0.1, 0.2, 0.7])
        np.testing.assert_array_equal(ratio_replication(P, 1.0), [1, 2, 7])
        plan = design_replication(P, 10)
        np.testing.assert_array_equal(plan.r, [1, 2, 7])
        self.assertEqual(plan.distortion, 0.0)
        self.assertAlmostEqual(plan.beta, 1.0)
        self.assertEqual(design_replication(P, 30, nu=1.0).R, 30)


class NetworkTestCase(SimpleTestCase):
    """Server assignment and encoding"""

    def setUp(self):
        """Perfect five-block plan on 20 servers with q=3"""
        self.plan = perfect_plan(FIVE_BLOCK_FRACTIONS)
        self.net = build_network(self.plan, q=3, tau=5)

    def test_contiguous_assignment(self):
        expected = [0] * 3 + [1] * 3 + [2] * 4 + [3] * 5 + [4] * 5
        np.testing.assert_array_equal(self.net.assignment, expected)
        self.assertEqual(list(self.net.servers_of(3)), list(range(10, 15)))
        np.testing.assert_array_equal(np.bincount(self.net.assignment), self.plan.r)

    def test_encoding_scales(self):
        np.testing.assert_allclose(self.net.encoding_scales, 1.0 / np.sqrt(3 * FIVE_BLOCK_P))
        self.assertAlmostEqual(self.net.gradient_weights()[3], 4.0 / 3.0)

    def test_single_block_network(self):
        plan = ReplicationPlan.from_counts([1.0], [3])
        net = build_network(plan, q=2, tau=4)
        np.testing.assert_array_equal(net.assignment, [0, 0, 0])
        np.testing.assert_allclose(net.encoding_scales, [1.0 / np.sqrt(2.0)])

    def test_stored_rows_match_expansion(self):
        ds = five_block_dataset()
        expanded = expand_dataset(self.net, ds)
        self.assertEqual(expanded.N, self.net.stored_rows)
        self.assertEqual(expanded.K, 20)
        encoded = encode_dataset(self.net, ds)
        np.testing.assert_allclose(expanded.A_blocks[12], encoded.A_blocks[3])
        np.testing.assert_allclose(encoded.A_blocks[3], ds.A_blocks[3] * self.net.encoding_scales[3])

    def test_server_count_mismatch(self):
        with self.assertRaises(ReplicationError):
            build_network(self.plan, q=3, tau=5, m=21)
        with self.assertRaises(ReplicationError):
            build_network(self.plan, q=25, tau=5)


class DecodingErrorTestCase(SimpleTestCase):
    """Optimal decoding error of a responding encoding submatrix"""

    def test_identity(self):
        self.assertAlmostEqual(optimal_decoding_error(np.eye(4)), 0.0, places=12)

    def test_full_column_rank(self):
        G = np.random.default_rng(2).standard_normal((6, 4))
        self.assertAlmostEqual(optimal_decoding_error(G), 0.0, places=10)

    def test_rank_deficient_matches_svd_oracle(self):
        rng = np.random.default_rng(3)
        G = rng.standard_normal((3, 2)) @ rng.standard_normal((2, 5))
        _, singular_values, Vt = np.linalg.svd(G)
        rank = int(np.sum(singular_values > 1e-10 * singular_values[0]))
        oracle = np.linalg.norm(np.eye(5) - Vt[:rank].T @ Vt[:rank], 2)
        self.assertAlmostEqual(optimal_decoding_error(G), oracle, places=10)

    def test_zero_matrix(self):
        with self.assertRaises(ReplicationError):
            optimal_decoding_error(np.zeros((2, 3)))


class ReplicationPlanSerializerTestCase(SimpleTestCase):
    """plan.json layout"""

    def test_representation(self):
        data = ReplicationPlanSerializer(perfect_plan(FIVE_BLOCK_FRACTIONS)).data
        self.assertEqual(data['r'], [3, 3, 4, 5, 5])
        self.assertEqual(data['m'], 20)
        self.assertEqual(data['distortion'], 0.0)
        self.assertAlmostEqual(data['beta'], 1.0)
        self.assertEqual(len(data['pi']), 5)

    def test_round_trip(self):
        serializer = ReplicationPlanSerializer(data={'pi': [0.5, 0.3, 0.2], 'r': [2, 1, 1], 'm': 4})
        self.assertTrue(serializer.is_valid(), serializer.errors)
        plan = serializer.save()
        np.testing.assert_array_equal(plan.r, [2, 1, 1])
        self.assertAlmostEqual(plan.distortion, 1 / 30)

    def test_server_total_must_match(self):
        serializer = ReplicationPlanSerializer(data={'pi': [0.5, 0.5], 'r': [2, 1], 'm': 4})
        self.assertFalse(serializer.is_valid())
        self.assertIn('m', serializer.errors)
