"""
Linear Algebra Core Test Suite
==============================

Covers partitioning, bases, leverage scores, exact solutions and the
synthetic instance generator.
"""

import numpy as np
from django.test import SimpleTestCase

from apps.core.exceptions import ConfigurationError, PartitionError, RankDeficiencyError
from apps.linalg import (
    OrthonormalBasis,
    block_leverage_scores,
    exact_solution,
    frobenius_block_scores,
    generate_regression_instance,
    orthonormal_basis,
    partition,
    row_leverage_scores,
    sigma_max,
    symmetric_spectral_norm,
)
from apps.verify.fixtures import five_block_dataset

THREE_ROW = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])


class PartitionTestCase(SimpleTestCase):
    """Row partitioning and zero padding"""

    def test_exact_division(self):
        """4 rows into 2 blocks gives tau=2 and contiguous ranges"""
        ds = partition(np.arange(8.0).reshape(4, 2) + np.eye(4, 2), np.ones(4), 2)
        self.assertEqual(ds.tau, 2)
        self.assertEqual([list(r) for r in ds.block_ranges], [[0, 1], [2, 3]])

    def test_padding_appends_zero_rows(self):
        """5 rows into 2 blocks pads to 6 with a zero last row"""
        A = np.array([[1.0, 2.0], [3.0, 1.0], [0.5, 1.0], [2.0, 2.0], [1.0, 0.0]])
        ds = partition(A, np.arange(5.0), 2)
        self.assertEqual((ds.N, ds.tau, ds.raw_rows), (6, 3, 5))
        A_last, b_last = ds.block(1)
        np.testing.assert_array_equal(A_last[-1], [0.0, 0.0])
        self.assertEqual(b_last[-1], 0.0)

    def test_padding_to_multiple_of_k(self):
        """100 rows with K=7 pads to 105 rows, tau=15"""
        rng = np.random.default_rng(1)
        ds = partition(rng.standard_normal((100, 3)), rng.standard_normal(100), 7)
        self.assertEqual((ds.N, ds.tau), (105, 15))
        for block_range in ds.block_ranges:
            self.assertEqual(len(block_range), 15)

    def test_rejects_more_blocks_than_rows(self):
        with self.assertRaises(PartitionError):
            partition(np.ones((3, 1)), np.ones(3), 4)

    def test_rejects_non_overdetermined(self):
        with self.assertRaises(PartitionError):
            partition(np.eye(4), np.ones(4), 2)

    def test_dataset_is_read_only(self):
        ds = partition(THREE_ROW, np.ones(3), 3)
        with self.assertRaises(ValueError):
            ds.A[0, 0] = 5.0


class OrthonormalBasisTestCase(SimpleTestCase):
    """Pivoted-QR bases"""

    def test_identity_and_scaled_identity(self):
        """I_3 and 5 I_3 span the whole space"""
        for A in (np.eye(3), 5.0 * np.eye(3)):
            basis = orthonormal_basis(A)
            np.testing.assert_allclose(basis.projector(), np.eye(3), atol=1e-12)
            np.testing.assert_allclose(np.abs(basis.U), np.eye(3), atol=1e-12)

    def test_projector_matches_explicit_inverse(self):
        """U U^T equals A (A^T A)^-1 A^T for the 3 x 2 example"""
        basis = orthonormal_basis(THREE_ROW)
        gram_inverse = np.array([[2.0, -1.0], [-1.0, 2.0]]) / 3.0
        np.testing.assert_allclose(basis.projector(), THREE_ROW @ gram_inverse @ THREE_ROW.T, atol=1e-12)
        self.assertEqual(basis.provenance, 'pivoted_qr')

    def test_rank_deficiency_is_an_error(self):
        A = np.array([[1.0, 2.0], [2.0, 4.0], [3.0, 6.0]])
        with self.assertRaises(RankDeficiencyError):
            orthonormal_basis(A)

    def test_non_orthonormal_basis_rejected(self):
        with self.assertRaises(ValueError):
            OrthonormalBasis(U=2.0 * np.eye(3))


class LeverageScoreTestCase(SimpleTestCase):
    """Row, block and Frobenius block scores"""

    def test_identity_rows_are_uniform(self):
        scores = row_leverage_scores(OrthonormalBasis(U=np.eye(4)))
        np.testing.assert_allclose(scores, np.full(4, 0.25))

    def test_three_row_example(self):
        """Each row of the 3 x 2 example has leverage 2/3, so pi = 1/3"""
        basis = orthonormal_basis(THREE_ROW)
        np.testing.assert_allclose(row_leverage_scores(basis), np.full(3, 1.0 / 3.0), atol=1e-12)
        blocks = block_leverage_scores(basis, partition(THREE_ROW, np.ones(3), 3))
        np.testing.assert_allclose(blocks.p, np.full(3, 1.0 / 3.0), atol=1e-12)
        self.assertEqual(blocks.kind, 'exact')

    def test_square_invertible_is_uniform(self):
        A = np.random.default_rng(3).standard_normal((5, 5)) + 5.0 * np.eye(5)
        np.testing.assert_allclose(row_leverage_scores(orthonormal_basis(A)), np.full(5, 0.2), atol=1e-12)

    def test_identity_block_scores(self):
        distribution = block_leverage_scores(OrthonormalBasis(U=np.eye(4)), 2)
        np.testing.assert_allclose(distribution.p, [0.5, 0.5])

    def test_five_block_fixture_scores(self):
        """The five-block fixture has scores (3, 3, 4, 5, 5) / 20"""
        ds = five_block_dataset()
        distribution = block_leverage_scores(orthonormal_basis(ds), ds)
        np.testing.assert_allclose(distribution.p, np.array([3, 3, 4, 5, 5]) / 20.0, atol=1e-12)

    def test_frobenius_scores(self):
        np.testing.assert_allclose(frobenius_block_scores(np.eye(4), 2), [2.0, 2.0])
        M = np.vstack([np.zeros((2, 3)), np.ones((2, 3))])
        np.testing.assert_allclose(frobenius_block_scores(M, 2), [0.0, 6.0])

    def test_block_scores_are_frobenius_over_d(self):
        rng = np.random.default_rng(5)
        ds = partition(rng.standard_t(3, size=(60, 4)), rng.standard_normal(60), 6)
        basis = orthonormal_basis(ds)
        distribution = block_leverage_scores(basis, ds)
        np.testing.assert_allclose(distribution.p, frobenius_block_scores(basis.U, ds) / ds.d, atol=1e-14)
        self.assertAlmostEqual(float(np.sum(row_leverage_scores(basis))), 1.0, places=12)
        self.assertAlmostEqual(float(np.sum(distribution.p)), 1.0, places=12)

    def test_scores_invariant_under_column_mixing(self):
        """Scores of A and A M agree for invertible M"""
        rng = np.random.default_rng(11)
        A = rng.standard_t(2, size=(80, 5))
        M = rng.standard_normal((5, 5)) + 3.0 * np.eye(5)
        first = row_leverage_scores(orthonormal_basis(A))
        second = row_leverage_scores(orthonormal_basis(A @ M))
        np.testing.assert_allclose(first, second, atol=1e-8)

    def test_padded_rows_have_zero_leverage(self):
        rng = np.random.default_rng(2)
        ds = partition(rng.standard_normal((10, 2)), rng.standard_normal(10), 4)
        scores = row_leverage_scores(orthonormal_basis(ds))
        np.testing.assert_allclose(scores[ds.raw_rows:], 0.0, atol=1e-15)


class ExactSolutionTestCase(SimpleTestCase):
    """Least-squares solutions"""

    def test_identity_system(self):
        b = np.array([1.0, -2.0, 3.5])
        np.testing.assert_allclose(exact_solution(np.eye(3), b), b)

    def test_consistent_system(self):
        rng = np.random.default_rng(7)
        A = rng.standard_normal((30, 4))
        b = A @ rng.standard_normal(4)
        x = exact_solution(A, b)
        self.assertLessEqual(np.linalg.norm(A @ x - b), 1e-8 * np.linalg.norm(b))

    def test_matches_normal_equations(self):
        rng = np.random.default_rng(8)
        A = rng.standard_normal((50, 5))
        b = rng.standard_normal(50)
        x = exact_solution(A, b)
        np.testing.assert_allclose(x, np.linalg.solve(A.T @ A, A.T @ b), rtol=1e-8)
        gradient = A.T @ (A @ x - b)
        self.assertLessEqual(np.linalg.norm(gradient), 1e-8 * np.linalg.norm(A.T @ b))

    def test_dataset_input(self):
        ds = five_block_dataset()
        x = exact_solution(ds)
        np.testing.assert_allclose(ds.A.T @ (ds.A @ x - ds.b), 0.0, atol=1e-8)


class RegressionInstanceTestCase(SimpleTestCase):
    """Synthetic t-distributed instances"""

    def test_shape_of_reference_instance(self):
        instance = generate_regression_instance(2000, 40, 3, 1.0, seed=7)
        self.assertEqual(instance.A.shape, (2000, 40))
        self.assertEqual(instance.b.shape, (2000,))

    def test_noiseless_instance_recovers_truth(self):
        instance = generate_regression_instance(200, 6, 4, 0.0, seed=3)
        np.testing.assert_allclose(exact_solution(instance.A, instance.b), instance.x_true, atol=1e-8)

    def test_same_seed_is_bit_identical(self):
        first = generate_regression_instance(100, 4, 3, 1.0, seed=42)
        second = generate_regression_instance(100, 4, 3, 1.0, seed=42)
        np.testing.assert_array_equal(first.A, second.A)
        np.testing.assert_array_equal(first.b, second.b)

    def test_invalid_degrees_of_freedom(self):
        with self.assertRaises(ConfigurationError):
            generate_regression_instance(10, 2, 0, 1.0, seed=1)


class SpectralTestCase(SimpleTestCase):

    def test_symmetric_norm_matches_numpy(self):
        rng = np.random.default_rng(4)
        M = rng.standard_normal((6, 6))
        M = M + M.T
        self.assertAlmostEqual(symmetric_spectral_norm(M), float(np.linalg.norm(M, 2)), places=10)

    def test_power_iteration_sigma_max(self):
        A = np.random.default_rng(9).standard_normal((40, 5))
        self.assertAlmostEqual(sigma_max(A) / np.linalg.norm(A, 2), 1.0, places=8)
