"""
Dense brute-force oracles for small instances.

These materialize sketching and expansion matrices explicitly so the
structured implementations can be compared against plain matrix products.
"""

import numpy as np

from apps.sketching.draws import AnyDraw

MAX_ORACLE_ROWS = 256


def _check_size(N: int):
    if N > MAX_ORACLE_ROWS:
        raise ValueError(f"dense oracles are limited to N <= {MAX_ORACLE_ROWS}, got N={N}")


def selection_matrix(blocks: np.ndarray, K: int) -> np.ndarray:
    """Rows e_i^T for each sampled block index i (q x K)"""
    blocks = np.asarray(blocks, dtype=np.int64)
    omega = np.zeros((blocks.shape[0], K))
    omega[np.arange(blocks.shape[0]), blocks] = 1.0
    return omega


def materialize_sketch(draw: AnyDraw, K: int, tau: int) -> np.ndarray:
    """Dense S = (D Omega) kron I_tau with r = (number of kept blocks) * tau rows"""
    _check_size(K * tau)
    omega = selection_matrix(draw.blocks, K)
    return np.kron(np.diag(draw.scales) @ omega, np.eye(tau))


def expansion_matrix(replication: np.ndarray, tau: int) -> np.ndarray:
    """Binary matrix repeating block i r_i times (R tau x K tau)"""
    replication = np.asarray(replication, dtype=np.int64)
    blocks = np.repeat(np.arange(replication.shape[0]), replication)
    return np.kron(selection_matrix(blocks, replication.shape[0]), np.eye(tau))


def dense_sketch_gradient(S: np.ndarray, A: np.ndarray, b: np.ndarray, x: np.ndarray) -> np.ndarray:
    """2 (SA)^T (SA) x - 2 (SA)^T (Sb)"""
    A_hat, b_hat = S @ A, S @ b
    return 2.0 * A_hat.T @ A_hat @ x - 2.0 * A_hat.T @ b_hat
