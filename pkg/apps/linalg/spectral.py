"""Spectral norms for the small dense matrices the simulator inspects."""

import logging

import numpy as np

logger = logging.getLogger(__name__)

POWER_TOLERANCE = 1e-10
POWER_MAX_ITERATIONS = 10_000


def _power_iteration(apply, dim: int, tol: float, max_iter: int) -> float:
    """Largest |eigenvalue| of a symmetric operator given as a matvec."""
    vector = np.random.default_rng(0).standard_normal(dim)
    vector /= np.linalg.norm(vector)
    estimate = 0.0
    for iteration in range(max_iter):
        image = apply(vector)
        norm = float(np.linalg.norm(image))
        if norm == 0.0:
            return 0.0
        vector = image / norm
        if abs(norm - estimate) <= tol * max(norm, 1.0):
            return norm
        estimate = norm
    logger.warning(f"Power iteration stopped after {max_iter} iterations without reaching tol={tol}")
    return estimate


def symmetric_spectral_norm(M: np.ndarray, tol: float = POWER_TOLERANCE,
                            max_iter: int = POWER_MAX_ITERATIONS) -> float:
    """||M||_2 for symmetric M via eigvalsh, with power iteration as fallback."""
    M = np.asarray(M, dtype=np.float64)
    try:
        eigenvalues = np.linalg.eigvalsh(M)
        return float(np.max(np.abs(eigenvalues)))
    except np.linalg.LinAlgError:
        logger.warning("eigvalsh failed, falling back to power iteration", exc_info=True)
        return _power_iteration(lambda v: M @ v, M.shape[0], tol, max_iter)


def sigma_max(A: np.ndarray, tol: float = POWER_TOLERANCE, max_iter: int = POWER_MAX_ITERATIONS) -> float:
    """Largest singular value of A by power iteration on A^T A."""
    A = np.asarray(A, dtype=np.float64)
    top = _power_iteration(lambda v: A.T @ (A @ v), A.shape[1], tol, max_iter)
    return float(np.sqrt(top))
