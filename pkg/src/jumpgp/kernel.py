"""Stationary covariance evaluation and covariance-matrix assembly.

The covariance is an anisotropic squared exponential with one lengthscale
per input dimension. Self-covariance matrices carry the observation noise
on their diagonal, so `cov_matrix(A, A, kp)` is the matrix that appears in
the predictive equations and the likelihood.
"""

import numpy as np
from scipy.linalg import cho_solve, solve_triangular

from .core import DimensionMismatchError, KernelParams, NotPositiveDefiniteError

__all__ = ["se_cov", "cov_matrix", "cholesky_with_jitter", "chol_logdet"]

#: Relative jitter ladder tried when a Cholesky factorization fails.
JITTER_START = 1e-10
JITTER_GROWTH = 10.0
JITTER_RETRIES = 3


def se_cov(x, x2, kp: KernelParams) -> float:
    """Squared-exponential covariance between two points.

    Returns signal_variance * exp(-0.5 * sum_d ((x_d - x2_d) / l_d)^2).
    Symmetric in its arguments; never includes observation noise.
    """
    x = np.asarray(x, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    if x.shape != x2.shape or x.shape[-1] != kp.p:
        raise DimensionMismatchError(
            f"points of dimension {x.shape} vs {x2.shape} with p={kp.p}"
        )
    z = (x - x2) / kp.lengthscales
    return float(kp.signal_variance * np.exp(-0.5 * np.dot(z, z)))


def sq_dists(A, B, lengthscales) -> np.ndarray:
    """Matrix of scaled squared distances sum_d ((a_d - b_d)/l_d)^2."""
    A = np.asarray(A, dtype=float) / lengthscales
    B = np.asarray(B, dtype=float) / lengthscales
    # (a-b)^2 = a^2 + b^2 - 2ab, clipped against round-off
    d2 = (
        np.sum(A * A, axis=1)[:, None]
        + np.sum(B * B, axis=1)[None, :]
        - 2.0 * (A @ B.T)
    )
    return np.maximum(d2, 0.0)


def cov_matrix(A, B, kp: KernelParams) -> np.ndarray:
    """Covariance matrix between two point sets.

    Element (i, j) is ``se_cov(A[i], B[j], kp)``. When the two sets are the
    same (same object or equal arrays) the observation noise variance is
    added to the diagonal, producing the self-covariance of noisy
    observations.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    if A.shape[1] != kp.p or B.shape[1] != kp.p:
        raise DimensionMismatchError(
            f"point sets of width {A.shape[1]} and {B.shape[1]} with p={kp.p}"
        )
    K = kp.signal_variance * np.exp(-0.5 * sq_dists(A, B, kp.lengthscales))
    if A is B or (A.shape == B.shape and np.array_equal(A, B)):
        K[np.diag_indices_from(K)] += kp.noise_variance
    return K


def cholesky_with_jitter(C: np.ndarray, signal_variance: float) -> np.ndarray:
    """Lower Cholesky factor of C, adding escalating diagonal jitter if needed.

    Tries the bare factorization first, then jitter of
    ``1e-10 * signal_variance`` growing tenfold for up to three retries.

    Raises
    ------
    NotPositiveDefiniteError
        If the matrix still fails after the final jitter level.
    """
    try:
        return np.linalg.cholesky(C)
    except np.linalg.LinAlgError:
        pass
    jitter = JITTER_START * signal_variance
    eye = np.eye(C.shape[0])
    for _ in range(JITTER_RETRIES):
        try:
            return np.linalg.cholesky(C + jitter * eye)
        except np.linalg.LinAlgError:
            jitter *= JITTER_GROWTH
    raise NotPositiveDefiniteError(
        f"covariance matrix of size {C.shape[0]} is not positive definite "
        f"(final jitter {jitter / JITTER_GROWTH:.3e})"
    )


def chol_logdet(L: np.ndarray) -> float:
    """log-determinant of the matrix whose lower Cholesky factor is L."""
    return float(2.0 * np.sum(np.log(np.diag(L))))


def chol_solve_vec(L: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve C x = b given the lower Cholesky factor L of C."""
    return cho_solve((L, True), b, check_finite=False)


def half_solve(L: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve L w = b; useful for quadratic forms b' C^-1 b = w' w."""
    return solve_triangular(L, b, lower=True, check_finite=False)
