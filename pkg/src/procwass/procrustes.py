"""Closed-form orthogonal Procrustes and polar projection."""

from __future__ import annotations

import numpy as np

from .errors import DimensionError, NumericalError
from .model import as_cloud, as_permutation


def polar_project(M) -> np.ndarray:
    """Nearest orthogonal matrix to ``M`` in Frobenius norm, ``U V^T``.

    For rank-deficient ``M`` the result is one of several minimizers.
    """
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise NumericalError("cannot polar-project a matrix with non-finite entries")
    try:
        U, _, Vt = np.linalg.svd(M)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"SVD did not converge: {exc}") from exc
    return U @ Vt


def _check_clouds(X, Y):
    X = as_cloud(X, "X")
    Y = as_cloud(Y, "Y")
    if X.shape != Y.shape:
        raise DimensionError(f"X has shape {X.shape} but Y has shape {Y.shape}")
    return X, Y


def cross_covariance(X, Y, pi) -> np.ndarray:
    """``sum_i y_i x[pi(i)]^T``, i.e. ``Y P X^T``."""
    X, Y = _check_clouds(X, Y)
    pi = as_permutation(pi, X.shape[1])
    return Y @ X[:, pi].T


def optimal_rotation(X, Y, pi) -> np.ndarray:
    """``argmin_{Q in O(d)} sum_i ||x[pi(i)] - Q^T y_i||^2``."""
    return polar_project(cross_covariance(X, Y, pi))


def alignment_objective(X, Y, pi, Q) -> float:
    """The joint ML loss ``(1/n) sum_i ||x[pi(i)] - Q^T y_i||^2``."""
    X, Y = _check_clouds(X, Y)
    pi = as_permutation(pi, X.shape[1])
    Q = np.asarray(Q, dtype=np.float64)
    if Q.shape != (X.shape[0], X.shape[0]):
        raise DimensionError(f"Q must be {X.shape[0]} x {X.shape[0]}, got {Q.shape}")
    R = X[:, pi] - Q.T @ Y
    return float(np.sum(R * R) / X.shape[1])
