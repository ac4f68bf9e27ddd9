"""Exact linear assignment: the matching step, Q-to-pi transfer and rounding.

Gains are maximized. ``solve_lap(G)`` returns ``pi`` maximizing
``sum_i G[i, pi[i]]``, i.e. ``<P, G>`` for the permutation matrix of ``pi``.
"""

from __future__ import annotations

import warnings

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import min_weight_full_bipartite_matching
from scipy.spatial import cKDTree

from .errors import DimensionError
from .model import as_cloud

BISTOCHASTIC_ROUND_TOL = 1e-6


def as_gain(gain) -> np.ndarray:
    G = np.asarray(gain, dtype=np.float64)
    if G.ndim != 2 or G.shape[0] != G.shape[1] or G.shape[0] == 0:
        raise DimensionError(f"gain must be a non-empty square matrix, got shape {G.shape}")
    if not np.all(np.isfinite(G)):
        raise DimensionError("gain has non-finite entries")
    return G


def assignment_value(gain, pi) -> float:
    G = np.asarray(gain, dtype=np.float64)
    return float(G[np.arange(G.shape[0]), pi].sum())


def solve_lap(gain) -> tuple[np.ndarray, float]:
    """Maximum-gain perfect assignment in O(n^3) (Jonker-Volgenant)."""
    G = as_gain(gain)
    rows, cols = linear_sum_assignment(G, maximize=True)
    pi = np.empty(G.shape[0], dtype=np.int64)
    pi[rows] = cols
    return pi, assignment_value(G, pi)


def _check_pair(X, Y, Q):
    X = as_cloud(X, "X")
    Y = as_cloud(Y, "Y")
    if X.shape != Y.shape:
        raise DimensionError(f"X has shape {X.shape} but Y has shape {Y.shape}")
    Q = np.asarray(Q, dtype=np.float64)
    if Q.shape != (X.shape[0], X.shape[0]):
        raise DimensionError(f"Q must be {X.shape[0]} x {X.shape[0]}, got {Q.shape}")
    return X, Y, Q


def _greedy_perfect_matching(rows, cols, weights, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Cheapest-first matching on the given edges, completed arbitrarily."""
    row_to = np.full(n, -1, dtype=np.int64)
    col_used = np.zeros(n, dtype=bool)
    for e in np.argsort(weights, kind="stable"):
        r, c = rows[e], cols[e]
        if row_to[r] < 0 and not col_used[c]:
            row_to[r] = c
            col_used[c] = True
    free_rows = np.flatnonzero(row_to < 0)
    row_to[free_rows] = np.flatnonzero(~col_used)
    return np.arange(n), row_to


def _sparse_match(X: np.ndarray, Yr: np.ndarray, neighbors: int) -> np.ndarray:
    n = X.shape[1]
    k = min(neighbors, n)
    # k nearest x for every rotated y, and k nearest rotated y for every x
    _, fwd = cKDTree(X.T).query(Yr.T, k=k)
    _, bwd = cKDTree(Yr.T).query(X.T, k=k)
    rows = np.concatenate([np.repeat(np.arange(n), k), bwd.reshape(-1)])
    cols = np.concatenate([fwd.reshape(-1), np.repeat(np.arange(n), k)])
    cost = np.sum((Yr[:, rows] - X[:, cols]) ** 2, axis=0)
    # A greedy perfect matching guarantees feasibility; proving infeasibility
    # of a bare k-NN graph is far slower than solving a feasible one.
    g_rows, g_cols = _greedy_perfect_matching(rows, cols, cost, n)
    rows = np.concatenate([rows, g_rows])
    cols = np.concatenate([cols, g_cols])
    # duplicates collapse by keeping one copy; +1 keeps every stored edge
    # strictly positive and a constant shift leaves the optimum unchanged
    key = np.unique(rows * n + cols)
    rows, cols = key // n, key % n
    weights = np.sum((Yr[:, rows] - X[:, cols]) ** 2, axis=0) + 1.0
    graph = csr_matrix((weights, (rows, cols)), shape=(n, n))
    row_ind, col_ind = min_weight_full_bipartite_matching(graph)
    pi = np.empty(n, dtype=np.int64)
    pi[row_ind] = col_ind
    return pi


def match_clouds(X, Y, Q, neighbors: int | None = None) -> np.ndarray:
    """Permutation minimizing ``(1/n) sum_i ||x[pi(i)] - Q^T y_i||^2``.

    Solved as the LAP with gain ``G[i, j] = <x_j, Q^T y_i>``. With
    ``neighbors=k`` the assignment is restricted to the ``k`` nearest
    ``x_j`` of each ``Q^T y_i``, the reverse neighbor edges, and the
    edges of a greedy perfect matching (so a solution always exists). This
    is the only tractable route for clouds of tens of thousands of points
    but is exact only when the optimum uses those edges.
    """
    X, Y, Q = _check_pair(X, Y, Q)
    if neighbors is not None:
        if neighbors < 1:
            raise ValueError("neighbors must be a positive integer")
        return _sparse_match(X, Q.T @ Y, int(neighbors))
    pi, _ = solve_lap(Y.T @ Q @ X)
    return pi


def round_to_permutation(D) -> np.ndarray:
    """Nearest permutation to a bistochastic matrix, ``argmax_P <P, D>``."""
    D = as_gain(D)
    rows_ok = np.allclose(D.sum(axis=1), 1.0, atol=BISTOCHASTIC_ROUND_TOL, rtol=0)
    cols_ok = np.allclose(D.sum(axis=0), 1.0, atol=BISTOCHASTIC_ROUND_TOL, rtol=0)
    if not (rows_ok and cols_ok):
        warnings.warn("rounding a matrix that is not bistochastic", RuntimeWarning, stacklevel=2)
    pi, _ = solve_lap(D)
    return pi
