"""Brute-force reference solvers for verification on tiny inputs."""

from __future__ import annotations

import itertools

import numpy as np

from .assignment import as_gain
from .errors import DimensionError, SizeCapError
from .model import as_cloud, as_permutation

MAX_EXHAUSTIVE_N = 9


def _all_permutations(n: int) -> np.ndarray:
    if n > MAX_EXHAUSTIVE_N:
        raise SizeCapError(f"exhaustive search is capped at n = {MAX_EXHAUSTIVE_N}, got n = {n}")
    return np.array(list(itertools.permutations(range(n))), dtype=np.int64)


def exhaustive_lap(gain) -> tuple[np.ndarray, float]:
    """Best assignment by enumerating all ``n!`` permutations."""
    G = as_gain(gain)
    perms = _all_permutations(G.shape[0])
    values = G[np.arange(G.shape[0]), perms].sum(axis=1)
    best = int(np.argmax(values))
    return perms[best], float(values[best])


def brute_force_mle(X, Y) -> tuple[np.ndarray, np.ndarray, float]:
    """Global minimizer of ``(1/n) sum_i ||x[pi(i)] - Q^T y_i||^2`` over S_n x O(d)."""
    X = as_cloud(X, "X")
    Y = as_cloud(Y, "Y")
    if X.shape != Y.shape:
        raise DimensionError(f"X has shape {X.shape} but Y has shape {Y.shape}")
    n = X.shape[1]
    perms = _all_permutations(n)
    best = (None, None, np.inf)
    for block in np.array_split(perms, max(1, len(perms) // 4096)):
        # cross-covariances Y X[:, pi]^T for the whole block
        M = np.einsum("ai,bpi->pab", Y, X[:, block])
        U, _, Vt = np.linalg.svd(M)
        Q = U @ Vt
        R = X[:, block].transpose(1, 0, 2) - np.einsum("pba,bi->pai", Q, Y)
        obj = np.einsum("pai,pai->p", R, R) / n
        k = int(np.argmin(obj))
        if obj[k] < best[2]:
            best = (block[k].copy(), Q[k].copy(), float(obj[k]))
    return best


def grid_rotation_search(X, Y, pi, resolution: float) -> tuple[np.ndarray, float]:
    """Best element of O(2), both components, on an angular grid of step ``resolution``."""
    X = as_cloud(X, "X")
    Y = as_cloud(Y, "Y")
    if X.shape[0] != 2 or Y.shape != X.shape:
        raise DimensionError("grid_rotation_search needs two 2 x n clouds")
    if not resolution > 0:
        raise ValueError("resolution must be positive")
    n = X.shape[1]
    pi = as_permutation(pi, n)
    Xp = X[:, pi]
    theta = np.arange(0.0, 2 * np.pi, resolution)
    c, s = np.cos(theta), np.sin(theta)
    best_Q, best_obj = None, np.inf
    for sign in (1.0, -1.0):
        # [[c, -s], [s, c]] for rotations, [[c, s], [s, -c]] for reflections
        Qs = np.empty((theta.size, 2, 2))
        Qs[:, 0, 0] = c
        Qs[:, 0, 1] = -sign * s
        Qs[:, 1, 0] = s
        Qs[:, 1, 1] = sign * c
        obj = np.empty(theta.size)
        for start in range(0, theta.size, 4096):
            Qb = Qs[start : start + 4096]
            R = Xp[None] - np.einsum("kba,bi->kai", Qb, Y)
            obj[start : start + 4096] = np.einsum("kai,kai->k", R, R) / n
        k = int(np.argmin(obj))
        if obj[k] < best_obj:
            best_Q, best_obj = Qs[k].copy(), float(obj[k])
    return best_Q, best_obj
