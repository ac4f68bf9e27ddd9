"""Relaxed quadratic assignment over bistochastic matrices.

Two orientations of the relaxed objective are supported, differing by a
transposition of ``P``:

``"PA-BP"`` (default)
    ``f(P) = ||P A - B P||_F^2`` with gradient ``2 (P A^2 - 2 B P A + B^2 P)``.
    With ``A = X^T X``, ``B = Y^T Y`` and the ``P[i, pi[i]] = 1`` matrix
    convention used throughout the package, the planted permutation matrix
    is a zero of this objective in the noiseless case, so Frank-Wolfe
    iterates can be fed straight into the Procrustes step.
``"AP-PB"``
    ``f(P) = ||A P - P B||_F^2`` with gradient ``2 (A^2 P - 2 A P B + P B^2)``,
    minimized by the transpose of the planted matrix.

Since ``||A P - P B||_F = ||P^T A - B P^T||_F`` the two are the same
problem up to ``P -> P^T``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Literal

import numpy as np

from .assignment import solve_lap
from .errors import DimensionError
from .model import as_cloud

Convention = Literal["PA-BP", "AP-PB"]
CONVENTIONS = ("PA-BP", "AP-PB")


@dataclass(frozen=True, eq=False)
class GramPair:
    A: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        A = np.asarray(self.A, dtype=np.float64)
        B = np.asarray(self.B, dtype=np.float64)
        if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape != B.shape:
            raise DimensionError(f"A and B must be equal-size square matrices, got {A.shape}, {B.shape}")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)

    @classmethod
    def from_clouds(cls, X, Y) -> "GramPair":
        X = as_cloud(X, "X")
        Y = as_cloud(Y, "Y")
        if X.shape != Y.shape:
            raise DimensionError(f"X has shape {X.shape} but Y has shape {Y.shape}")
        A = X.T @ X
        B = Y.T @ Y
        return cls(0.5 * (A + A.T), 0.5 * (B + B.T))

    @property
    def n(self) -> int:
        return self.A.shape[0]


def _check(P, g: GramPair) -> np.ndarray:
    P = np.asarray(P, dtype=np.float64)
    if P.shape != g.A.shape:
        raise DimensionError(f"P has shape {P.shape}, expected {g.A.shape}")
    return P


def _check_convention(convention: str) -> None:
    if convention not in CONVENTIONS:
        raise ValueError(f"unknown convention {convention!r}; expected one of {CONVENTIONS}")


def qap_objective(P, g: GramPair, convention: Convention = "PA-BP") -> float:
    """Un-normalized relaxed QAP objective at ``P``."""
    _check_convention(convention)
    P = _check(P, g)
    if convention == "PA-BP":
        R = P @ g.A - g.B @ P
    else:
        R = g.A @ P - P @ g.B
    return float(np.sum(R * R))


def qap_gradient(D, g: GramPair, convention: Convention = "PA-BP") -> np.ndarray:
    _check_convention(convention)
    D = _check(D, g)
    A, B = g.A, g.B
    if convention == "PA-BP":
        R = D @ A - B @ D
        return 2.0 * (R @ A - B @ R)
    R = A @ D - D @ B
    return 2.0 * (A @ R - R @ B)


def barycenter(n: int) -> np.ndarray:
    """The matrix ``J = 11^T / n``, centre of the Birkhoff polytope."""
    return np.full((n, n), 1.0 / n)


def frank_wolfe(
    g: GramPair,
    T: int,
    convention: Convention = "PA-BP",
    callback: Callable[[int, np.ndarray], None] | None = None,
) -> np.ndarray:
    """``T`` Frank-Wolfe steps from ``J`` with step sizes ``1 / (2 + k)``.

    Each linear minimization over the Birkhoff polytope is a LAP on the
    negated gradient. ``callback(k, P)`` is invoked with every iterate,
    including the initial one (``k = 0``).
    """
    if int(T) != T or T < 0:
        raise ValueError(f"T must be a nonnegative integer, got {T!r}")
    _check_convention(convention)
    n = g.n
    P = barycenter(n)
    rows = np.arange(n)
    if callback is not None:
        callback(0, P)
    for k in range(int(T)):
        S, _ = solve_lap(-qap_gradient(P, g, convention))
        gamma = 1.0 / (2 + k)
        P = (1.0 - gamma) * P
        P[rows, S] += gamma
        if callback is not None:
            callback(k + 1, P)
    return P


def sorting_scores(X, Y) -> tuple[np.ndarray, np.ndarray]:
    """``a_j = <x_j, mean(X)>`` and ``b_i = <y_i, mean(Y)>``."""
    X = as_cloud(X, "X")
    Y = as_cloud(Y, "Y")
    if X.shape[1] != Y.shape[1]:
        raise DimensionError(f"X has {X.shape[1]} points but Y has {Y.shape[1]}")
    return X.T @ X.mean(axis=1), Y.T @ Y.mean(axis=1)


def sorting_estimator(X, Y) -> np.ndarray:
    """Rank-matching permutation maximizing ``sum_i a[pi(i)] b_i``.

    Equivalent to the first Frank-Wolfe vertex from ``J``; runs in
    ``O(nd + n log n)``.
    """
    a, b = sorting_scores(X, Y)
    pi = np.empty(a.size, dtype=np.int64)
    pi[np.argsort(b, kind="stable")] = np.argsort(a, kind="stable")
    return pi
