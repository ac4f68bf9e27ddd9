"""Ping-Pong alternating minimization and a projected-gradient baseline."""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Literal, NamedTuple

import numpy as np

from .assignment import round_to_permutation, solve_lap
from .errors import ConfigError, DimensionError
from .metrics import evaluate
from .model import PlantedInstance, as_cloud, permutation_matrix
from .procrustes import alignment_objective, optimal_rotation, polar_project
from .relaxation import Convention, GramPair, frank_wolfe


@dataclass(frozen=True)
class PingPongConfig:
    T: int = 1000
    K: int = 100
    record_trajectory: bool = False
    convention: Convention = "PA-BP"

    def __post_init__(self):
        for name in ("T", "K"):
            value = getattr(self, name)
            if int(value) != value or value < 0:
                raise ConfigError(f"{name} must be a nonnegative integer, got {value!r}")


@dataclass(frozen=True)
class BaselineConfig:
    """Projected-gradient baseline settings.

    ``eta`` is the step size; ``None`` means ``eta_scale / ||X||_op^2``.
    ``schedule="sqrt"`` divides the step by ``sqrt(k + 1)`` at round ``k``.
    """

    K: int = 100
    eta: float | None = None
    eta_scale: float = 0.1
    schedule: Literal["fixed", "sqrt"] = "fixed"

    def __post_init__(self):
        if int(self.K) != self.K or self.K < 0:
            raise ConfigError(f"K must be a nonnegative integer, got {self.K!r}")
        if self.eta is not None and not self.eta > 0:
            raise ConfigError(f"eta must be positive, got {self.eta!r}")
        if not self.eta_scale > 0:
            raise ConfigError(f"eta_scale must be positive, got {self.eta_scale!r}")
        if self.schedule not in ("fixed", "sqrt"):
            raise ConfigError(f"schedule must be 'fixed' or 'sqrt', got {self.schedule!r}")


class TrajectoryRow(NamedTuple):
    iter: int
    overlap: float
    c2_normalized: float
    ell2_normalized: float
    objective: float


class PingPongResult(NamedTuple):
    pi: np.ndarray
    Q: np.ndarray
    trajectory: list[TrajectoryRow] | None


def _check_clouds(X, Y):
    X = as_cloud(X, "X")
    Y = as_cloud(Y, "Y")
    if X.shape != Y.shape:
        raise DimensionError(f"X has shape {X.shape} but Y has shape {Y.shape}")
    return X, Y


def ping(X, Y, P) -> np.ndarray:
    """Procrustes step: polar factor of ``Y P X^T``.

    ``P`` is either a permutation (1-d index array) or an ``n x n``
    bistochastic matrix.
    """
    X, Y = _check_clouds(X, Y)
    P = np.asarray(P)
    if P.ndim == 1:
        return optimal_rotation(X, Y, P)
    if P.shape != (X.shape[1], X.shape[1]):
        raise DimensionError(f"P must be {X.shape[1]} x {X.shape[1]}, got {P.shape}")
    return polar_project(Y @ P.astype(np.float64) @ X.T)


def pong(X, Y, Q) -> np.ndarray:
    """Matching step: ``argmax_P <P, Y^T Q X>``."""
    X, Y = _check_clouds(X, Y)
    Q = np.asarray(Q, dtype=np.float64)
    if Q.shape != (X.shape[0], X.shape[0]):
        raise DimensionError(f"Q must be {X.shape[0]} x {X.shape[0]}, got {Q.shape}")
    pi, _ = solve_lap(Y.T @ Q @ X)
    return pi


def _row(k: int, X, Y, pi, Q, reference: PlantedInstance | None) -> TrajectoryRow:
    obj = alignment_objective(X, Y, pi, Q)
    if reference is None:
        return TrajectoryRow(k, np.nan, np.nan, np.nan, obj)
    rep = evaluate(reference, pi, Q)
    return TrajectoryRow(k, rep.overlap, rep.c2_normalized, rep.ell2_normalized, obj)


def run_ping_pong(
    X,
    Y,
    cfg: PingPongConfig = PingPongConfig(),
    reference: PlantedInstance | None = None,
    P0: np.ndarray | None = None,
) -> PingPongResult:
    """Frank-Wolfe initialization followed by ``K`` Ping/Pong alternations.

    ``P0`` skips the Frank-Wolfe phase and starts from the given
    bistochastic matrix. When ``K == 0`` the initial matrix is rounded to a
    permutation and ``Q = I`` is returned. Trajectory rows (one per
    alternation, plus the rounded start at ``iter = 0``) carry metrics only
    if ``reference`` is given.
    """
    X, Y = _check_clouds(X, Y)
    d = X.shape[0]
    if P0 is None:
        P0 = frank_wolfe(GramPair.from_clouds(X, Y), cfg.T, cfg.convention)
    Q = np.eye(d)
    trajectory = [] if cfg.record_trajectory else None
    if cfg.K == 0 or trajectory is not None:
        pi = round_to_permutation(P0)
        if trajectory is not None:
            trajectory.append(_row(0, X, Y, pi, Q, reference))
    P = P0
    for k in range(cfg.K):
        Q = ping(X, Y, P)
        pi = pong(X, Y, Q)
        P = pi
        if trajectory is not None:
            trajectory.append(_row(k + 1, X, Y, pi, Q, reference))
    return PingPongResult(pi, Q, trajectory)


def baseline_objective(Q, X, Y, P) -> float:
    """``||Q X - Y P||_F^2`` with ``P`` a permutation or an ``n x n`` matrix."""
    R = np.asarray(Q) @ X - Y @ _as_matrix(P)
    return float(np.sum(R * R))


def baseline_gradient(Q, X, Y, P) -> np.ndarray:
    """Gradient in ``Q`` of :func:`baseline_objective`, ``2 (Q X - Y P) X^T``."""
    return 2.0 * (np.asarray(Q) @ X - Y @ _as_matrix(P)) @ X.T


def _as_matrix(P) -> np.ndarray:
    P = np.asarray(P)
    if P.ndim == 1:
        return permutation_matrix(P)
    return P.astype(np.float64)


def grave_baseline(
    X,
    Y,
    P_init,
    cfg: BaselineConfig = BaselineConfig(),
    Q_init: np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Full-batch alternation of exact matching and projected gradient on Q.

    ``Q`` starts at ``Q_init``, or at the Procrustes solution for
    ``P_init`` when not given. Each of the ``K`` rounds performs one LAP for
    the permutation followed by one step
    ``Q <- polar(Q - eta * 2 (Q X - Y P) X^T)``.
    """
    X, Y = _check_clouds(X, Y)
    Q = ping(X, Y, P_init) if Q_init is None else np.asarray(Q_init, dtype=np.float64)
    eta0 = cfg.eta if cfg.eta is not None else cfg.eta_scale / np.linalg.norm(X, 2) ** 2
    pi = round_to_permutation(P_init) if np.ndim(P_init) == 2 else np.asarray(P_init)
    for k in range(cfg.K):
        pi = pong(X, Y, Q)
        eta = eta0 / np.sqrt(k + 1) if cfg.schedule == "sqrt" else eta0
        Q = polar_project(Q - eta * baseline_gradient(Q, X, Y, pi))
    return pi, Q


TRAJECTORY_HEADER = ("iter", "overlap", "c2_normalized", "ell2_normalized", "objective")


def write_trajectory_csv(rows: list[TrajectoryRow], path: str | os.PathLike) -> None:
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TRAJECTORY_HEADER)
        for row in rows:
            writer.writerow([row.iter] + [f"{v:.12g}" for v in row[1:]])
