"""Overlap, squared transport cost and Frobenius error between estimates."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .errors import DimensionError
from .model import PlantedInstance, as_cloud, as_permutation


@dataclass(frozen=True)
class MetricReport:
    overlap: float
    c2: float
    c2_normalized: float
    ell2: float
    ell2_normalized: float

    def as_dict(self) -> dict[str, float]:
        return asdict(self)


def overlap(pi, pi_prime) -> float:
    """Fraction of indices on which two permutations agree."""
    pi = as_permutation(pi)
    pi_prime = as_permutation(pi_prime)
    if pi.size != pi_prime.size:
        raise DimensionError(f"permutations have lengths {pi.size} and {pi_prime.size}")
    return float(np.mean(pi == pi_prime))


def overlap_matrix(P, P_prime) -> float:
    """``<P, P'> / n``; extends :func:`overlap` to bistochastic ``P``."""
    P = np.asarray(P, dtype=np.float64)
    P_prime = np.asarray(P_prime, dtype=np.float64)
    if P.ndim != 2 or P.shape[0] != P.shape[1] or P.shape != P_prime.shape:
        raise DimensionError(f"need two n x n matrices, got {P.shape} and {P_prime.shape}")
    return float(np.sum(P * P_prime) / P.shape[0])


def transport_cost_sq(pi, pi_prime, X) -> float:
    """``(1/n) sum_i ||x[pi(i)] - x[pi'(i)]||^2``.

    Equal to ``||(P - P') X^T||_F^2 / n`` for the permutation matrices of
    ``pi`` and ``pi'``.
    """
    X = as_cloud(X)
    n = X.shape[1]
    pi = as_permutation(pi, n)
    pi_prime = as_permutation(pi_prime, n)
    diff = X[:, pi] - X[:, pi_prime]
    return float(np.sum(diff * diff) / n)


def frobenius_err(Q, Q_prime) -> float:
    Q = np.asarray(Q, dtype=np.float64)
    Q_prime = np.asarray(Q_prime, dtype=np.float64)
    if Q.ndim != 2 or Q.shape != Q_prime.shape or Q.shape[0] != Q.shape[1]:
        raise DimensionError(f"need two d x d matrices, got {Q.shape} and {Q_prime.shape}")
    return float(np.sum((Q - Q_prime) ** 2))


def evaluate(inst: PlantedInstance, pi_hat, Q_hat) -> MetricReport:
    """Score an estimate ``(pi_hat, Q_hat)`` against the planted truth."""
    d = inst.d
    c2 = transport_cost_sq(pi_hat, inst.pi_star, inst.X)
    ell2 = frobenius_err(Q_hat, inst.Q_star)
    return MetricReport(
        overlap=overlap(pi_hat, inst.pi_star),
        c2=c2,
        c2_normalized=c2 / (2 * d),
        ell2=ell2,
        ell2_normalized=ell2 / (2 * d),
    )
