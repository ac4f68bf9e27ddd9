"""Conversion between geometric graph alignment and Procrustes-Wasserstein.

A graph-alignment instance only reveals the Gram matrices ``A = X^T X``
and ``B = Y^T Y``. Factoring each Gram matrix in dimension ``d`` recovers
a cloud up to an unknown orthogonal map; re-mixing each factor with an
independent Haar matrix turns the pair into a planted PW instance with the
same hidden permutation.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DimensionError, RankError
from .model import RngLike, as_cloud, as_permutation, as_stream, sample_haar_orthogonal

EIG_CLAMP_REL = 1e-10
RESIDUAL_REL = 1e-6
SYMMETRY_TOL = 1e-10

_REMIX_X = 21
_REMIX_Y = 22


def gram(X) -> np.ndarray:
    """``X^T X``, symmetrized exactly."""
    X = as_cloud(X)
    A = X.T @ X
    return 0.5 * (A + A.T)


def factor_gram(A, d: int) -> np.ndarray:
    """A ``d x n`` cloud ``X'`` with ``X'^T X' = A`` via the top-``d`` eigenpairs.

    Raises :class:`RankError` when more than ``1e-6 * trace(A)`` of spectral
    mass (positive beyond the top ``d``, or negative) would be discarded.
    """
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionError(f"A must be square, got shape {A.shape}")
    if int(d) != d or d < 1:
        raise DimensionError(f"d must be a positive integer, got {d!r}")
    if np.max(np.abs(A - A.T), initial=0.0) > SYMMETRY_TOL * max(1.0, np.max(np.abs(A))):
        raise DimensionError("A is not symmetric")
    n = A.shape[0]
    evals, evecs = np.linalg.eigh(0.5 * (A + A.T))
    order = np.argsort(evals)[::-1]
    evals, evecs = evals[order], evecs[:, order]
    lam_max = max(evals[0], 0.0)
    evals = np.where(np.abs(evals) < EIG_CLAMP_REL * lam_max, 0.0, evals)
    k = min(int(d), n)
    discarded = np.sum(np.abs(evals[k:])) + np.sum(np.abs(np.minimum(evals[:k], 0.0)))
    scale = max(np.trace(A), np.finfo(float).tiny)
    if discarded > RESIDUAL_REL * scale:
        raise RankError(f"Gram matrix is not of rank <= {d} (discarded mass {discarded:.3g})")
    top = np.sqrt(np.maximum(evals[:k], 0.0))[:, None] * evecs[:, :k].T
    if k < d:
        top = np.vstack([top, np.zeros((int(d) - k, n))])
    return top


@dataclass(frozen=True, eq=False)
class GramInstance:
    A: np.ndarray
    B: np.ndarray
    d: int
    pi_star: np.ndarray | None = None

    def __post_init__(self):
        A = np.asarray(self.A, dtype=np.float64)
        B = np.asarray(self.B, dtype=np.float64)
        if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape != B.shape:
            raise DimensionError(f"A and B must be equal-size square matrices, got {A.shape}, {B.shape}")
        for name, M in (("A", A), ("B", B)):
            if np.max(np.abs(M - M.T)) > SYMMETRY_TOL * max(1.0, np.max(np.abs(M))):
                raise DimensionError(f"{name} is not symmetric")
            if np.linalg.eigvalsh(M)[0] < -1e-8 * max(1.0, np.trace(M)):
                raise DimensionError(f"{name} is not positive semidefinite")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        if self.pi_star is not None:
            object.__setattr__(self, "pi_star", as_permutation(self.pi_star, A.shape[0]))

    @property
    def n(self) -> int:
        return self.A.shape[0]


def pw_to_gga(X, Y, pi_star=None) -> GramInstance:
    X = as_cloud(X, "X")
    return GramInstance(gram(X), gram(Y), X.shape[0], pi_star)


def gga_to_pw(g: GramInstance, rng: RngLike = 0, remix: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """Clouds ``(X', Y')`` whose Gram matrices are ``(A, B)``.

    With ``remix`` each factor is multiplied by an independent Haar matrix.
    """
    Xp = factor_gram(g.A, g.d)
    Yp = factor_gram(g.B, g.d)
    if remix:
        stream = as_stream(rng)
        Xp = sample_haar_orthogonal(g.d, stream.substream(_REMIX_X)) @ Xp
        Yp = sample_haar_orthogonal(g.d, stream.substream(_REMIX_Y)) @ Yp
    return Xp, Yp


# Same .npz container as planted instances:
#   format, n, d, A, B, pi_star (empty array when unknown)
GRAM_FORMAT = "procwass.gram.v1"


def save_gram_instance(g: GramInstance, path: str | os.PathLike) -> None:
    pi = np.empty(0, dtype=np.int64) if g.pi_star is None else g.pi_star
    with Path(path).open("wb") as fh:
        np.savez(
            fh,
            format=np.array(GRAM_FORMAT),
            n=np.int64(g.n),
            d=np.int64(g.d),
            A=g.A,
            B=g.B,
            pi_star=pi,
        )


def load_gram_instance(path: str | os.PathLike) -> GramInstance:
    with np.load(Path(path), allow_pickle=False) as data:
        fmt = str(data["format"])
        if fmt != GRAM_FORMAT:
            raise ValueError(f"{path}: expected format {GRAM_FORMAT!r}, found {fmt!r}")
        pi = data["pi_star"]
        return GramInstance(data["A"], data["B"], int(data["d"]), pi if pi.size else None)
