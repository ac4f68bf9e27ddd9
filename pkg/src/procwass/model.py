"""Planted Procrustes-Wasserstein instances and reproducible sampling.

Point clouds are ``d x n`` float64 arrays whose columns are the datapoints.
A permutation is an int64 array ``pi`` of length ``n`` with ``pi[i]`` the
image of ``i``. The planted model is

    y_i = Q_star @ x[pi_star(i)] + sigma * z_i,

or in matrix form ``Y = Q_star X P_star^T + sigma Z`` where the permutation
matrix of ``pi`` has ``P[i, pi[i]] = 1`` (see :func:`permutation_matrix`).
"""

from __future__ import annotations

import hashlib
import os
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

import numpy as np

from .errors import DimensionError, NegativeSigmaError

ORTHOGONALITY_TOL = 1e-10

# Sub-stream ids used by plant_instance. Keeping the four draws on disjoint
# streams means X never changes when sigma (or anything else) does.
STREAM_X = 1
STREAM_Z = 2
STREAM_Q = 3
STREAM_PI = 4


def _mix64(*values: int) -> int:
    payload = b"".join(struct.pack("<Q", v & 0xFFFFFFFFFFFFFFFF) for v in values)
    return int.from_bytes(hashlib.blake2b(payload, digest_size=8).digest(), "little")


@dataclass(frozen=True)
class RngStream:
    """A named, reproducible random stream.

    The pair ``(seed, stream)`` fully determines the draws: every call to
    :meth:`generator` restarts the same PCG64 sequence, so sampling functions
    that take an ``RngStream`` are pure.
    """

    seed: int
    stream: int = 0

    def __post_init__(self):
        if not (0 <= self.seed < 2**64) or not (0 <= self.stream < 2**64):
            raise ValueError("seed and stream must be unsigned 64-bit integers")

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream,))
        return np.random.Generator(np.random.PCG64(seq))

    def substream(self, key: int) -> "RngStream":
        return RngStream(self.seed, _mix64(self.stream, key))


RngLike = Union[RngStream, int]


def as_stream(rng: RngLike) -> RngStream:
    if isinstance(rng, RngStream):
        return rng
    return RngStream(int(rng))


def _check_positive(**dims: int) -> None:
    for name, value in dims.items():
        if int(value) != value or value < 1:
            raise DimensionError(f"{name} must be a positive integer, got {value!r}")


def as_cloud(X, name: str = "X") -> np.ndarray:
    """Validate a ``d x n`` point cloud and return it as float64."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
        raise DimensionError(f"{name} must be a non-empty d x n matrix, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise DimensionError(f"{name} has non-finite entries")
    return X


def as_permutation(pi, n: int | None = None) -> np.ndarray:
    """Validate that ``pi`` is a bijection of ``{0, ..., n-1}``."""
    pi = np.asarray(pi)
    if pi.ndim != 1 or pi.size == 0:
        raise DimensionError("a permutation must be a non-empty 1-d integer array")
    if not np.issubdtype(pi.dtype, np.integer):
        if not np.all(np.equal(np.mod(pi, 1), 0)):
            raise DimensionError("permutation entries must be integers")
    pi = pi.astype(np.int64)
    if n is not None and pi.size != n:
        raise DimensionError(f"permutation has length {pi.size}, expected {n}")
    if not np.array_equal(np.sort(pi), np.arange(pi.size)):
        raise DimensionError("array is not a bijection of {0, ..., n-1}")
    return pi


def is_orthogonal(Q, tol: float = ORTHOGONALITY_TOL) -> bool:
    Q = np.asarray(Q, dtype=np.float64)
    if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
        return False
    return float(np.max(np.abs(Q.T @ Q - np.eye(Q.shape[0])))) <= tol


def permutation_matrix(pi) -> np.ndarray:
    """Return the ``n x n`` matrix with ``P[i, pi[i]] = 1``.

    With this convention ``X @ P.T`` has ``x[pi[i]]`` as column ``i`` and
    ``<P, M> = sum_i M[i, pi[i]]``.
    """
    pi = as_permutation(pi)
    n = pi.size
    P = np.zeros((n, n))
    P[np.arange(n), pi] = 1.0
    return P


def identity_permutation(n: int) -> np.ndarray:
    return np.arange(n, dtype=np.int64)


def sample_standard_cloud(n: int, d: int, rng: RngLike) -> np.ndarray:
    """Draw a ``d x n`` matrix of i.i.d. standard normal entries."""
    _check_positive(n=n, d=d)
    return as_stream(rng).generator().standard_normal((d, n))


def sample_haar_orthogonal(d: int, rng: RngLike) -> np.ndarray:
    """Haar-distributed matrix on O(d), via QR with sign-corrected ``diag(R)``."""
    _check_positive(d=d)
    G = as_stream(rng).generator().standard_normal((d, d))
    Q, R = np.linalg.qr(G)
    signs = np.sign(np.diag(R))
    signs[signs == 0] = 1.0
    return Q * signs


def sample_uniform_permutation(n: int, rng: RngLike) -> np.ndarray:
    """Uniform random permutation (Fisher-Yates shuffle of the identity)."""
    _check_positive(n=n)
    return as_stream(rng).generator().permutation(n).astype(np.int64)


@dataclass(frozen=True, eq=False)
class PlantedInstance:
    X: np.ndarray
    Y: np.ndarray
    pi_star: np.ndarray
    Q_star: np.ndarray
    sigma: float
    seed: int
    stream: int = field(default=0, compare=False)

    def __post_init__(self):
        X = as_cloud(self.X, "X")
        Y = as_cloud(self.Y, "Y")
        if X.shape != Y.shape:
            raise DimensionError(f"X has shape {X.shape} but Y has shape {Y.shape}")
        d, n = X.shape
        pi = as_permutation(self.pi_star, n)
        Q = np.asarray(self.Q_star, dtype=np.float64)
        if Q.shape != (d, d):
            raise DimensionError(f"Q_star must be {d} x {d}, got {Q.shape}")
        if not is_orthogonal(Q):
            raise DimensionError("Q_star is not orthogonal")
        if self.sigma < 0:
            raise NegativeSigmaError(f"sigma must be nonnegative, got {self.sigma}")
        for name, arr in (("X", X), ("Y", Y), ("pi_star", pi), ("Q_star", Q)):
            arr = arr.copy()
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n(self) -> int:
        return self.X.shape[1]

    @property
    def d(self) -> int:
        return self.X.shape[0]


def plant_instance(n: int, d: int, sigma: float, rng: RngLike) -> PlantedInstance:
    """Sample ``(X, Y, pi_star, Q_star)`` from the planted model."""
    _check_positive(n=n, d=d)
    if not sigma >= 0:
        raise NegativeSigmaError(f"sigma must be nonnegative, got {sigma}")
    stream = as_stream(rng)
    X = sample_standard_cloud(n, d, stream.substream(STREAM_X))
    Z = sample_standard_cloud(n, d, stream.substream(STREAM_Z))
    Q_star = sample_haar_orthogonal(d, stream.substream(STREAM_Q))
    pi_star = sample_uniform_permutation(n, stream.substream(STREAM_PI))
    Y = Q_star @ X[:, pi_star]
    if sigma > 0:
        Y = Y + sigma * Z
    return PlantedInstance(X, Y, pi_star, Q_star, float(sigma), stream.seed, stream.stream)


# Container layout (numpy .npz, arrays written in this order, all floats
# float64, X/Y/Q_star stored row-major as d x n / d x n / d x d):
#   format, n, d, sigma, seed, X, Y, pi_star, Q_star
INSTANCE_FORMAT = "procwass.planted.v1"


def save_instance(inst: PlantedInstance, path: str | os.PathLike) -> None:
    path = Path(path)
    with path.open("wb") as fh:
        np.savez(
            fh,
            format=np.array(INSTANCE_FORMAT),
            n=np.int64(inst.n),
            d=np.int64(inst.d),
            sigma=np.float64(inst.sigma),
            seed=np.uint64(inst.seed),
            X=np.ascontiguousarray(inst.X),
            Y=np.ascontiguousarray(inst.Y),
            pi_star=inst.pi_star.astype(np.int64),
            Q_star=np.ascontiguousarray(inst.Q_star),
        )


def load_instance(path: str | os.PathLike) -> PlantedInstance:
    with np.load(Path(path), allow_pickle=False) as data:
        fmt = str(data["format"])
        if fmt != INSTANCE_FORMAT:
            raise ValueError(f"{path}: expected format {INSTANCE_FORMAT!r}, found {fmt!r}")
        inst = PlantedInstance(
            X=data["X"],
            Y=data["Y"],
            pi_star=data["pi_star"],
            Q_star=data["Q_star"],
            sigma=float(data["sigma"]),
            seed=int(data["seed"]),
        )
        if (inst.n, inst.d) != (int(data["n"]), int(data["d"])):
            raise DimensionError(f"{path}: header n/d disagree with array shapes")
    return inst
