"""Conical alignment estimator for small dimensions.

A cone ``C(u, delta) = {v : <u, v> >= (1 - delta) ||v||}`` is counted over
the points of a cloud whose norm exceeds a truncation radius (``1/kappa``
for X, ``sqrt(1 + sigma^2)/kappa`` for Y). The conical loss of ``Q``
compares, direction by direction, the count of X in the cone around
``Q^T u_k`` with the count of Y in the cone around ``u_k``; it vanishes when
``Y = Q X``. The estimate of ``Q`` is the loss minimizer over a finite
covering net of O(d).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .assignment import match_clouds
from .errors import DimensionError, SizeCapError
from .model import RngLike, as_cloud, as_stream

DEFAULT_NET_CAP = 200_000
CHUNK_BUDGET = 2_000_000

_DIRECTIONS_STREAM = 11
_NET_STREAM = 12


@dataclass(frozen=True)
class ConeSpec:
    u: np.ndarray
    delta: float
    radius_min: float = 0.0

    def __post_init__(self):
        u = np.asarray(self.u, dtype=np.float64)
        if u.ndim != 1 or abs(np.linalg.norm(u) - 1.0) > 1e-10:
            raise ValueError("cone axis must be a unit vector")
        if not 0 < self.delta < 1:
            raise ValueError(f"delta must lie in (0, 1), got {self.delta}")
        if self.radius_min < 0:
            raise ValueError("radius_min must be nonnegative")
        object.__setattr__(self, "u", u)


@dataclass(frozen=True)
class ConicalParams:
    """Settings of the conical estimator.

    ``kappa=None`` resolves to ``sqrt(2/d)`` (``kappa_rule="standard"``) or
    ``sqrt(1/(6d))`` (``kappa_rule="conservative"``). ``epsilon`` is the Frobenius
    covering radius of the net.
    """

    p: int = 64
    delta: float = 0.2
    kappa: float | None = None
    epsilon: float = 0.05
    seed: int = 0
    kappa_rule: Literal["standard", "conservative"] = "standard"

    def __post_init__(self):
        if int(self.p) != self.p or self.p < 1:
            raise ValueError(f"p must be a positive integer, got {self.p!r}")
        if not 0 < self.delta < 1:
            raise ValueError(f"delta must lie in (0, 1), got {self.delta}")
        if self.kappa is not None and not self.kappa > 0:
            raise ValueError(f"kappa must be positive, got {self.kappa}")
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if self.kappa_rule not in ("standard", "conservative"):
            raise ValueError(f"unknown kappa_rule {self.kappa_rule!r}")

    def resolved_kappa(self, d: int) -> float:
        if self.kappa is not None:
            return float(self.kappa)
        if self.kappa_rule == "standard":
            return math.sqrt(2.0 / d)
        return math.sqrt(1.0 / (6.0 * d))


def cone_membership(v, u, delta: float) -> bool:
    v = np.asarray(v, dtype=np.float64)
    u = np.asarray(u, dtype=np.float64)
    if v.shape != u.shape or v.ndim != 1:
        raise DimensionError(f"v and u must be vectors of equal length, got {v.shape}, {u.shape}")
    return bool(u @ v >= (1.0 - delta) * np.linalg.norm(v))


def count_in_cone(cloud, spec: ConeSpec) -> int:
    X = as_cloud(cloud)
    if X.shape[0] != spec.u.size:
        raise DimensionError(f"cloud dimension {X.shape[0]} != cone dimension {spec.u.size}")
    norms = np.linalg.norm(X, axis=0)
    inside = spec.u @ X >= (1.0 - spec.delta) * norms
    return int(np.count_nonzero(inside & (norms >= spec.radius_min)))


def _unit_rows(G: np.ndarray) -> np.ndarray:
    return G / np.linalg.norm(G, axis=1, keepdims=True)


def sample_directions(params: ConicalParams, d: int, rng: RngLike | None = None) -> np.ndarray:
    """``p`` loss directions, as rows of a ``p x d`` array.

    ``q = p^3`` i.i.d. uniform directions are drawn on the sphere, then ``p``
    of them are picked uniformly with replacement.
    """
    if d < 1:
        raise DimensionError("d must be positive")
    stream = as_stream(params.seed if rng is None else rng).substream(_DIRECTIONS_STREAM)
    gen = stream.generator()
    q = params.p**3
    pool = _unit_rows(gen.standard_normal((q, d)))
    return pool[gen.integers(0, q, size=params.p)]


def net_size_bound(d: int, epsilon: float, C: float = 1.0) -> float:
    """Cardinality bound ``(C sqrt(d) / epsilon)^(d^2)`` for a minimal net."""
    return (C * math.sqrt(d) / epsilon) ** (d * d)


def planar_net_spacing(epsilon: float) -> float:
    """Angular spacing of a planar grid whose covering radius is ``epsilon``.

    Two planar rotations by ``a`` and ``b`` are ``2 sqrt(2) |sin((a - b)/2)|``
    apart in Frobenius norm; a grid with spacing ``h`` leaves every angle
    within ``h/2`` of a node.
    """
    if epsilon >= 2 * math.sqrt(2):
        return 2 * math.pi
    return 4.0 * math.asin(epsilon / (2.0 * math.sqrt(2.0)))


def planar_orthogonal_grid(spacing: float) -> np.ndarray:
    """Rotations and reflections of the plane at angles ``0, h, 2h, ...``."""
    count = max(1, math.ceil(2 * math.pi / spacing - 1e-9))
    theta = 2 * math.pi * np.arange(count) / count
    c, s = np.cos(theta), np.sin(theta)
    rot = np.stack([np.stack([c, -s], -1), np.stack([s, c], -1)], -2)
    ref = np.stack([np.stack([c, s], -1), np.stack([s, -c], -1)], -2)
    return np.concatenate([rot, ref])


def covering_radius(net: np.ndarray, probes: np.ndarray, chunk: int = 2048) -> np.ndarray:
    """Frobenius distance from each probe to its nearest net element."""
    d = net.shape[-1]
    flat_net = net.reshape(len(net), d * d)
    # ||A - B||_F^2 = 2d - 2 <A, B> for orthogonal A, B
    out = np.empty(len(probes))
    for start in range(0, len(probes), chunk):
        block = probes[start : start + chunk].reshape(-1, d * d)
        best = (block @ flat_net.T).max(axis=1)
        out[start : start + chunk] = np.sqrt(np.maximum(2.0 * d - 2.0 * best, 0.0))
    return out


def _haar_batch(d: int, count: int, gen: np.random.Generator) -> np.ndarray:
    Q, R = np.linalg.qr(gen.standard_normal((count, d, d)))
    signs = np.sign(np.diagonal(R, axis1=1, axis2=2))
    signs[signs == 0] = 1.0
    return Q * signs[:, None, :]


def build_orthogonal_net(
    d: int,
    epsilon: float,
    rng: RngLike = 0,
    max_size: int = DEFAULT_NET_CAP,
    probes: int = 10_000,
) -> np.ndarray:
    """A finite epsilon-net of O(d), as an ``N x d x d`` array.

    ``d = 1`` returns ``{+1, -1}`` and ``d = 2`` an exact angular grid over
    both components. For ``d >= 3`` the net is a Haar sample that doubles
    (absorbing any uncovered probes) until a fresh batch of ``probes`` Haar
    probes is fully covered, so covering holds with high empirical
    confidence only.
    """
    if int(d) != d or d < 1:
        raise DimensionError(f"d must be a positive integer, got {d!r}")
    if not epsilon > 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    if d == 1:
        return np.array([[[1.0]], [[-1.0]]])
    if d == 2:
        net = planar_orthogonal_grid(planar_net_spacing(epsilon))
        if len(net) > max_size:
            raise SizeCapError(f"planar net needs {len(net)} elements, cap is {max_size}")
        return net
    if max_size < 2:
        raise SizeCapError("net cap too small")
    gen = as_stream(rng).substream(_NET_STREAM).generator()
    net = _haar_batch(d, min(1024, max_size), gen)
    while True:
        batch = _haar_batch(d, probes, gen)
        uncovered = batch[covering_radius(net, batch) > epsilon]
        if len(uncovered) == 0:
            return net
        grown = len(net) * 2 + len(uncovered)
        if grown > max_size:
            raise SizeCapError(
                f"covering O({d}) at epsilon={epsilon} needs more than {max_size} elements"
            )
        net = np.concatenate([net, uncovered, _haar_batch(d, len(net), gen)])


def cone_counts(cloud: np.ndarray, directions: np.ndarray, delta: float, radius_min: float) -> np.ndarray:
    """Counts of truncated cloud points in the cone around each row of ``directions``."""
    norms = np.linalg.norm(cloud, axis=0)
    keep = norms >= radius_min
    positive = keep & (norms > 0)
    # the zero vector lies in every cone
    zeros = np.count_nonzero(keep & (norms == 0))
    unit = cloud[:, positive] / norms[positive]
    return np.count_nonzero(directions @ unit >= 1.0 - delta, axis=1) + zeros


def _truncation_radii(params: ConicalParams, d: int, sigma: float) -> tuple[float, float]:
    kappa = params.resolved_kappa(d)
    return 1.0 / kappa, math.sqrt(1.0 + sigma**2) / kappa


def conical_loss(Q, X, Y, dirs, params: ConicalParams, sigma: float) -> float:
    """``(1/p) sum_k (|C_X(Q^T u_k)| - |C_Y(u_k)|)^2``."""
    return float(conical_losses(np.asarray(Q)[None], X, Y, dirs, params, sigma)[0])


def conical_losses(
    net,
    X,
    Y,
    dirs,
    params: ConicalParams,
    sigma: float,
    chunk: int | None = None,
    workers: int = 1,
) -> np.ndarray:
    """Conical loss of every element of ``net`` (an ``N x d x d`` array).

    Elements are evaluated in independent chunks; ``workers > 1`` spreads
    them over a thread pool. ``chunk=None`` sizes each chunk so that the
    direction-by-point score block stays near ``CHUNK_BUDGET`` entries.
    """
    X = as_cloud(X, "X")
    Y = as_cloud(Y, "Y")
    net = np.asarray(net, dtype=np.float64)
    dirs = np.atleast_2d(np.asarray(dirs, dtype=np.float64))
    d = X.shape[0]
    if Y.shape[0] != d or net.shape[1:] != (d, d) or dirs.shape[1] != d:
        raise DimensionError("clouds, net and directions must share the dimension d")
    r_x, r_y = _truncation_radii(params, d, sigma)
    target = cone_counts(Y, dirs, params.delta, r_y)

    norms = np.linalg.norm(X, axis=0)
    unit = X[:, norms >= r_x] / norms[norms >= r_x]
    thresh = 1.0 - params.delta
    if chunk is None:
        chunk = max(1, CHUNK_BUDGET // max(1, len(dirs) * unit.shape[1]))

    def evaluate(start: int) -> np.ndarray:
        block = net[start : start + chunk]
        # row k of Q^T u is Q[:, :]^T u_k; stacked as (N, p, d)
        rotated = np.einsum("nij,pi->npj", block, dirs)
        counts = np.count_nonzero(rotated.reshape(-1, d) @ unit >= thresh, axis=1)
        diff = counts.reshape(len(block), -1) - target[None, :]
        return np.mean(diff.astype(np.float64) ** 2, axis=1)

    starts = range(0, len(net), chunk)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(evaluate, starts))
    else:
        parts = [evaluate(s) for s in starts]
    return np.concatenate(parts)


def estimate_q_conical(
    X,
    Y,
    params: ConicalParams,
    sigma: float,
    net: np.ndarray | None = None,
    max_net_size: int = DEFAULT_NET_CAP,
    workers: int = 1,
) -> np.ndarray:
    """Minimizer of the conical loss over an epsilon-net (first index on ties)."""
    X = as_cloud(X, "X")
    d = X.shape[0]
    if net is None:
        net = build_orthogonal_net(d, params.epsilon, params.seed, max_size=max_net_size)
    dirs = sample_directions(params, d)
    losses = conical_losses(net, X, Y, dirs, params, sigma, workers=workers)
    return np.array(net[int(np.argmin(losses))])


def estimate_conical_pair(
    X,
    Y,
    params: ConicalParams,
    sigma: float,
    neighbors: int | None = None,
    **kwargs,
) -> tuple[np.ndarray, np.ndarray]:
    """Conical ``Q`` estimate followed by the matching LAP for ``pi``."""
    Q = estimate_q_conical(X, Y, params, sigma, **kwargs)
    return match_clouds(X, Y, Q, neighbors=neighbors), Q
