"""Parameter sweeps over (method, n, d, sigma) with CSV output.

Every grid cell and replicate gets one planted instance, seeded by a stable
hash of ``(base_seed, n, d, sigma bits, replicate)``. All enabled methods run
on that same instance, so per-cell curves are paired comparisons. The
Frank-Wolfe relaxation is computed once per instance and shared by the
methods that start from it.
"""

from __future__ import annotations

import configparser
import csv
import hashlib
import math
import os
import struct
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .assignment import round_to_permutation
from .errors import ConfigError
from .lowdim import ConicalParams, estimate_conical_pair, planar_net_spacing
from .metrics import evaluate
from .model import PlantedInstance, plant_instance
from .pingpong import BaselineConfig, PingPongConfig, grave_baseline, run_ping_pong
from .procrustes import optimal_rotation
from .relaxation import CONVENTIONS, GramPair, frank_wolfe, sorting_estimator

METHODS = ("relaxed_qap_rounded", "ping_pong", "grave", "sorting", "conical")
CSV_HEADER = (
    "method",
    "n",
    "d",
    "sigma",
    "seed",
    "overlap",
    "c2_normalized",
    "ell2_normalized",
    "runtime_ms",
)
MAX_CONICAL_D = 3


@dataclass(frozen=True)
class SweepRecord:
    method: str
    n: int
    d: int
    sigma: float
    seed: int
    overlap: float
    c2_normalized: float
    ell2_normalized: float
    runtime_ms: float


@dataclass(frozen=True)
class SweepConfig:
    methods: tuple[str, ...]
    n: tuple[int, ...]
    d: tuple[int, ...]
    sigma: tuple[float, ...]
    replicates: int = 10
    base_seed: int = 0
    T: int = 1000
    K: int = 100
    convention: str = "PA-BP"
    grave: BaselineConfig = field(default_factory=BaselineConfig)
    conical: ConicalParams = field(default_factory=ConicalParams)
    conical_neighbors: int | None = None
    output: str | None = None
    workers: int = 1
    record_runtime: bool = False

    def __post_init__(self):
        for name in ("methods", "n", "d", "sigma"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
            if not getattr(self, name):
                raise ConfigError(f"{name} must be a non-empty list")
        unknown = [m for m in self.methods if m not in METHODS]
        if unknown:
            raise ConfigError(f"unknown methods {unknown}; choose from {list(METHODS)}")
        if len(set(self.methods)) != len(self.methods):
            raise ConfigError("methods must not repeat")
        if any(int(v) != v or v < 1 for v in self.n + self.d):
            raise ConfigError("n and d values must be positive integers")
        if any(not (s >= 0 and math.isfinite(s)) for s in self.sigma):
            raise ConfigError("sigma values must be finite and nonnegative")
        if int(self.replicates) != self.replicates or self.replicates < 1:
            raise ConfigError("replicates must be a positive integer")
        if not 0 <= self.base_seed < 2**64:
            raise ConfigError("base_seed must be an unsigned 64-bit integer")
        if self.T < 0 or self.K < 0:
            raise ConfigError("T and K must be nonnegative")
        if self.convention not in CONVENTIONS:
            raise ConfigError(f"convention must be one of {CONVENTIONS}")
        if "conical" in self.methods and max(self.d) > MAX_CONICAL_D:
            raise ConfigError(f"the conical method requires d <= {MAX_CONICAL_D}")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")


def derive_seed(base_seed: int, n: int, d: int, sigma: float, replicate: int) -> int:
    """Stable 64-bit instance seed; sigma enters through its IEEE-754 bits."""
    payload = struct.pack("<QQQdQ", base_seed, n, d, float(sigma), replicate)
    return int.from_bytes(hashlib.blake2b(payload, digest_size=8).digest(), "little")


class _Relaxation:
    """Lazily computed Frank-Wolfe iterate shared across methods."""

    def __init__(self, inst: PlantedInstance, T: int, convention: str):
        self.inst, self.T, self.convention = inst, T, convention
        self.P = None
        self.elapsed = 0.0

    def get(self) -> np.ndarray:
        if self.P is None:
            t0 = time.perf_counter()
            self.P = frank_wolfe(GramPair.from_clouds(self.inst.X, self.inst.Y), self.T, self.convention)
            self.elapsed = time.perf_counter() - t0
        return self.P


def run_method(method: str, inst: PlantedInstance, cfg: SweepConfig, relax: _Relaxation | None = None):
    """Run one method on one instance; returns ``(pi_hat, Q_hat, seconds)``.

    Methods that only estimate the permutation get ``Q_hat`` from the
    Procrustes step on their permutation.
    """
    if relax is None:
        relax = _Relaxation(inst, cfg.T, cfg.convention)
    X, Y = inst.X, inst.Y
    uses_fw = method in ("relaxed_qap_rounded", "ping_pong", "grave")
    fw_before = relax.P is not None
    t0 = time.perf_counter()
    if method == "relaxed_qap_rounded":
        pi = round_to_permutation(relax.get())
        Q = optimal_rotation(X, Y, pi)
    elif method == "ping_pong":
        pp = PingPongConfig(T=cfg.T, K=cfg.K, convention=cfg.convention)
        pi, Q, _ = run_ping_pong(X, Y, pp, P0=relax.get())
    elif method == "grave":
        pi, Q = grave_baseline(X, Y, relax.get(), cfg.grave)
    elif method == "sorting":
        pi = sorting_estimator(X, Y)
        Q = optimal_rotation(X, Y, pi)
    elif method == "conical":
        if inst.d > MAX_CONICAL_D:
            raise ConfigError(f"the conical method requires d <= {MAX_CONICAL_D}")
        pi, Q = estimate_conical_pair(X, Y, cfg.conical, inst.sigma, neighbors=cfg.conical_neighbors)
    else:
        raise ConfigError(f"unknown method {method!r}")
    seconds = time.perf_counter() - t0
    if uses_fw and fw_before:
        # the shared relaxation was paid for by an earlier method
        seconds += relax.elapsed
    return pi, Q, seconds


def _run_cell(args) -> list[SweepRecord]:
    cfg, n, d, sigma, replicate = args
    seed = derive_seed(cfg.base_seed, n, d, sigma, replicate)
    inst = plant_instance(n, d, sigma, seed)
    relax = _Relaxation(inst, cfg.T, cfg.convention)
    out = []
    for method in cfg.methods:
        pi, Q, seconds = run_method(method, inst, cfg, relax)
        rep = evaluate(inst, pi, Q)
        out.append(
            SweepRecord(
                method=method,
                n=n,
                d=d,
                sigma=float(sigma),
                seed=seed,
                overlap=rep.overlap,
                c2_normalized=rep.c2_normalized,
                ell2_normalized=rep.ell2_normalized,
                runtime_ms=1000.0 * seconds if cfg.record_runtime else 0.0,
            )
        )
    return out


def run_sweep(cfg: SweepConfig) -> list[SweepRecord]:
    """One record per (method, grid cell, replicate), in canonical order."""
    tasks = [
        (cfg, n, d, sigma, r)
        for n in cfg.n
        for d in cfg.d
        for sigma in cfg.sigma
        for r in range(cfg.replicates)
    ]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            chunks = list(pool.map(_run_cell, tasks))
    else:
        chunks = [_run_cell(t) for t in tasks]
    order = {m: i for i, m in enumerate(METHODS)}
    keyed = [(ti, order[rec.method], rec) for ti, chunk in enumerate(chunks) for rec in chunk]
    keyed.sort(key=lambda item: item[:2])
    return [rec for _, _, rec in keyed]


def _fmt(value: float) -> str:
    return f"{value:.12g}"


def write_csv(records, path: str | os.PathLike) -> None:
    path = Path(path)
    try:
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_HEADER)
            for r in records:
                writer.writerow(
                    [
                        r.method,
                        r.n,
                        r.d,
                        _fmt(r.sigma),
                        r.seed,
                        _fmt(r.overlap),
                        _fmt(r.c2_normalized),
                        _fmt(r.ell2_normalized),
                        _fmt(r.runtime_ms),
                    ]
                )
    except OSError as exc:
        raise OSError(f"cannot write sweep CSV to {path}: {exc}") from exc


def read_csv(path: str | os.PathLike) -> list[SweepRecord]:
    path = Path(path)
    try:
        with path.open(newline="") as fh:
            reader = csv.DictReader(fh)
            if tuple(reader.fieldnames or ()) != CSV_HEADER:
                raise ValueError(f"{path}: unexpected header {reader.fieldnames}")
            return [
                SweepRecord(
                    method=row["method"],
                    n=int(row["n"]),
                    d=int(row["d"]),
                    sigma=float(row["sigma"]),
                    seed=int(row["seed"]),
                    overlap=float(row["overlap"]),
                    c2_normalized=float(row["c2_normalized"]),
                    ell2_normalized=float(row["ell2_normalized"]),
                    runtime_ms=float(row["runtime_ms"]),
                )
                for row in reader
            ]
    except OSError as exc:
        raise OSError(f"cannot read sweep CSV {path}: {exc}") from exc


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in text.replace(",", " ").split())


def _ints(text: str) -> tuple[int, ...]:
    out = []
    for v in text.replace(",", " ").split():
        try:
            out.append(int(v))
        except ValueError:
            raise ConfigError(f"expected an integer, got {v!r}") from None
    return tuple(out)


def _bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {text!r}")


_SECTIONS = {
    "sweep": {"methods", "n", "d", "sigma", "replicates", "base_seed", "output", "workers", "record_runtime"},
    "frank_wolfe": {"t", "convention"},
    "ping_pong": {"k"},
    "grave": {"k", "eta", "eta_scale", "schedule"},
    "conical": {"p", "delta", "kappa", "kappa_rule", "epsilon", "resolution_deg", "seed", "neighbors"},
}


def parse_config(text: str, base_dir: str | os.PathLike | None = None) -> SweepConfig:
    """Parse the INI-style sweep configuration (grammar in the README)."""
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed configuration: {exc}") from exc
    for section in parser.sections():
        if section not in _SECTIONS:
            raise ConfigError(f"unknown section [{section}]")
        extra = set(parser[section]) - _SECTIONS[section]
        if extra:
            raise ConfigError(f"unknown keys in [{section}]: {sorted(extra)}")
    if "sweep" not in parser:
        raise ConfigError("missing [sweep] section")
    sw = parser["sweep"]
    for key in ("methods", "n", "d", "sigma"):
        if key not in sw:
            raise ConfigError(f"[sweep] needs {key!r}")
    try:
        kwargs = dict(
            methods=tuple(m for m in sw["methods"].replace(",", " ").split()),
            n=_ints(sw["n"]),
            d=_ints(sw["d"]),
            sigma=_floats(sw["sigma"]),
            replicates=int(sw.get("replicates", "10")),
            base_seed=int(sw.get("base_seed", "0")),
            workers=int(sw.get("workers", "1")),
            record_runtime=_bool(sw.get("record_runtime", "false")),
        )
        if "output" in sw:
            out = Path(sw["output"])
            if base_dir is not None and not out.is_absolute():
                out = Path(base_dir) / out
            kwargs["output"] = str(out)
        fw = parser["frank_wolfe"] if "frank_wolfe" in parser else {}
        kwargs["T"] = int(fw.get("t", "1000"))
        kwargs["convention"] = fw.get("convention", "PA-BP")
        if "ping_pong" in parser:
            kwargs["K"] = int(parser["ping_pong"].get("k", "100"))
        if "grave" in parser:
            g = parser["grave"]
            kwargs["grave"] = BaselineConfig(
                K=int(g.get("k", "100")),
                eta=float(g["eta"]) if "eta" in g else None,
                eta_scale=float(g.get("eta_scale", "0.1")),
                schedule=g.get("schedule", "fixed"),
            )
        if "conical" in parser:
            c = parser["conical"]
            if "epsilon" in c and "resolution_deg" in c:
                raise ConfigError("give either epsilon or resolution_deg for [conical], not both")
            if "resolution_deg" in c:
                if max(kwargs["d"]) > 2:
                    raise ConfigError("resolution_deg describes a planar grid; use epsilon when d > 2")
                # covering radius of a planar grid with this angular spacing
                h = math.radians(float(c["resolution_deg"]))
                epsilon = 2.0 * math.sqrt(2.0) * math.sin(h / 4.0)
            else:
                epsilon = float(c.get("epsilon", "0.05"))
            kwargs["conical"] = ConicalParams(
                p=int(c.get("p", "64")),
                delta=float(c.get("delta", "0.2")),
                kappa=float(c["kappa"]) if "kappa" in c else None,
                epsilon=epsilon,
                seed=int(c.get("seed", "0")),
                kappa_rule=c.get("kappa_rule", "standard"),
            )
            if "neighbors" in c:
                kwargs["conical_neighbors"] = int(c["neighbors"])
    except (ValueError, KeyError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"invalid configuration value: {exc}") from exc
    return SweepConfig(**kwargs)


def load_config(path: str | os.PathLike) -> SweepConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text, base_dir=path.parent)


def with_overrides(cfg: SweepConfig, **overrides) -> SweepConfig:
    return replace(cfg, **{k: v for k, v in overrides.items() if v is not None})


__all__ = [
    "CSV_HEADER",
    "METHODS",
    "SweepConfig",
    "SweepRecord",
    "derive_seed",
    "load_config",
    "parse_config",
    "planar_net_spacing",
    "read_csv",
    "run_method",
    "run_sweep",
    "with_overrides",
    "write_csv",
]
