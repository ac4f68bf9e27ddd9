import time

import numpy as np
import pytest

from procwass.bench import SweepConfig, run_sweep

DIMENSION_GRID = (2, 5, 10, 20, 40, 60)
NOISE_GRID = (0.1, 0.2, 0.4, 0.8)

_ACCEPTANCE_LINES: dict[int, str] = {}


def record_acceptance(number: int, passed: bool, detail: str) -> None:
    line = f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}"
    _ACCEPTANCE_LINES[number] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE_LINES):
        terminalreporter.write_line(_ACCEPTANCE_LINES[number])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def dimension_sweep():
    """Overlap against dimension: sigma = 0.34, n = 100, 10 replicates."""
    cfg = SweepConfig(
        methods=("relaxed_qap_rounded", "ping_pong", "grave"),
        n=(100,),
        d=DIMENSION_GRID,
        sigma=(0.34,),
        replicates=10,
        base_seed=2024,
        T=1000,
        K=100,
    )
    t0 = time.perf_counter()
    records = run_sweep(cfg)
    return cfg, records, time.perf_counter() - t0


@pytest.fixture(scope="session")
def noise_sweep():
    """Overlap against noise at d = 60: n = 200, 10 replicates."""
    cfg = SweepConfig(
        methods=("ping_pong",),
        n=(200,),
        d=(60,),
        sigma=NOISE_GRID,
        replicates=10,
        base_seed=2024,
        T=1000,
        K=100,
    )
    t0 = time.perf_counter()
    records = run_sweep(cfg)
    return cfg, records, time.perf_counter() - t0
