import math

import numpy as np
import pytest

from procwass.errors import DimensionError, SizeCapError
from procwass.metrics import overlap
from procwass.model import plant_instance
from procwass.oracle import MAX_EXHAUSTIVE_N, brute_force_mle, exhaustive_lap, grid_rotation_search
from procwass.procrustes import alignment_objective, optimal_rotation


def test_exhaustive_trivial_cases():
    pi, value = exhaustive_lap([[4.5]])
    assert pi.tolist() == [0] and value == 4.5
    _, value = exhaustive_lap(np.full((5, 5), 2.0))
    assert value == 10.0


def test_exhaustive_size_cap():
    with pytest.raises(SizeCapError):
        exhaustive_lap(np.zeros((MAX_EXHAUSTIVE_N + 1,) * 2))


def test_brute_force_noiseless():
    inst = plant_instance(6, 4, 0.0, 1)
    pi, Q, obj = brute_force_mle(inst.X, inst.Y)
    assert pi.tolist() == inst.pi_star.tolist()
    assert np.allclose(Q, inst.Q_star, atol=1e-10)
    assert obj <= 1e-12


def test_brute_force_objective_is_consistent():
    inst = plant_instance(5, 3, 0.4, 2)
    pi, Q, obj = brute_force_mle(inst.X, inst.Y)
    assert obj == pytest.approx(alignment_objective(inst.X, inst.Y, pi, Q), abs=1e-12)
    assert np.allclose(Q, optimal_rotation(inst.X, inst.Y, pi), atol=1e-10)


def test_brute_force_high_dimension_regime():
    assert 8 >= 2 * math.log(7)
    hits = sum(
        overlap(brute_force_mle(inst.X, inst.Y)[0], inst.pi_star) == 1.0
        for inst in (plant_instance(7, 8, 0.05, s) for s in range(10))
    )
    assert hits >= 9


def test_brute_force_size_cap():
    inst = plant_instance(10, 2, 0.0, 0)
    with pytest.raises(SizeCapError):
        brute_force_mle(inst.X, inst.Y)


def test_grid_noiseless_angle():
    inst = plant_instance(20, 2, 0.0, 3)
    res = 1e-3
    Q, obj = grid_rotation_search(inst.X, inst.Y, inst.pi_star, res)
    assert np.linalg.det(Q) == pytest.approx(np.linalg.det(inst.Q_star))
    # same component: the angle offset is the rotation angle of Q^T Q*
    R = Q.T @ inst.Q_star
    assert abs(math.atan2(R[1, 0], R[0, 0])) <= res


def test_grid_refinement_monotone():
    inst = plant_instance(20, 2, 0.2, 4)
    pi = np.arange(20)
    coarse = grid_rotation_search(inst.X, inst.Y, pi, 2e-3)[1]
    fine = grid_rotation_search(inst.X, inst.Y, pi, 1e-3)[1]
    assert fine <= coarse


def test_grid_dimension_error():
    inst = plant_instance(5, 3, 0.0, 0)
    with pytest.raises(DimensionError):
        grid_rotation_search(inst.X, inst.Y, np.arange(5), 1e-2)
