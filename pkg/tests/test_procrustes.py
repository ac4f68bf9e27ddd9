import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from procwass.errors import DimensionError, NumericalError
from procwass.model import is_orthogonal, plant_instance, sample_haar_orthogonal
from procwass.oracle import grid_rotation_search
from procwass.procrustes import alignment_objective, cross_covariance, optimal_rotation, polar_project


def test_noiseless_recovery():
    inst = plant_instance(30, 5, 0.0, 3)
    Q = optimal_rotation(inst.X, inst.Y, inst.pi_star)
    assert np.linalg.norm(Q - inst.Q_star) <= 1e-8


def test_scalar_case_is_sign():
    inst = plant_instance(15, 1, 0.7, 8)
    pi = np.roll(np.arange(15), 1)
    expected = np.sign(np.sum(inst.Y[0] * inst.X[0, pi]))
    assert optimal_rotation(inst.X, inst.Y, pi)[0, 0] == expected


def test_beats_planar_grid():
    for s in range(5):
        inst = plant_instance(20, 2, 0.2, s)
        pi = np.random.default_rng(s).permutation(20)
        Q = optimal_rotation(inst.X, inst.Y, pi)
        _, grid_obj = grid_rotation_search(inst.X, inst.Y, pi, 1e-4)
        obj = alignment_objective(inst.X, inst.Y, pi, Q)
        assert obj <= grid_obj * (1 + 1e-6)


def test_polar_examples():
    Q = sample_haar_orthogonal(4, 1)
    assert np.max(np.abs(polar_project(Q) - Q)) <= 1e-10
    assert np.allclose(polar_project(2 * np.eye(3)), np.eye(3), atol=1e-12)
    assert np.allclose(polar_project(np.diag([3.0, -2.0])), np.diag([1.0, -1.0]), atol=1e-12)


def test_polar_rejects_bad_input():
    with pytest.raises(NumericalError):
        polar_project(np.array([[np.inf, 0.0], [0.0, 1.0]]))
    with pytest.raises(DimensionError):
        polar_project(np.ones((2, 3)))


@given(st.integers(1, 6), st.integers(1, 25), st.integers(0, 2**32))
@settings(max_examples=60, deadline=None)
def test_output_is_orthogonal(d, n, seed):
    inst = plant_instance(n, d, 0.5, seed)
    Q = optimal_rotation(inst.X, inst.Y, np.arange(n))
    assert np.max(np.abs(Q.T @ Q - np.eye(d))) <= 1e-10


@given(st.integers(2, 6), st.integers(0, 2**32))
@settings(max_examples=40, deadline=None)
def test_equivariance(d, seed):
    inst = plant_instance(4 * d, d, 0.3, seed)
    R = sample_haar_orthogonal(d, seed + 7)
    pi = np.arange(4 * d)
    Q = optimal_rotation(inst.X, inst.Y, pi)
    QR = optimal_rotation(inst.X, R @ inst.Y, pi)
    assert np.max(np.abs(QR - R @ Q)) <= 1e-9


def test_rank_deficient_still_optimal():
    # n < d: cross-covariance has rank n, the optimizer is not unique
    inst = plant_instance(2, 4, 0.1, 0)
    pi = np.arange(2)
    Q = optimal_rotation(inst.X, inst.Y, pi)
    assert is_orthogonal(Q)
    for s in range(50):
        other = sample_haar_orthogonal(4, s)
        assert alignment_objective(inst.X, inst.Y, pi, Q) <= alignment_objective(inst.X, inst.Y, pi, other) + 1e-12


def test_cross_covariance_uses_permuted_columns():
    inst = plant_instance(6, 2, 0.0, 5)
    M = cross_covariance(inst.X, inst.Y, inst.pi_star)
    assert np.allclose(M, inst.Q_star @ inst.X[:, inst.pi_star] @ inst.X[:, inst.pi_star].T)
