import itertools
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from procwass.assignment import assignment_value, match_clouds, round_to_permutation, solve_lap
from procwass.errors import DimensionError
from procwass.metrics import overlap
from procwass.model import permutation_matrix, plant_instance, sample_uniform_permutation
from procwass.oracle import exhaustive_lap
from procwass.procrustes import alignment_objective
from procwass.relaxation import sorting_estimator

finite = st.floats(-100, 100, allow_nan=False, allow_infinity=False)


def test_identity_gain():
    pi, value = solve_lap(np.eye(3))
    assert pi.tolist() == [0, 1, 2] and value == 3.0


def test_two_by_two_gain():
    pi, value = solve_lap([[1, 2], [3, 1]])
    assert pi.tolist() == [1, 0] and value == 5.0


def test_random_gains_match_exhaustive(rng):
    for _ in range(200):
        G = rng.normal(size=(7, 7))
        assert solve_lap(G)[1] == pytest.approx(exhaustive_lap(G)[1], abs=1e-9)


@given(st.integers(1, 8).flatmap(lambda n: arrays(np.float64, (n, n), elements=finite)))
@settings(max_examples=60, deadline=None)
def test_optimality_certificate(G):
    pi, value = solve_lap(G)
    assert sorted(pi.tolist()) == list(range(G.shape[0]))
    assert value == pytest.approx(exhaustive_lap(G)[1], rel=1e-12, abs=1e-9)


@given(arrays(np.float64, 6, elements=finite), arrays(np.float64, 6, elements=finite))
@settings(max_examples=60, deadline=None)
def test_rank_one_gain_pairs_ranks(a, b):
    G = np.outer(b, a)
    pi = np.empty(6, dtype=np.int64)
    pi[np.argsort(b, kind="stable")] = np.argsort(a, kind="stable")
    assert assignment_value(G, pi) == pytest.approx(solve_lap(G)[1], rel=1e-12, abs=1e-9)


@pytest.mark.parametrize("bad", [np.ones((2, 3)), np.array([[1.0, np.nan], [0.0, 1.0]]), np.ones(3)])
def test_bad_gain_rejected(bad):
    with pytest.raises(DimensionError):
        solve_lap(bad)


def test_match_noiseless_truth():
    inst = plant_instance(40, 3, 0.0, 1)
    assert overlap(match_clouds(inst.X, inst.Y, inst.Q_star), inst.pi_star) == 1.0


def test_match_small_noise():
    hits = 0
    for s in range(10):
        inst = plant_instance(6, 3, 0.05, s)
        pi = match_clouds(inst.X, inst.Y, inst.Q_star)
        brute, _ = exhaustive_lap(inst.Y.T @ inst.Q_star @ inst.X)
        assert assignment_value(inst.Y.T @ inst.Q_star @ inst.X, pi) == pytest.approx(
            assignment_value(inst.Y.T @ inst.Q_star @ inst.X, brute)
        )
        hits += overlap(pi, inst.pi_star) == 1.0
    assert hits >= 9


def test_gain_form_minimizes_distance(rng):
    for s in range(50):
        inst = plant_instance(7, 3, 0.5, s)
        Q = np.linalg.qr(rng.normal(size=(3, 3)))[0]
        pi = match_clouds(inst.X, inst.Y, Q)
        # direct argmin of the squared-distance objective by enumeration
        best = min(
            alignment_objective(inst.X, inst.Y, p, Q)
            for p in map(np.array, itertools.permutations(range(7)))
        )
        assert alignment_objective(inst.X, inst.Y, pi, Q) == pytest.approx(best, abs=1e-12)


def test_sparse_matches_dense_at_moderate_n():
    for s in range(3):
        inst = plant_instance(1500, 2, 0.02, s)
        dense = match_clouds(inst.X, inst.Y, inst.Q_star)
        sparse = match_clouds(inst.X, inst.Y, inst.Q_star, neighbors=8)
        assert alignment_objective(inst.X, inst.Y, sparse, inst.Q_star) == pytest.approx(
            alignment_objective(inst.X, inst.Y, dense, inst.Q_star), rel=1e-12
        )


def test_sparse_always_feasible_with_tiny_k():
    inst = plant_instance(300, 2, 0.5, 0)
    pi = match_clouds(inst.X, inst.Y, inst.Q_star, neighbors=1)
    assert sorted(pi.tolist()) == list(range(300))


def test_match_dimension_mismatch():
    inst = plant_instance(5, 2, 0.0, 0)
    with pytest.raises(DimensionError):
        match_clouds(inst.X, inst.Y[:, :4], inst.Q_star)
    with pytest.raises(DimensionError):
        match_clouds(inst.X, inst.Y, np.eye(3))


def test_round_fixed_point():
    pi = sample_uniform_permutation(9, 3)
    assert round_to_permutation(permutation_matrix(pi)).tolist() == pi.tolist()


def test_round_barycenter_ties():
    J = np.full((3, 3), 1 / 3)
    pi = round_to_permutation(J)
    assert assignment_value(J, pi) == pytest.approx(1.0)


def test_round_perturbed_permutation():
    P0 = permutation_matrix(np.array([3, 1, 0, 2]))
    D = 0.9 * P0 + 0.1 * np.full((4, 4), 0.25)
    assert round_to_permutation(D).tolist() == [3, 1, 0, 2]


def test_round_warns_off_polytope():
    with pytest.warns(RuntimeWarning):
        pi = round_to_permutation(2 * np.eye(3))
    assert pi.tolist() == [0, 1, 2]
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        round_to_permutation(np.eye(3))


def test_rank_one_cross_check_with_sorting():
    inst = plant_instance(25, 3, 0.3, 4)
    pi = sorting_estimator(inst.X, inst.Y)
    a = inst.X.T @ inst.X.mean(axis=1)
    b = inst.Y.T @ inst.Y.mean(axis=1)
    G = np.outer(b, a)
    assert assignment_value(G, pi) == pytest.approx(solve_lap(G)[1], rel=1e-12)
