import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from procwass.errors import DimensionError, RankError
from procwass.metrics import overlap
from procwass.model import plant_instance, sample_standard_cloud
from procwass.pingpong import PingPongConfig, run_ping_pong
from procwass.reduction import (
    GramInstance,
    factor_gram,
    gga_to_pw,
    gram,
    load_gram_instance,
    pw_to_gga,
    save_gram_instance,
)


def test_gram_examples():
    assert np.array_equal(gram(np.eye(3)), np.eye(3))
    x = np.array([[1.0], [2.0], [2.0]])
    assert gram(x).tolist() == [[9.0]]
    X = sample_standard_cloud(7, 3, 0)
    G = gram(X)
    for i in range(7):
        for j in range(7):
            assert abs(G[i, j] - X[:, i] @ X[:, j]) <= 1e-12


def test_factor_identity():
    assert np.max(np.abs(gram(factor_gram(np.eye(5), 5)) - np.eye(5))) <= 1e-8


def test_factor_roundtrip():
    X = sample_standard_cloud(20, 4, 3)
    A = gram(X)
    assert np.max(np.abs(gram(factor_gram(A, 4)) - A)) <= 1e-8


def test_factor_rank_error():
    A = gram(sample_standard_cloud(10, 2, 1))
    with pytest.raises(RankError):
        factor_gram(A, 1)
    with pytest.raises(RankError):
        factor_gram(-np.eye(3), 3)


def test_factor_pads_low_rank():
    A = gram(sample_standard_cloud(6, 2, 1))
    Xp = factor_gram(A, 4)
    assert Xp.shape == (4, 6)
    assert np.max(np.abs(gram(Xp) - A)) <= 1e-8


@given(st.integers(1, 6), st.integers(1, 25), st.integers(0, 2**32))
@settings(max_examples=40, deadline=None)
def test_roundtrip_property(d, n, seed):
    X = sample_standard_cloud(n, d, seed)
    A = gram(X)
    assert np.max(np.abs(gram(factor_gram(A, d)) - A)) <= 1e-8 * max(1.0, np.max(np.abs(A)))


def test_conversion_preserves_inner_products():
    inst = plant_instance(30, 5, 0.1, 2)
    g = pw_to_gga(inst.X, inst.Y, inst.pi_star)
    Xp, Yp = gga_to_pw(g, rng=4)
    assert np.max(np.abs(gram(Xp) - g.A)) <= 1e-8
    assert np.max(np.abs(gram(Yp) - g.B)) <= 1e-8
    Xq, _ = gga_to_pw(g, remix=False)
    assert np.max(np.abs(gram(Xq) - g.A)) <= 1e-8


def test_noiseless_pipeline():
    hits = 0
    for s in range(10):
        inst = plant_instance(30, 5, 0.0, s)
        Xp, Yp = gga_to_pw(pw_to_gga(inst.X, inst.Y, inst.pi_star), rng=s)
        pi, _, _ = run_ping_pong(Xp, Yp, PingPongConfig())
        hits += overlap(pi, inst.pi_star) == 1.0
    assert hits >= 9


def test_noisy_pipeline():
    hits = 0
    for s in range(10):
        inst = plant_instance(100, 20, 0.05, s)
        Xp, Yp = gga_to_pw(pw_to_gga(inst.X, inst.Y), rng=s)
        pi, _, _ = run_ping_pong(Xp, Yp, PingPongConfig(T=200, K=30))
        hits += overlap(pi, inst.pi_star) >= 0.9
    assert hits >= 8


def test_gram_instance_validation():
    with pytest.raises(DimensionError):
        GramInstance(np.eye(3), np.eye(4), 2)
    with pytest.raises(DimensionError):
        GramInstance(np.array([[1.0, 2.0], [0.0, 1.0]]), np.eye(2), 2)
    with pytest.raises(DimensionError):
        GramInstance(-np.eye(2), np.eye(2), 2)


def test_gram_instance_file_roundtrip(tmp_path):
    inst = plant_instance(12, 3, 0.2, 0)
    for pi in (inst.pi_star, None):
        g = pw_to_gga(inst.X, inst.Y, pi)
        path = tmp_path / "g.npz"
        save_gram_instance(g, path)
        back = load_gram_instance(path)
        assert np.array_equal(back.A, g.A) and np.array_equal(back.B, g.B) and back.d == 3
        assert (back.pi_star is None) == (pi is None)
