import numpy as np
import pytest

import oracles
from corrshare import ExpressionMatrix, shared_stat
from corrshare.oracle import (
    block_correlation,
    cesaro_average,
    covariance_kernel,
    lemma1_experiment,
    noncentrality_curve,
    oracle_stat,
    power_gain_condition,
)
from corrshare.sharing import correlation_matrix
from corrshare.simulate import gen_oracle_means


def test_cesaro_least_favorable():
    bb = cesaro_average(gen_oracle_means("least_favorable", 80))
    assert bb[0] == 10.0
    assert bb[1] == 5.5
    assert bb[79] == pytest.approx(10 / 80 + 79 / 80, rel=1e-15)
    assert bb[79] == pytest.approx(1.1125, rel=1e-15)


def test_cesaro_constant_and_first():
    np.testing.assert_allclose(cesaro_average(np.full(7, 2.5)), 2.5)
    b = np.random.default_rng(0).normal(size=9)
    assert cesaro_average(b)[0] == b[0]


def test_kernel_identity_and_block():
    K = covariance_kernel(np.eye(6), n=4, sigma2=2.0)
    np.testing.assert_allclose(np.diag(K.J), 2.0 / (4 * np.arange(1, 7)))
    rho = 0.3
    P = block_correlation(10, 5, rho)
    K = covariance_kernel(P, n=3, sigma2=1.5)
    for r in range(1, 6):
        assert K.J[r - 1, r - 1] == pytest.approx(1.5 * (1 + (r - 1) * rho) / (3 * r), rel=1e-13)
    assert np.array_equal(K.J, K.J.T)


def test_kernel_matches_double_sum():
    rng = np.random.default_rng(2)
    A = rng.normal(size=(6, 20))
    P = np.corrcoef(A)
    K = covariance_kernel(P, n=5, sigma2=1.0)
    o = K.order
    for r in range(1, 7):
        for s in range(1, 7):
            want = sum(P[o[j], o[k]] for j in range(r) for k in range(s)) / (5 * r * s)
            assert K.J[r - 1, s - 1] == pytest.approx(want, rel=1e-12)


def test_noncentrality_least_favorable():
    cur = noncentrality_curve(gen_oracle_means("least_favorable", 80), rho=0.5, n=1)
    assert cur.pi_r1 == 50.0
    assert cur.noncentrality[0] == 50.0
    assert cur.t1_noncentrality == 100.0
    assert cur.r_star == 1


def test_noncentrality_constant_beta_increasing():
    cur = noncentrality_curve(np.full(10, 2.0), rho=0.0, n=3)
    np.testing.assert_allclose(cur.noncentrality, 3 * np.arange(1, 11) * 4.0)
    assert cur.r_star == 1  # ties go to the smallest r


def test_random_effects_pi20_near_90():
    vals = [noncentrality_curve(gen_oracle_means("random_effects", 20, s), 0.5).noncentrality[19]
            for s in range(200)]
    assert np.median(vals) == pytest.approx(90, rel=0.15)


def test_power_gain():
    lf = power_gain_condition(gen_oracle_means("least_favorable", 80), 0.5)
    assert not lf.holds and lf.r_star == 1
    assert lf.margin == pytest.approx(50 - 100)
    draws = [power_gain_condition(gen_oracle_means("random_effects", 80, s), 0.5).holds
             for s in range(100)]
    assert sum(draws) > 50
    single = power_gain_condition([3.0], 0.2)
    assert not single.holds


def test_oracle_stat_identity_and_hand():
    T = np.array([1.5, -2.0, 0.3])
    for i in range(3):
        k, mem = oracle_stat(T, np.eye(3), i)
        assert k == T[i] and mem.tolist() == [i]
    P = np.array([[1.0, 0.8, 0.2], [0.8, 1.0, 0.1], [0.2, 0.1, 1.0]])
    T = np.array([1.0, 3.0, 5.0])
    # prefixes for feature 0: 1, 2, 3
    k, mem = oracle_stat(T, P, 0)
    assert k == 3.0 and mem.tolist() == [0, 1, 2]


def test_oracle_matches_signed_shared():
    rng = np.random.default_rng(6)
    X = rng.normal(size=(25, 9))
    X[:8] += rng.normal(size=9)
    T = rng.normal(size=25) + 1.0
    C = correlation_matrix(X)
    mat = ExpressionMatrix([f"f{i}" for i in range(25)], [f"s{j}" for j in range(9)], X)
    res = shared_stat(mat, T, signed=True)
    u, _, _ = oracles.brute_force_shared(C, T, signed=True)
    for i in range(25):
        k, _ = oracle_stat(T, C, i)
        assert k == res.r[i] == u[i]


def test_lemma1_ordering_and_large_C():
    tab = lemma1_experiment(m=200, C_values=(5, 20, 80), n_reps=10, seed=0)
    med = [row["median_max_error"] for row in tab]
    assert med[0] > med[1] > med[2]
    assert tab[0]["n"] == int(np.ceil(5 * np.log(200)))
    big = lemma1_experiment(m=50, C_values=(400,), n_reps=5, seed=1)
    assert big[0]["median_max_error"] < 0.15


def test_lemma1_two_features_and_workers():
    a = lemma1_experiment(m=2, C_values=(10,), n_reps=6, seed=2)
    b = lemma1_experiment(m=2, C_values=(10,), n_reps=6, seed=2, workers=3)
    assert a[0]["errors"] == b[0]["errors"]
    assert all(0 <= e <= 1 for e in a[0]["errors"])
    blk = lemma1_experiment(m=30, C_values=(20,), n_reps=3, rho_structure="block")
    assert blk[0]["median_max_error"] < 1
