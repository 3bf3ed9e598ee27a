import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from corrshare import DatasetHandle, ExpressionMatrix, Survival, TwoClass, gen_example1
from corrshare.residual import (
    DEFAULT_QUANTILES,
    avg_abs_residual_corr,
    residual_corr_scan,
    residual_matrix,
)
from corrshare.scores import score_values


def _handle(X, outcome):
    X = np.atleast_2d(np.asarray(X, dtype=float))
    m, n = X.shape
    mat = ExpressionMatrix([f"f{i}" for i in range(m)], [f"s{j}" for j in range(n)], X)
    return DatasetHandle(mat, outcome)


LAB = TwoClass(np.array([1, 2, 1, 2]))


def test_subtract_group_means():
    # group 1 = {1, 3} (mean 2), group 2 = {2, 6} (mean 4)
    R = residual_matrix(_handle([[1, 2, 3, 6]], LAB)).values
    np.testing.assert_array_equal(R, [[-1, -2, 1, 2]])


def test_equal_group_means_row_centred():
    X = np.array([[1.0, 3, 3, 1]])
    R = residual_matrix(_handle(X, LAB)).values
    np.testing.assert_allclose(R, X - X.mean(), atol=1e-15)


def test_pure_group_effect_gives_zero():
    R = residual_matrix(_handle([[0, 0.7, 0, 0.7]], LAB)).values
    assert np.all(R == 0.0)


def test_survival_row_centring():
    X = np.array([[1.0, 2, 6]])
    out = Survival(np.array([1.0, 2, 3]), np.array([1, 0, 1]))
    np.testing.assert_allclose(residual_matrix(_handle(X, out)).values, X - 3.0)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31), st.floats(-5, 5), st.floats(-5, 5))
def test_group_shift_invariance(seed, a, b):
    X = np.random.default_rng(seed).normal(size=(3, 4))
    shift = np.where(LAB.labels == 2, b, a)
    R1 = residual_matrix(_handle(X, LAB)).values
    R2 = residual_matrix(_handle(X + shift, LAB)).values
    np.testing.assert_allclose(R1, R2, atol=1e-12)


def test_single_feature_undefined():
    assert avg_abs_residual_corr(np.array([[1.0, -1, 2, -2]]), [0], [0]) is None


def test_proportional_rows():
    R = np.array([[1.0, -1, 2, -2], [-2.0, 2, -4, 4]])
    assert avg_abs_residual_corr(R, [0, 1], [0, 1]) == pytest.approx(1.0, abs=1e-15)


def test_zero_rows_excluded():
    R = np.array([[1.0, -1, 2, -2], [0.0, 0, 0, 0]])
    assert avg_abs_residual_corr(R, [0, 1], [0, 1]) is None


def test_independent_rows_near_zero():
    R = np.random.default_rng(0).normal(size=(3, 200))
    assert avg_abs_residual_corr(R, [0, 1, 2], [0, 1, 2]) < 0.2


def test_pair_average_by_hand():
    R = np.random.default_rng(1).normal(size=(4, 10))
    C = np.abs(np.corrcoef(R))
    expect = (C[0, 2] + C[0, 3] + C[1, 2] + C[1, 3]) / 4
    assert avg_abs_residual_corr(R, [0, 1], [2, 3]) == pytest.approx(expect, abs=1e-12)
    within = (C[0, 1] + C[0, 2] + C[1, 2]) / 3
    assert avg_abs_residual_corr(R, [0, 1, 2], [0, 1, 2]) == pytest.approx(within, abs=1e-12)


def test_default_quantiles():
    assert DEFAULT_QUANTILES[0] == 0.99 and DEFAULT_QUANTILES[-1] == 0.75
    assert len(DEFAULT_QUANTILES) == 13


def test_equal_scores_empty_calls():
    X = np.random.default_rng(2).normal(size=(6, 4))
    scan = residual_corr_scan(_handle(X, LAB), np.ones(6))
    for row in scan.rows:
        assert row.n_called == 0
        assert row.within_called is None and row.called_vs_uncalled is None


def test_example1_within_called_exceeds_uncalled():
    d = gen_example1(0)
    h = DatasetHandle(d.matrix, d.outcome)
    T = score_values(d.matrix.values, d.outcome)
    row = [r for r in residual_corr_scan(h, T).rows if r.quantile == 0.95][0]
    assert row.within_called > row.within_uncalled
