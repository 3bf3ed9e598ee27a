import numpy as np
import pytest

from corrshare import DatasetHandle, SimSpec, gen_custom, gen_example1, gen_example2
from corrshare.residual import avg_abs_residual_corr, residual_matrix
from corrshare.simulate import gen_oracle_means


def _offdiag_mean(R):
    C = np.corrcoef(R)
    return C[np.triu_indices(len(C), 1)].mean()


def test_example1_shape_and_truth():
    d = gen_example1(0)
    assert d.matrix.shape == (1000, 30)
    assert d.truth.tolist() == list(range(50))
    assert d.outcome.labels.tolist() == [1] * 15 + [2] * 15


def test_example2_truth():
    assert gen_example2(0).truth.tolist() == list(range(50))


def test_bit_identical_for_same_seed():
    a, b = gen_example1(11), gen_example1(11)
    assert a.matrix.values.tobytes() == b.matrix.values.tobytes()
    assert a.matrix.values.tobytes() != gen_example1(12).matrix.values.tobytes()


def test_example1_residual_correlation_near_08():
    vals = []
    for seed in range(20):
        d = gen_example1(seed)
        R = residual_matrix(DatasetHandle(d.matrix, d.outcome)).values[:50]
        vals.append(_offdiag_mean(R))
    assert abs(np.mean(vals) - 0.8) <= 0.1


def test_example2_residual_correlation_near_zero():
    vals = []
    for seed in range(20):
        d = gen_example2(seed)
        R = residual_matrix(DatasetHandle(d.matrix, d.outcome)).values[:50]
        vals.append(_offdiag_mean(R))
    assert abs(np.mean(vals)) < 0.05


def test_example2_group_shift():
    diffs = []
    for seed in range(20):
        X = gen_example2(seed).matrix.values[:50]
        diffs.append((X[:, 15:].mean(axis=1) - X[:, :15].mean(axis=1)).mean())
    assert np.mean(diffs) == pytest.approx(0.75, abs=0.05)


def test_unit_marginal_variance():
    d = gen_custom(SimSpec(m=200, n=4000, n_nonnull=100, shift=0.0, rho=0.8, group2_start=2000))
    var = d.matrix.values.var(axis=1)
    assert np.mean(var[:100]) == pytest.approx(1.0, abs=0.05)
    assert np.mean(var[100:]) == pytest.approx(1.0, abs=0.05)


def test_custom_matches_example1_path():
    a = gen_custom(SimSpec(seed=4))
    assert a.matrix.values.tobytes() == gen_example1(4).matrix.values.tobytes()


def test_pure_null_and_near_duplicates():
    d = gen_custom(SimSpec(m=100, n_nonnull=0))
    assert len(d.truth) == 0
    d = gen_custom(SimSpec(m=100, n_nonnull=10, rho=0.99, shift=0.0))
    C = np.corrcoef(d.matrix.values[:10])
    assert C[np.triu_indices(10, 1)].min() > 0.9


def test_spec_validation():
    with pytest.raises(ValueError):
        SimSpec(m=10, n_nonnull=11)
    with pytest.raises(ValueError):
        SimSpec(rho=1.0)
    with pytest.raises(ValueError):
        SimSpec(group2_start=1)


def test_oracle_means():
    lf = gen_oracle_means("least_favorable", 80)
    assert lf[0] == 10.0 and np.all(lf[1:] == 1.0)
    re = gen_oracle_means("random_effects", 10_000, seed=1)
    assert re.mean() == pytest.approx(3.0, abs=0.05)
    assert re.std() == pytest.approx(1.0, abs=0.05)
    with pytest.raises(ValueError):
        gen_oracle_means("other", 5)
