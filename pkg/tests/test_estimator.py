import numpy as np
import pytest
from sklearn.base import clone
from sklearn.linear_model import LogisticRegression
from sklearn.pipeline import make_pipeline

from corrshare import CorrelationSharingSelector, ExpressionMatrix, gen_example1, shared_stat
from corrshare.scores import score_values


def _xy(seed=0):
    d = gen_example1(seed)
    return d.matrix.values.T, d.outcome.labels, d


def test_params_and_clone():
    sel = CorrelationSharingSelector(n_select=10, max_neighborhood=5)
    assert sel.get_params()["n_select"] == 10
    c = clone(sel)
    assert c.get_params() == sel.get_params()


def test_fit_matches_functional_api():
    X, y, d = _xy()
    sel = CorrelationSharingSelector(n_select=50).fit(X, y)
    T = score_values(d.matrix.values, d.outcome)
    res = shared_stat(d.matrix, T)
    np.testing.assert_array_equal(sel.scores_, T)
    np.testing.assert_array_equal(sel.shared_scores_, res.r)
    assert sel.get_support().sum() == 50
    assert sel.transform(X).shape == (30, 50)


def test_string_labels_and_threshold():
    X, y, _ = _xy()
    ys = np.where(y == 2, "tumour", "normal")
    sel = CorrelationSharingSelector(threshold=3.0).fit(X, ys)
    assert list(sel.classes_) == ["normal", "tumour"]
    np.testing.assert_array_equal(sel.get_support(), np.abs(sel.shared_scores_) > 3.0)


def test_pipeline():
    X, y, _ = _xy()
    pipe = make_pipeline(CorrelationSharingSelector(n_select=20), LogisticRegression())
    pipe.fit(X, y)
    assert pipe.score(X, y) > 0.8


def test_survival_y_and_fdr():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(20, 40))
    y = np.column_stack([rng.uniform(1, 10, 20), rng.integers(0, 2, 20)])
    y[0, 1] = 1
    sel = CorrelationSharingSelector(n_select=5, n_permutations=10).fit(X, y)
    assert sel.classes_ is None
    assert set(sel.fdr_) == {"t", "r"}


def test_bad_y():
    X = np.random.default_rng(0).normal(size=(6, 3))
    with pytest.raises(ValueError):
        CorrelationSharingSelector().fit(X, [0, 1, 2, 0, 1, 2])
    with pytest.raises(ValueError):
        CorrelationSharingSelector().fit(X, [0, 1])
