"""scikit-learn compatible feature selector built on correlation sharing."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.feature_selection import SelectorMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .evaluation import fdr_curve, permutation_null
from .exceptions import ValidationError
from .ingest import DatasetHandle, ExpressionMatrix, Survival, TwoClass
from .scores import score_values
from .sharing import CorrelationNeighbors, ShareOptions, shared_stat

__all__ = ["CorrelationSharingSelector", "check_outcome"]


def check_outcome(y, n_samples):
    """Turn ``y`` into a two-class or survival outcome.

    A 1-d ``y`` with exactly two distinct values is two-class; the smaller
    value becomes group 1. A 2-d ``y`` of shape (n, 2) is read as
    ``(time, event)`` columns. Returns ``(outcome, classes)``.
    """
    y = np.asarray(y)
    if y.ndim == 2 and y.shape[1] == 2:
        if y.shape[0] != n_samples:
            raise ValueError(f"y has {y.shape[0]} rows, X has {n_samples} samples")
        return Survival(y[:, 0].astype(float), y[:, 1].astype(int)), None
    y = np.ravel(y)
    if len(y) != n_samples:
        raise ValueError(f"y has {len(y)} entries, X has {n_samples} samples")
    classes = np.unique(y)
    if len(classes) != 2:
        raise ValueError(
            f"expected exactly two classes, got {len(classes)}; other outcome "
            "types are not supported"
        )
    return TwoClass(np.where(y == classes[1], 2, 1)), classes


class CorrelationSharingSelector(SelectorMixin, BaseEstimator):
    """Select features by the correlation-shared statistic.

    ``X`` follows the scikit-learn convention (samples as rows); internally
    features are rows. Each feature's score is the largest mean ``|T|`` over
    the features whose correlation with it is at least some threshold,
    signed by its own ``T``.

    Parameters
    ----------
    n_select : int, default=50
        Keep the features with the largest ``|r|``. Ignored when
        ``threshold`` is set.
    threshold : float, optional
        Keep features with ``|r| > threshold``.
    max_neighborhood : int, optional
        Upper bound on neighbourhood size.
    corr_floor : float, default=0.0
        Correlation level neighbours must exceed (must reach, at 0).
    raw_eq2 : bool, default=False
        Drop the ``sqrt(1/n1 + 1/n2)`` factor from the t denominator.
    n_permutations : int, default=0
        If positive, estimate an FDR curve for ``r`` and ``T`` by label
        permutation; stored in ``fdr_``.
    random_state : int, default=0
    n_jobs : int, default=1

    Attributes
    ----------
    scores_ : ndarray of shape (n_features,)
        Raw per-feature statistic ``T``.
    shared_scores_ : ndarray of shape (n_features,)
        Correlation-shared statistic ``r``.
    rho_hat_ : ndarray of shape (n_features,)
    neighborhoods_ : list of ndarray
        Chosen neighbourhood (column indices) for each feature.
    fdr_ : dict of FdrCurve, only when ``n_permutations > 0``.
    """

    def __init__(
        self,
        n_select=50,
        threshold=None,
        max_neighborhood=None,
        corr_floor=0.0,
        raw_eq2=False,
        n_permutations=0,
        fp_estimator="mean",
        random_state=0,
        n_jobs=1,
    ):
        self.n_select = n_select
        self.threshold = threshold
        self.max_neighborhood = max_neighborhood
        self.corr_floor = corr_floor
        self.raw_eq2 = raw_eq2
        self.n_permutations = n_permutations
        self.fp_estimator = fp_estimator
        self.random_state = random_state
        self.n_jobs = n_jobs

    def fit(self, X, y):
        X = check_array(X, dtype=float, ensure_min_samples=2)
        outcome, self.classes_ = check_outcome(y, X.shape[0])
        n, m = X.shape
        self.n_features_in_ = m
        matrix = ExpressionMatrix(
            [str(j) for j in range(m)], [str(k) for k in range(n)], X.T
        )
        T = score_values(matrix.values, outcome, raw_eq2=self.raw_eq2)
        if not np.all(np.isfinite(T)):
            bad = np.flatnonzero(~np.isfinite(T))
            raise ValidationError(
                f"{len(bad)} feature(s) have an undefined score (e.g. column {bad[0]}); "
                "remove constant columns first"
            )
        opts = ShareOptions(self.max_neighborhood, self.corr_floor)
        workers = self.n_jobs or 1
        neighbors = CorrelationNeighbors.from_matrix(matrix.values, opts, workers=workers)
        res = shared_stat(matrix, T, opts, neighbors=neighbors, workers=workers)
        self.scores_ = T
        self.shared_scores_ = res.r
        self.rho_hat_ = res.rho_hat
        self.neighborhoods_ = res.members
        if self.n_permutations:
            handle = DatasetHandle(matrix, outcome)
            null = permutation_null(
                handle,
                opts,
                B=self.n_permutations,
                seed=self.random_state,
                workers=workers,
                raw_eq2=self.raw_eq2,
                neighbors=neighbors,
            )
            self.fdr_ = {
                "t": fdr_curve(T, null.abs_T, estimator=self.fp_estimator),
                "r": fdr_curve(res.r, null.abs_r, estimator=self.fp_estimator),
            }
        return self

    def _get_support_mask(self):
        check_is_fitted(self, "shared_scores_")
        a = np.abs(self.shared_scores_)
        if self.threshold is not None:
            return a > self.threshold
        k = min(int(self.n_select), len(a))
        mask = np.zeros(len(a), dtype=bool)
        # stable: ties broken toward the lower column index
        mask[np.argsort(-a, kind="stable")[:k]] = True
        return mask
