"""Correlation-shared statistic and its adaptive neighbourhoods.

For feature ``i`` the candidate neighbourhoods are the level sets
``{j : corr(x_i, x_j) >= rho}``. They only change at observed correlation
values, so the maximum over ``rho`` is found by walking features in order of
decreasing correlation with ``i`` and taking the best running mean, evaluated
only at positions where the correlation strictly drops (so every candidate is
a genuine level set).

The sorted neighbour lists depend on the matrix alone, never on the outcome,
so they are built once (:class:`CorrelationNeighbors`) and reused for every
label permutation.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._kernels import best_prefix_csr
from .exceptions import NumericalError

__all__ = [
    "ShareOptions",
    "SharedResult",
    "CorrelationNeighbors",
    "standardize_rows",
    "correlation_matrix",
    "row_correlations",
    "shared_stat",
    "shared_values",
    "neighborhoods",
]

BLOCK_ROWS = 256


@dataclass(frozen=True)
class ShareOptions:
    """Neighbourhood constraints.

    ``max_neighborhood`` caps the neighbourhood size (None = unbounded).
    ``correlation_floor`` is the level below which no feature can join a
    neighbourhood; when it is positive, members need correlation strictly
    above it.
    """

    max_neighborhood: Optional[int] = None
    correlation_floor: float = 0.0
    include_negative: bool = False

    def __post_init__(self):
        K = self.max_neighborhood
        if K is not None and (int(K) != K or K < 1):
            raise ValueError(f"max_neighborhood must be a positive integer, got {K!r}")
        if not 0.0 <= self.correlation_floor < 1.0:
            raise ValueError(
                f"correlation_floor must be in [0, 1), got {self.correlation_floor!r}"
            )
        if self.include_negative:
            raise ValueError("negative correlations never admit neighbours")

    def eligible(self, c: np.ndarray) -> np.ndarray:
        delta = self.correlation_floor
        if delta > 0:
            return c > delta
        return c >= 0.0


def standardize_rows(X) -> np.ndarray:
    """Centre rows and scale them to unit Euclidean norm."""
    X = np.asarray(X, dtype=float)
    Xc = X - X.mean(axis=1, keepdims=True)
    norms = np.sqrt((Xc * Xc).sum(axis=1))
    if np.any(norms == 0):
        bad = int(np.flatnonzero(norms == 0)[0])
        raise NumericalError(f"row {bad} has zero variance; correlation undefined")
    return Xc / norms[:, None]


def _corr_block(Z, rows):
    C = Z[rows] @ Z.T
    np.clip(C, -1.0, 1.0, out=C)
    C[np.arange(len(rows)), rows] = 1.0
    return C


def correlation_matrix(X) -> np.ndarray:
    """Full Pearson correlation matrix of the rows of ``X`` (unit diagonal)."""
    Z = standardize_rows(X)
    m = Z.shape[0]
    out = np.empty((m, m))
    for start in range(0, m, BLOCK_ROWS):
        rows = np.arange(start, min(start + BLOCK_ROWS, m))
        out[rows] = _corr_block(Z, rows)
    return out


def row_correlations(X, i: int) -> np.ndarray:
    """Correlations of row ``i`` with every row, clamped to [-1, 1]."""
    if hasattr(X, "values"):
        X = X.values
    Z = standardize_rows(X)
    c = Z @ Z[i]
    np.clip(c, -1.0, 1.0, out=c)
    c[i] = 1.0
    return c


def _sorted_row(i, c, opts):
    """Neighbour order for feature ``i`` given its correlation row ``c``."""
    mask = opts.eligible(c)
    mask[i] = False
    idx = np.flatnonzero(mask)
    cj = c[idx]
    # decreasing correlation, lower index first among ties; i always leads
    order = np.lexsort((idx, -cj))
    members = np.concatenate(([i], idx[order]))
    corr = np.concatenate(([1.0], cj[order]))
    L = len(members)
    boundary = np.empty(L, dtype=bool)
    boundary[:-1] = corr[:-1] > corr[1:]
    boundary[-1] = True
    boundary[0] = True
    K = opts.max_neighborhood
    if K is not None and L > K:
        members, corr, boundary = members[:K], corr[:K], boundary[:K]
    return members, corr, boundary


class CorrelationNeighbors:
    """Candidate neighbours of every feature, sorted by decreasing correlation.

    Stored in compressed-row form: row ``i`` occupies
    ``indices[indptr[i]:indptr[i + 1]]`` and starts with ``i`` itself.
    ``valid`` marks positions where a prefix is a genuine level set (the
    correlation strictly drops after it, or it is the first or last entry).
    """

    def __init__(self, rows, opts):
        self.opts = opts
        self.m = len(rows)
        self.lengths = np.array([len(r[0]) for r in rows], dtype=np.int64)
        self.indptr = np.zeros(self.m + 1, dtype=np.int64)
        np.cumsum(self.lengths, out=self.indptr[1:])
        if rows:
            self.indices = np.concatenate([r[0] for r in rows]).astype(np.int64)
            self.corr = np.concatenate([r[1] for r in rows])
            self.valid = np.concatenate([r[2] for r in rows])
        else:
            self.indices = np.zeros(0, dtype=np.int64)
            self.corr = np.zeros(0)
            self.valid = np.zeros(0, dtype=bool)

    @classmethod
    def from_matrix(cls, X, opts: ShareOptions = ShareOptions(), workers: int = 1):
        if hasattr(X, "values"):
            X = X.values
        Z = standardize_rows(X)
        m = Z.shape[0]
        starts = list(range(0, m, BLOCK_ROWS))

        def build(start):
            rows = np.arange(start, min(start + BLOCK_ROWS, m))
            C = _corr_block(Z, rows)
            return [_sorted_row(i, C[k], opts) for k, i in enumerate(rows)]

        parts = _map(build, starts, workers)
        return cls([row for part in parts for row in part], opts)

    @classmethod
    def from_correlation(cls, corr, opts: ShareOptions = ShareOptions()):
        corr = np.array(corr, dtype=float)
        if corr.ndim != 2 or corr.shape[0] != corr.shape[1]:
            raise ValueError("correlation matrix must be square")
        np.clip(corr, -1.0, 1.0, out=corr)
        np.fill_diagonal(corr, 1.0)
        return cls([_sorted_row(i, corr[i], opts) for i in range(len(corr))], opts)

    def members(self, i: int, length: Optional[int] = None) -> np.ndarray:
        length = self.lengths[i] if length is None else length
        start = self.indptr[i]
        return self.indices[start : start + length]

    def correlations(self, i: int) -> np.ndarray:
        return self.corr[self.indptr[i] : self.indptr[i + 1]]

    def best_prefix(self, values, workers: int = 1):
        """Winning prefix length and its mean for every feature.

        Ties between prefix means go to the shorter prefix.
        """
        values = np.ascontiguousarray(values, dtype=float)
        if values.shape != (self.m,):
            raise ValueError(f"expected {self.m} values, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("values must be finite")
        best_len = np.empty(self.m, dtype=np.int64)
        best_mean = np.empty(self.m)

        def run(start):
            stop = min(start + BLOCK_ROWS, self.m)
            best_prefix_csr(
                self.indptr, self.indices, self.valid, values, start, stop, best_len, best_mean
            )

        _map(run, list(range(0, self.m, BLOCK_ROWS)), workers)
        return best_len, best_mean


def _map(fn, items, workers):
    if workers is None or workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


@dataclass(frozen=True)
class SharedResult:
    """Per-feature output of correlation sharing.

    ``members[i]`` is sorted ascending and always contains ``i``;
    ``rho_hat[i]`` is the smallest correlation with ``i`` among the members.
    """

    T: np.ndarray
    r: np.ndarray
    u: np.ndarray
    rho_hat: np.ndarray
    members: list

    @property
    def sizes(self) -> np.ndarray:
        return np.array([len(mb) for mb in self.members])


def _sign_plus(T):
    return np.where(T < 0, -1.0, 1.0)


def shared_values(neighbors: CorrelationNeighbors, T, signed: bool = False, workers: int = 1):
    """Shared statistic only (no neighbourhood bookkeeping).

    With ``signed=False`` this averages ``|T|`` and re-signs by ``sign(T)``;
    with ``signed=True`` it averages the signed scores and returns the
    maximum directly.
    """
    T = np.asarray(T, dtype=float)
    if signed:
        _, mean = neighbors.best_prefix(T, workers=workers)
        return mean
    _, u = neighbors.best_prefix(np.abs(T), workers=workers)
    return _sign_plus(T) * u


def shared_stat(
    matrix,
    scores,
    opts: ShareOptions = ShareOptions(),
    neighbors: Optional[CorrelationNeighbors] = None,
    signed: bool = False,
    workers: int = 1,
) -> SharedResult:
    """Correlation-shared statistic for every feature.

    ``u_i`` is the largest mean of ``|T_j|`` over the correlation level sets
    of feature ``i`` allowed by ``opts``, and ``r_i = sign(T_i) * u_i`` with
    ``sign(0) = +1``. ``signed=True`` averages the signed scores instead and
    reports ``r = u = max mean``.
    """
    T = np.asarray(getattr(scores, "values", scores), dtype=float)
    X = matrix.values if hasattr(matrix, "values") else np.asarray(matrix)
    if T.shape != (X.shape[0],):
        raise ValueError(
            f"{T.shape[0] if T.ndim else 0} scores for a matrix with {X.shape[0]} features"
        )
    if not np.all(np.isfinite(T)):
        raise ValueError("scores must be finite; drop unscorable features first")
    if neighbors is None:
        neighbors = CorrelationNeighbors.from_matrix(X, opts, workers=workers)
    elif neighbors.m != len(T):
        raise ValueError("neighbors were built for a different number of features")
    if signed:
        length, u = neighbors.best_prefix(T, workers=workers)
        r = u
    else:
        length, u = neighbors.best_prefix(np.abs(T), workers=workers)
        r = _sign_plus(T) * u
    rho_hat = np.array(
        [neighbors.correlations(i)[length[i] - 1] for i in range(len(T))]
    )
    members = [np.sort(neighbors.members(i, length[i])) for i in range(len(T))]
    return SharedResult(T=T, r=r, u=u, rho_hat=rho_hat, members=members)


def neighborhoods(result: SharedResult, feature_ids=None):
    """One ``(feature_id, rho_hat, member_ids)`` record per feature.

    These are the adaptively chosen, possibly overlapping clusters; each one
    contains its seed feature.
    """
    if feature_ids is None:
        feature_ids = list(range(len(result.members)))
    out = []
    for i, mb in enumerate(result.members):
        out.append((feature_ids[i], float(result.rho_hat[i]), [feature_ids[j] for j in mb]))
    return out
