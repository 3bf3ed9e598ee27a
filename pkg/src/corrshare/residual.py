"""Residual correlation diagnostics.

The outcome effect itself induces correlation among shifted features, so the
diagnostic looks at correlations after subtracting each feature's fitted
value (its group mean for two-class data).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .ingest import DatasetHandle, ExpressionMatrix, TwoClass

__all__ = [
    "ResidualScan",
    "DEFAULT_QUANTILES",
    "residual_matrix",
    "abs_residual_correlation",
    "avg_abs_residual_corr",
    "residual_corr_scan",
]

DEFAULT_QUANTILES = tuple(round(0.99 - 0.02 * k, 2) for k in range(13))


@dataclass(frozen=True)
class ScanRow:
    quantile: float
    cutoff: float
    n_called: int
    within_called: Optional[float]
    called_vs_uncalled: Optional[float]
    within_uncalled: Optional[float]


@dataclass(frozen=True)
class ResidualScan:
    rows: list
    excluded: list = field(default_factory=list)

    @property
    def quantiles(self):
        return [row.quantile for row in self.rows]


def residual_matrix(handle: DatasetHandle) -> ExpressionMatrix:
    """Subtract fitted values: group means (two-class) or row means (survival)."""
    X = handle.matrix.values
    if isinstance(handle.outcome, TwoClass):
        fitted = np.empty_like(X)
        for g in (1, 2):
            cols = handle.outcome.labels == g
            fitted[:, cols] = X[:, cols].mean(axis=1, keepdims=True)
    else:
        fitted = np.broadcast_to(X.mean(axis=1, keepdims=True), X.shape)
    R = X - fitted
    # rows that are pure rounding noise become exact zeros
    scale = np.abs(X).max(axis=1)
    R[np.abs(R).max(axis=1) <= 1e-12 * scale] = 0.0
    m = handle.matrix
    return ExpressionMatrix(m.feature_ids, m.sample_ids, R)


def abs_residual_correlation(residuals):
    """``|corr|`` between residual rows plus a mask of rows with nonzero spread.

    Rows of all-zero residuals have undefined correlation; their entries are
    NaN and they are flagged in the mask.
    """
    R = residuals.values if hasattr(residuals, "values") else np.asarray(residuals)
    Rc = R - R.mean(axis=1, keepdims=True)
    norms = np.sqrt((Rc * Rc).sum(axis=1))
    ok = norms > 0
    Z = np.zeros_like(Rc)
    Z[ok] = Rc[ok] / norms[ok, None]
    C = np.abs(np.clip(Z @ Z.T, -1.0, 1.0))
    C[~ok, :] = np.nan
    C[:, ~ok] = np.nan
    return C, ok


def _pair_mean(C, ok, A, B):
    m = C.shape[0]
    inA = np.zeros(m, dtype=bool)
    inB = np.zeros(m, dtype=bool)
    inA[list(A)] = True
    inB[list(B)] = True
    inA &= ok
    inB &= ok
    pairs = np.outer(inA, inB) | np.outer(inB, inA)
    pairs = np.triu(pairs, k=1)
    if not pairs.any():
        return None
    # ascending pair order gives a reproducible reduction
    return float(np.sum(C[pairs]) / pairs.sum())


def avg_abs_residual_corr(residuals, setA, setB) -> Optional[float]:
    """Mean ``|corr|`` over unordered pairs ``{a, b}``, ``a`` in A, ``b`` in B, ``a != b``.

    Returns None when there is no valid pair. Rows with zero residual spread
    are left out.
    """
    C, ok = abs_residual_correlation(residuals)
    return _pair_mean(C, ok, setA, setB)


def residual_corr_scan(
    handle: DatasetHandle, scores, quantiles=DEFAULT_QUANTILES
) -> ResidualScan:
    """Average absolute residual correlation within and across called sets.

    At quantile ``q`` the called set is ``{i : |T_i| > q-quantile of |T|}``.
    """
    T = np.abs(np.asarray(getattr(scores, "values", scores), dtype=float))
    res = residual_matrix(handle)
    C, ok = abs_residual_correlation(res)
    excluded = [handle.matrix.feature_ids[i] for i in np.flatnonzero(~ok)]
    rows = []
    finite = np.isfinite(T)
    for q in quantiles:
        c = float(np.quantile(T[finite], q))
        called = np.flatnonzero(finite & (T > c))
        uncalled = np.flatnonzero(finite & ~(T > c))
        if len(called) == 0:
            rows.append(ScanRow(float(q), c, 0, None, None, None))
            continue
        rows.append(
            ScanRow(
                float(q),
                c,
                len(called),
                _pair_mean(C, ok, called, called),
                _pair_mean(C, ok, called, uncalled),
                _pair_mean(C, ok, uncalled, uncalled),
            )
        )
    return ResidualScan(rows, excluded)
