"""Per-feature raw statistics: two-sample t and the Cox partial-likelihood score."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import ExtensionPointError
from .ingest import DatasetHandle, Survival, TwoClass

__all__ = ["ScoreVector", "two_sample_tstat", "cox_score", "score", "score_values"]

TWO_SAMPLE_T = "TwoSampleT"
COX_SCORE = "CoxScore"

# relative size below which the Cox information is treated as zero
_INFO_RTOL = 1e-12


@dataclass(frozen=True)
class ScoreVector:
    """Per-feature statistic.

    ``values`` holds NaN at the positions listed in ``unscorable``; every
    other entry is finite.
    """

    kind: str
    values: np.ndarray
    unscorable: tuple = ()

    def __len__(self):
        return len(self.values)

    @property
    def scorable_mask(self) -> np.ndarray:
        mask = np.ones(len(self.values), dtype=bool)
        mask[list(self.unscorable)] = False
        return mask


def _tstat_values(X, labels, raw_eq2=False):
    g2 = labels == 2
    g1 = ~g2
    n1 = int(g1.sum())
    n2 = int(g2.sum())
    Xc = X - X.mean(axis=1, keepdims=True)
    a = Xc[:, g1]
    b = Xc[:, g2]
    s1 = a.sum(axis=1)
    s2 = b.sum(axis=1)
    # within-group sums of squares; the two terms are symmetric so swapping
    # the labels negates T bit-for-bit
    ss1 = (a * a).sum(axis=1) - s1 * s1 / n1
    ss2 = (b * b).sum(axis=1) - s2 * s2 / n2
    pooled = np.maximum(ss1 + ss2, 0.0) / (n1 + n2 - 2)
    diff = s2 / n2 - s1 / n1
    sd = np.sqrt(pooled)
    if not raw_eq2:
        sd = sd * np.sqrt(1.0 / n1 + 1.0 / n2)
    with np.errstate(divide="ignore", invalid="ignore"):
        return diff / sd


def _cox_values(X, time, event):
    Xc = X - X.mean(axis=1, keepdims=True)
    order = np.argsort(-time, kind="stable")
    ts = time[order]
    cs1 = np.cumsum(Xc[:, order], axis=1)
    cs2 = np.cumsum(Xc[:, order] ** 2, axis=1)
    event_times = np.unique(time[event == 1])
    # risk set for t = every sample with time >= t = a prefix of the descending order
    at_risk = len(ts) - np.searchsorted(ts[::-1], event_times, side="left")
    deaths = np.array([np.sum((time == t) & (event == 1)) for t in event_times])
    S1 = cs1[:, at_risk - 1]
    S2 = cs2[:, at_risk - 1]
    mean = S1 / at_risk
    var = np.maximum(S2 / at_risk - mean * mean, 0.0)
    var[:, at_risk == 1] = 0.0
    U = Xc[:, event == 1].sum(axis=1) - (mean * deaths).sum(axis=1)
    info = (var * deaths).sum(axis=1)
    scale = Xc.var(axis=1) * deaths.sum()
    with np.errstate(divide="ignore", invalid="ignore"):
        stat = U / np.sqrt(info)
    stat[info <= _INFO_RTOL * scale] = np.nan
    return stat


def score_values(X, outcome, raw_eq2: bool = False) -> np.ndarray:
    """Raw statistic per row of ``X`` for the given outcome (NaN if unscorable)."""
    X = np.asarray(X, dtype=float)
    if isinstance(outcome, TwoClass):
        return _tstat_values(X, outcome.labels, raw_eq2=raw_eq2)
    if isinstance(outcome, Survival):
        return _cox_values(X, outcome.time, outcome.event)
    raise ExtensionPointError(
        f"no score defined for outcome type {type(outcome).__name__}; "
        "multi-class and quantitative outcomes are an extension point"
    )


def two_sample_tstat(handle: DatasetHandle, raw_eq2: bool = False) -> ScoreVector:
    """Two-sample t-statistic, group 2 mean minus group 1 mean.

    The denominator is the pooled within-group standard deviation times
    ``sqrt(1/n1 + 1/n2)``. With ``raw_eq2=True`` the standard-error factor is
    omitted and only the pooled standard deviation is used.
    """
    if not isinstance(handle.outcome, TwoClass):
        raise TypeError("two_sample_tstat needs a TwoClass outcome")
    values = _tstat_values(handle.matrix.values, handle.outcome.labels, raw_eq2)
    return ScoreVector(TWO_SAMPLE_T, values)


def cox_score(handle: DatasetHandle) -> ScoreVector:
    """Single-covariate Cox score test at beta = 0, Breslow ties.

    Features with zero information are returned as NaN and listed in
    ``unscorable`` rather than raising.
    """
    if not isinstance(handle.outcome, Survival):
        raise TypeError("cox_score needs a Survival outcome")
    out = handle.outcome
    values = _cox_values(handle.matrix.values, out.time, out.event)
    bad = tuple(int(i) for i in np.flatnonzero(np.isnan(values)))
    return ScoreVector(COX_SCORE, values, bad)


def score(handle: DatasetHandle, raw_eq2: bool = False) -> ScoreVector:
    if isinstance(handle.outcome, TwoClass):
        return two_sample_tstat(handle, raw_eq2=raw_eq2)
    if isinstance(handle.outcome, Survival):
        return cox_score(handle)
    raise ExtensionPointError(
        f"no score defined for outcome type {type(handle.outcome).__name__}; "
        "multi-class and quantitative outcomes are an extension point"
    )
