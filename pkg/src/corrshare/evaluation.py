"""Permutation FDR estimates, truth-based error curves and train/test agreement."""

from __future__ import annotations

import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .exceptions import ValidationError
from .ingest import DatasetHandle, Survival, TwoClass, validate_dataset
from .scores import score_values
from .sharing import CorrelationNeighbors, ShareOptions, shared_values

__all__ = [
    "NullDraws",
    "FdrCurve",
    "TruthCurve",
    "AgreementCurve",
    "permutation_null",
    "observed_statistics",
    "default_cutoffs",
    "fdr_curve",
    "truth_curve",
    "calls_at_count",
    "false_positives_at",
    "agreement_curve",
    "train_test_validate",
    "EXHAUSTIVE_LIMIT",
]

EXHAUSTIVE_LIMIT = 10_000
MAX_CUTOFFS = 500


@dataclass(frozen=True)
class NullDraws:
    """Per-permutation absolute statistics, shape (B, m)."""

    abs_T: np.ndarray
    abs_r: np.ndarray
    assignments: np.ndarray
    exhaustive: bool

    @property
    def n_permutations(self) -> int:
        return self.abs_T.shape[0]


@dataclass(frozen=True)
class FdrCurve:
    cutoffs: np.ndarray
    n_called: np.ndarray
    est_false_positives: np.ndarray
    est_fdr: np.ndarray

    def rows(self):
        for c, k, fp, q in zip(self.cutoffs, self.n_called, self.est_false_positives, self.est_fdr):
            yield float(c), int(k), float(fp), float(q)


@dataclass(frozen=True)
class TruthCurve:
    cutoffs: np.ndarray
    n_called: np.ndarray
    n_false_positive: np.ndarray
    n_false_negative: np.ndarray


@dataclass(frozen=True)
class AgreementCurve:
    cutoffs: np.ndarray
    n_called_train: np.ndarray
    test_false_positives: np.ndarray
    test_false_negatives: np.ndarray


def _n_assignments(codes) -> int:
    counts = Counter(codes.tolist())
    total = math.factorial(len(codes))
    for c in counts.values():
        total //= math.factorial(c)
    return total


def _multiset_permutations(codes):
    """Distinct rearrangements of ``codes`` in lexicographic order."""
    a = sorted(codes.tolist())
    n = len(a)
    while True:
        yield list(a)
        k = n - 2
        while k >= 0 and a[k] >= a[k + 1]:
            k -= 1
        if k < 0:
            return
        j = n - 1
        while a[j] <= a[k]:
            j -= 1
        a[k], a[j] = a[j], a[k]
        a[k + 1 :] = reversed(a[k + 1 :])


def _outcome_codes(outcome):
    """Integer code per sample such that equal codes mean interchangeable records."""
    if isinstance(outcome, TwoClass):
        return np.asarray(outcome.labels), None
    pairs = list(zip(outcome.time.tolist(), outcome.event.tolist()))
    table = sorted(set(pairs))
    lookup = {p: k for k, p in enumerate(table)}
    return np.array([lookup[p] for p in pairs]), table


def _outcome_from_codes(outcome, codes, table):
    if isinstance(outcome, TwoClass):
        return TwoClass(np.asarray(codes))
    time = np.array([table[c][0] for c in codes])
    event = np.array([table[c][1] for c in codes])
    return Survival(time, event)


def _assignments(outcome, B, seed, exhaustive_limit):
    codes, table = _outcome_codes(outcome)
    if exhaustive_limit and _n_assignments(codes) <= exhaustive_limit:
        return np.array(list(_multiset_permutations(codes))), table, True
    out = np.empty((B, len(codes)), dtype=codes.dtype)
    for b in range(B):
        # one generator stream per permutation index: schedule independent
        rng = np.random.default_rng([seed, b])
        out[b] = codes[rng.permutation(len(codes))]
    return out, table, False


def _abs_null_scores(values):
    values = np.abs(values)
    # a feature unscorable under one relabelling cannot exceed any cutoff there
    values[np.isnan(values)] = 0.0
    return values


def observed_statistics(handle, neighbors, raw_eq2=False, workers=1):
    """Observed ``(T, r)`` computed exactly as the permutation draws are."""
    T = score_values(handle.matrix.values, handle.outcome, raw_eq2=raw_eq2)
    if not np.all(np.isfinite(T)):
        raise ValidationError("unscorable features present; drop them before sharing")
    return T, shared_values(neighbors, T, workers=workers)


def permutation_null(
    handle: DatasetHandle,
    opts: ShareOptions = ShareOptions(),
    B: int = 100,
    seed: int = 0,
    workers: int = 1,
    raw_eq2: bool = False,
    neighbors: Optional[CorrelationNeighbors] = None,
    assignments=None,
    exhaustive_limit: int = EXHAUSTIVE_LIMIT,
) -> NullDraws:
    """Recompute ``|T|`` and ``|r|`` under relabelled outcomes.

    Two-class labels are permuted; survival ``(time, event)`` pairs move
    together. When the outcome admits at most ``exhaustive_limit`` distinct
    rearrangements all of them are used and ``B`` is ignored. Otherwise ``B``
    uniform permutations are drawn (with replacement from the permutation
    group), permutation ``b`` using a generator seeded by ``(seed, b)``.

    ``assignments`` overrides the draws with explicit outcome rearrangements
    given as index permutations of the samples, shape (B, n).
    """
    if B < 1:
        raise ValueError("B must be at least 1")
    X = handle.matrix.values
    if neighbors is None:
        neighbors = CorrelationNeighbors.from_matrix(X, opts, workers=workers)
    outcome = handle.outcome
    if assignments is not None:
        perms = np.atleast_2d(np.asarray(assignments, dtype=int))
        outcomes = [outcome.permuted(p) for p in perms]
        exhaustive = False
    else:
        codes, table, exhaustive = _assignments(outcome, B, seed, exhaustive_limit)
        perms = codes
        outcomes = [_outcome_from_codes(outcome, c, table) for c in codes]

    def one(out):
        T = score_values(X, out, raw_eq2=raw_eq2)
        aT = _abs_null_scores(T)
        T = np.where(np.isnan(T), 0.0, T)
        return aT, np.abs(shared_values(neighbors, T))

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, outcomes))
    else:
        results = [one(o) for o in outcomes]
    abs_T = np.array([a for a, _ in results])
    abs_r = np.array([b for _, b in results])
    return NullDraws(abs_T, abs_r, np.asarray(perms), exhaustive)


def default_cutoffs(stat, max_points: int = MAX_CUTOFFS) -> np.ndarray:
    """Distinct observed ``|stat|`` values, descending, thinned to ``max_points``."""
    vals = np.unique(np.abs(np.asarray(stat, dtype=float)))[::-1]
    if len(vals) > max_points:
        keep = np.unique(np.round(np.linspace(0, len(vals) - 1, max_points)).astype(int))
        vals = vals[keep]
    return vals


def _count_above(sorted_abs, cutoffs):
    return len(sorted_abs) - np.searchsorted(sorted_abs, cutoffs, side="right")


def fdr_curve(observed, null, cutoffs=None, estimator: str = "mean") -> FdrCurve:
    """Plug-in permutation FDR over a grid of cutoffs.

    A feature is called at cutoff ``c`` when ``|stat| > c``. The false
    positive estimate is the mean (or median) over permutations of the null
    exceedance count.
    """
    obs = np.sort(np.abs(np.asarray(observed, dtype=float)))
    null = np.atleast_2d(np.abs(np.asarray(null, dtype=float)))
    cutoffs = default_cutoffs(obs) if cutoffs is None else np.asarray(cutoffs, dtype=float)
    n_called = _count_above(obs, cutoffs)
    per_perm = np.array([_count_above(np.sort(row), cutoffs) for row in null])
    if estimator == "mean":
        est_fp = per_perm.mean(axis=0)
    elif estimator == "median":
        est_fp = np.median(per_perm, axis=0)
    else:
        raise ValueError(f"unknown estimator {estimator!r}")
    fdr = np.clip(est_fp / np.maximum(n_called, 1), 0.0, 1.0)
    return FdrCurve(cutoffs, n_called, est_fp, fdr)


def truth_curve(observed, truth, cutoffs=None) -> TruthCurve:
    """False positive / negative counts against a known non-null set."""
    a = np.abs(np.asarray(observed, dtype=float))
    is_true = np.zeros(len(a), dtype=bool)
    is_true[np.asarray(list(truth), dtype=int)] = True
    cutoffs = default_cutoffs(a) if cutoffs is None else np.asarray(cutoffs, dtype=float)
    n_called = _count_above(np.sort(a), cutoffs)
    true_called = _count_above(np.sort(a[is_true]), cutoffs)
    fp = n_called - true_called
    fn = int(is_true.sum()) - true_called
    return TruthCurve(cutoffs, n_called, fp, fn)


def calls_at_count(stat, k: int) -> np.ndarray:
    """Boolean mask of features called at the cutoff that yields ``k`` calls.

    The cutoff is the ``(k+1)``-th largest ``|stat|``; ties at the cutoff can
    make the call set smaller than ``k``.
    """
    a = np.abs(np.asarray(stat, dtype=float))
    if not 0 <= k <= len(a):
        raise ValueError(f"k must be in [0, {len(a)}]")
    if k == len(a):
        return np.ones(len(a), dtype=bool)
    c = np.sort(a)[::-1][k]
    return a > c


def false_positives_at(stat, truth, k: int) -> int:
    called = calls_at_count(stat, k)
    called[np.asarray(list(truth), dtype=int)] = False
    return int(called.sum())


def agreement_curve(train_stat, test_stat, cutoffs=None) -> AgreementCurve:
    """Disagreement between calls on two independent halves at each cutoff."""
    a = np.abs(np.asarray(train_stat, dtype=float))
    b = np.abs(np.asarray(test_stat, dtype=float))
    cutoffs = default_cutoffs(a) if cutoffs is None else np.asarray(cutoffs, dtype=float)
    A = a[None, :] > cutoffs[:, None]
    Bc = b[None, :] > cutoffs[:, None]
    return AgreementCurve(
        cutoffs,
        A.sum(axis=1),
        (A & ~Bc).sum(axis=1),
        (~A & Bc).sum(axis=1),
    )


def _split_ok(outcome, idx):
    try:
        outcome.subset(idx)
    except ValidationError:
        return False
    return True


def train_test_validate(
    handle: DatasetHandle,
    opts: ShareOptions = ShareOptions(),
    split_fraction: float = 0.5,
    seed: int = 0,
    raw_eq2: bool = False,
    max_retries: int = 100,
    split=None,
    workers: int = 1,
):
    """Random train/test split; statistics computed separately on each half.

    Returns ``({"t": AgreementCurve, "r": AgreementCurve}, info)`` where
    ``info`` records the split and any features dropped because they were
    degenerate in one of the halves. ``split`` may pass explicit
    ``(train_idx, test_idx)`` sample indices.
    """
    n = handle.matrix.n_samples
    outcome = handle.outcome
    if split is None:
        rng = np.random.default_rng(seed)
        n_train = int(round(n * split_fraction))
        for _ in range(max_retries):
            perm = rng.permutation(n)
            train, test = np.sort(perm[:n_train]), np.sort(perm[n_train:])
            if _split_ok(outcome, train) and _split_ok(outcome, test):
                break
        else:
            raise ValidationError(
                f"no valid split after {max_retries} tries: each half needs at least "
                "2 samples per group (two-class) or 1 event (survival)"
            )
    else:
        train, test = (np.asarray(s, dtype=int) for s in split)
        if not (_split_ok(outcome, train) and _split_ok(outcome, test)):
            raise ValidationError("given split leaves a half with too few samples per group")

    halves = []
    for idx in (train, test):
        halves.append(validate_dataset(handle.matrix.subset_samples(idx), outcome.subset(idx)))
    common = set(halves[0].matrix.feature_ids) & set(halves[1].matrix.feature_ids)
    keep = [i for i, f in enumerate(handle.matrix.feature_ids) if f in common]
    stats = []
    for idx in (train, test):
        sub = DatasetHandle(handle.matrix.subset_samples(idx).subset_features(keep), outcome.subset(idx))
        nb = CorrelationNeighbors.from_matrix(sub.matrix.values, opts, workers=workers)
        T = score_values(sub.matrix.values, sub.outcome, raw_eq2=raw_eq2)
        T = np.where(np.isnan(T), 0.0, T)
        stats.append((T, shared_values(nb, T, workers=workers)))
    (T_tr, r_tr), (T_te, r_te) = stats
    curves = {"t": agreement_curve(T_tr, T_te), "r": agreement_curve(r_tr, r_te)}
    dropped = [f for f in handle.matrix.feature_ids if f not in common]
    info = {"train": train.tolist(), "test": test.tolist(), "dropped": dropped}
    return curves, info
