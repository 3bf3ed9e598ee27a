"""Loading, validation and pre-filtering of feature-by-sample matrices.

Matrices are stored features-as-rows (m x n). The canonical on-disk format is
a UTF-8 TSV whose first row is ``feature_id<TAB>sample ids...`` followed by
one row per feature.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

import numpy as np

from .exceptions import ParseError, ValidationError

__all__ = [
    "ExpressionMatrix",
    "TwoClass",
    "Survival",
    "Outcome",
    "DatasetHandle",
    "load_expression_matrix",
    "load_outcome",
    "write_expression_matrix",
    "write_outcome",
    "filter_top_variance",
    "validate_dataset",
]


@dataclass(frozen=True)
class ExpressionMatrix:
    feature_ids: list
    sample_ids: list
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2:
            raise ValidationError("values must be a 2-d array (features x samples)")
        m, n = values.shape
        if m < 1:
            raise ValidationError("no feature rows")
        if n < 2:
            raise ValidationError(f"need at least 2 samples, got {n}")
        if len(self.feature_ids) != m or len(self.sample_ids) != n:
            raise ValidationError(
                f"id lengths ({len(self.feature_ids)}, {len(self.sample_ids)}) "
                f"do not match values shape {values.shape}"
            )
        if not np.all(np.isfinite(values)):
            bad = np.argwhere(~np.isfinite(values))[0]
            raise ValidationError(
                f"non-finite value for feature {self.feature_ids[bad[0]]!r}, "
                f"sample {self.sample_ids[bad[1]]!r}"
            )
        _check_unique(self.feature_ids, "feature")
        _check_unique(self.sample_ids, "sample")
        values.setflags(write=False)
        object.__setattr__(self, "feature_ids", list(self.feature_ids))
        object.__setattr__(self, "sample_ids", list(self.sample_ids))
        object.__setattr__(self, "values", values)

    @property
    def shape(self):
        return self.values.shape

    @property
    def n_features(self) -> int:
        return self.values.shape[0]

    @property
    def n_samples(self) -> int:
        return self.values.shape[1]

    def subset_features(self, idx) -> "ExpressionMatrix":
        idx = np.asarray(idx, dtype=int)
        return ExpressionMatrix(
            [self.feature_ids[i] for i in idx], self.sample_ids, self.values[idx]
        )

    def subset_samples(self, idx) -> "ExpressionMatrix":
        idx = np.asarray(idx, dtype=int)
        return ExpressionMatrix(
            self.feature_ids, [self.sample_ids[j] for j in idx], self.values[:, idx]
        )


@dataclass(frozen=True)
class TwoClass:
    """Two-group labels, each entry 1 or 2."""

    labels: np.ndarray

    def __post_init__(self):
        labels = np.asarray(self.labels)
        if labels.ndim != 1:
            raise ValidationError("labels must be 1-d")
        if not np.all(np.isin(labels, (1, 2))):
            bad = labels[~np.isin(labels, (1, 2))][0]
            raise ValidationError(f"label {bad!r} outside {{1, 2}}")
        labels = labels.astype(int)
        for g in (1, 2):
            k = int(np.sum(labels == g))
            if k == 0:
                raise ValidationError(f"group {g} empty")
            if k < 2:
                raise ValidationError(f"group {g} has {k} sample; need at least 2")
        labels.setflags(write=False)
        object.__setattr__(self, "labels", labels)

    def __len__(self):
        return len(self.labels)

    def permuted(self, perm) -> "TwoClass":
        return TwoClass(self.labels[perm])

    def subset(self, idx) -> "TwoClass":
        return TwoClass(self.labels[np.asarray(idx, dtype=int)])


@dataclass(frozen=True)
class Survival:
    """Right-censored survival outcome: positive times and 0/1 event flags."""

    time: np.ndarray
    event: np.ndarray

    def __post_init__(self):
        time = np.asarray(self.time, dtype=float)
        event = np.asarray(self.event)
        if time.ndim != 1 or event.shape != time.shape:
            raise ValidationError("time and event must be 1-d arrays of equal length")
        if not np.all(np.isfinite(time)) or np.any(time <= 0):
            raise ValidationError("survival times must be positive and finite")
        if not np.all(np.isin(event, (0, 1))):
            raise ValidationError("event indicators must be 0 or 1")
        event = event.astype(int)
        if event.sum() < 1:
            raise ValidationError("survival outcome has no events")
        time.setflags(write=False)
        event.setflags(write=False)
        object.__setattr__(self, "time", time)
        object.__setattr__(self, "event", event)

    def __len__(self):
        return len(self.time)

    def permuted(self, perm) -> "Survival":
        return Survival(self.time[perm], self.event[perm])

    def subset(self, idx) -> "Survival":
        idx = np.asarray(idx, dtype=int)
        return Survival(self.time[idx], self.event[idx])


Outcome = Union[TwoClass, Survival]


@dataclass(frozen=True)
class DatasetHandle:
    matrix: ExpressionMatrix
    outcome: Outcome
    dropped_features: list = field(default_factory=list)

    def with_outcome(self, outcome) -> "DatasetHandle":
        return DatasetHandle(self.matrix, outcome, self.dropped_features)


def _check_unique(ids, what):
    seen = set()
    for x in ids:
        if x in seen:
            raise ValidationError(f"duplicate {what} id {x!r}")
        seen.add(x)


def load_expression_matrix(path) -> ExpressionMatrix:
    """Parse a features-as-rows TSV into an :class:`ExpressionMatrix`."""
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    lines = [ln for ln in lines if ln.strip() != ""]
    if not lines:
        raise ParseError(f"{path}: empty file")
    header = lines[0].split("\t")
    sample_ids = header[1:]
    width = len(header)
    if len(lines) == 1:
        raise ParseError(f"{path}: no feature rows")
    feature_ids = []
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        cells = line.split("\t")
        if len(cells) != width:
            raise ParseError(
                f"{path}: line {lineno} has {len(cells)} fields, expected {width}"
            )
        feature_ids.append(cells[0])
        row = []
        for col, cell in enumerate(cells[1:], start=2):
            try:
                row.append(float(cell))
            except ValueError:
                raise ParseError(
                    f"{path}: non-numeric cell {cell!r} at line {lineno}, column {col}"
                ) from None
        rows.append(row)
    return ExpressionMatrix(feature_ids, sample_ids, np.array(rows, dtype=float))


def write_expression_matrix(matrix: ExpressionMatrix, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\t".join(["feature_id", *matrix.sample_ids]) + "\n")
        for fid, row in zip(matrix.feature_ids, matrix.values):
            fh.write("\t".join([fid, *(repr(float(v)) for v in row)]) + "\n")


def load_outcome(path, kind: str = "twoclass") -> Outcome:
    """Read one record per sample: ``label`` or ``time<TAB>event``.

    An optional first line ``label`` / ``time<TAB>event`` is skipped.
    """
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        lines = [ln for ln in fh.read().splitlines() if ln.strip() != ""]
    if lines and lines[0].strip().split("\t") in (["label"], ["time", "event"]):
        lines = lines[1:]
    if kind == "twoclass":
        labels = []
        for lineno, line in enumerate(lines, start=1):
            cell = line.strip()
            try:
                labels.append(int(cell))
            except ValueError:
                raise ParseError(f"{path}: line {lineno}: bad label {cell!r}") from None
        return TwoClass(np.array(labels, dtype=int))
    if kind == "survival":
        times, events = [], []
        for lineno, line in enumerate(lines, start=1):
            cells = line.split("\t")
            if len(cells) != 2:
                raise ParseError(f"{path}: line {lineno}: expected 'time<TAB>event'")
            try:
                times.append(float(cells[0]))
                events.append(int(cells[1]))
            except ValueError:
                raise ParseError(f"{path}: line {lineno}: unparseable record {line!r}") from None
        return Survival(np.array(times), np.array(events))
    raise ValueError(f"unknown outcome kind {kind!r}")


def write_outcome(outcome: Outcome, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        if isinstance(outcome, TwoClass):
            fh.write("label\n")
            for v in outcome.labels:
                fh.write(f"{int(v)}\n")
        else:
            fh.write("time\tevent\n")
            for t, e in zip(outcome.time, outcome.event):
                fh.write(f"{float(t)!r}\t{int(e)}\n")


def filter_top_variance(matrix: ExpressionMatrix, k: int) -> ExpressionMatrix:
    """Keep the ``k`` features with the largest overall sample variance.

    Survivors keep their original relative order; ties at the cut go to the
    lower feature index.
    """
    m = matrix.n_features
    if not 1 <= k <= m:
        raise ValueError(f"k must be in [1, {m}], got {k}")
    var = matrix.values.var(axis=1, ddof=1)
    # stable sort on -var: equal variances keep index order
    keep = np.sort(np.argsort(-var, kind="stable")[:k])
    return matrix.subset_features(keep)


def validate_dataset(matrix: ExpressionMatrix, outcome: Outcome) -> DatasetHandle:
    """Check dimensions and drop features whose score would be undefined."""
    if len(outcome) != matrix.n_samples:
        raise ValidationError(
            f"outcome has {len(outcome)} records but matrix has {matrix.n_samples} samples"
        )
    X = matrix.values
    dropped = []
    keep = np.ones(matrix.n_features, dtype=bool)
    # exact constancy checks; float variances of constant rows need not be 0
    constant = np.ptp(X, axis=1) == 0
    if isinstance(outcome, TwoClass):
        within_constant = np.ones(matrix.n_features, dtype=bool)
        for g in (1, 2):
            within_constant &= np.ptp(X[:, outcome.labels == g], axis=1) == 0
    else:
        within_constant = constant
    for i in range(matrix.n_features):
        if constant[i]:
            keep[i] = False
            dropped.append((matrix.feature_ids[i], "zero variance"))
        elif within_constant[i]:
            keep[i] = False
            dropped.append((matrix.feature_ids[i], "zero pooled variance"))
    if not keep.any():
        raise ValidationError("all features dropped: no feature has positive variance")
    if keep.all():
        return DatasetHandle(matrix, outcome, [])
    return DatasetHandle(matrix.subset_features(np.flatnonzero(keep)), outcome, dropped)
