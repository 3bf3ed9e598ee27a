"""Synthetic two-class datasets with a known set of shifted features."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ingest import ExpressionMatrix, TwoClass

__all__ = [
    "SimSpec",
    "SimData",
    "EXAMPLE1",
    "EXAMPLE2",
    "gen_custom",
    "gen_example1",
    "gen_example2",
    "gen_oracle_means",
]


@dataclass(frozen=True)
class SimSpec:
    """Generator parameters.

    Features ``0 .. n_nonnull-1`` get equicorrelated unit-variance noise
    (pairwise correlation ``rho``) plus ``shift`` on samples
    ``group2_start .. n-1``; the remaining features are independent N(0, 1).
    """

    m: int = 1000
    n: int = 30
    n_nonnull: int = 50
    shift: float = 0.75
    rho: float = 0.8
    group2_start: int = 15
    seed: int = 0

    def __post_init__(self):
        if not 0 <= self.n_nonnull <= self.m:
            raise ValueError("n_nonnull must be between 0 and m")
        if not 0.0 <= self.rho < 1.0:
            raise ValueError("rho must be in [0, 1)")
        if not 2 <= self.group2_start <= self.n - 2:
            raise ValueError("each group needs at least 2 samples")


@dataclass(frozen=True)
class SimData:
    matrix: ExpressionMatrix
    outcome: TwoClass
    truth: np.ndarray


EXAMPLE1 = SimSpec()
EXAMPLE2 = SimSpec(rho=0.0)


def gen_custom(spec: SimSpec) -> SimData:
    rng = np.random.default_rng(spec.seed)
    m, n, k = spec.m, spec.n, spec.n_nonnull
    factor = rng.standard_normal(n)
    own = rng.standard_normal((k, n))
    nonnull = np.sqrt(spec.rho) * factor + np.sqrt(1.0 - spec.rho) * own
    nonnull[:, spec.group2_start :] += spec.shift
    null = rng.standard_normal((m - k, n))
    values = np.vstack([nonnull, null])
    width = len(str(m))
    feature_ids = [f"f{i + 1:0{width}d}" for i in range(m)]
    sample_ids = [f"s{j + 1:0{len(str(n))}d}" for j in range(n)]
    labels = np.where(np.arange(n) >= spec.group2_start, 2, 1)
    return SimData(
        ExpressionMatrix(feature_ids, sample_ids, values), TwoClass(labels), np.arange(k)
    )


def gen_example1(seed: int = 0) -> SimData:
    """1000 features x 30 samples; first 50 shifted by 0.75 in samples 16-30,
    with pairwise noise correlation 0.8 among them."""
    return gen_custom(SimSpec(seed=seed))


def gen_example2(seed: int = 0) -> SimData:
    """As :func:`gen_example1` but the shifted features have independent noise."""
    return gen_custom(SimSpec(rho=0.0, seed=seed))


def gen_oracle_means(case: str, m_nonnull: int, seed: int = 0) -> np.ndarray:
    """Effect sizes for the noncentrality illustrations.

    ``"least_favorable"``: 10 followed by ones. ``"random_effects"``: iid
    normal with mean 3 and standard deviation 1.
    """
    if m_nonnull < 1:
        raise ValueError("m_nonnull must be positive")
    case = case.lower().replace("-", "_")
    if case in ("least_favorable", "leastfavorable"):
        beta = np.ones(m_nonnull)
        beta[0] = 10.0
        return beta
    if case in ("random_effects", "randomeffects"):
        return np.random.default_rng(seed).normal(3.0, 1.0, m_nonnull)
    raise ValueError(f"unknown case {case!r}")
