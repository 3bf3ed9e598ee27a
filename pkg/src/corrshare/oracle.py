"""Numerical lab for the one-sample asymptotics of correlation sharing.

Here the per-feature statistic is a plain sample mean and neighbourhood
averages use signed scores; the oracle statistic uses the *true*
correlations to form neighbourhoods.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .sharing import ShareOptions, _sorted_row, correlation_matrix

__all__ = [
    "OracleCurves",
    "KernelMatrix",
    "PowerGain",
    "oracle_stat",
    "cesaro_average",
    "correlation_order",
    "covariance_kernel",
    "noncentrality_curve",
    "power_gain_condition",
    "block_correlation",
    "lemma1_experiment",
]


@dataclass(frozen=True)
class OracleCurves:
    r: np.ndarray
    beta_bar: np.ndarray
    noncentrality: np.ndarray
    r_star: int
    t1_noncentrality: float
    pi_r1: float
    n: int
    rho: float

    @property
    def pi_at_r_star(self) -> float:
        return float(self.noncentrality[self.r_star - 1])


@dataclass(frozen=True)
class KernelMatrix:
    J: np.ndarray
    n: int
    sigma2: float
    order: np.ndarray


class PowerGain(NamedTuple):
    holds: bool
    margin: float
    r_star: int


def oracle_stat(scores, true_corr, i: int, K: Optional[int] = None, delta: float = 0.0):
    """Oracle statistic ``kappa_i`` and its neighbourhood.

    Same prefix search as the data-driven statistic, but ordering features
    by the true correlation with ``i`` and averaging signed scores. The
    threshold ranges over ``rho > 0``, so features uncorrelated with ``i``
    never join and identity correlation gives ``kappa_i = T_i``.
    """
    T = np.asarray(getattr(scores, "values", scores), dtype=float)
    c = np.array(true_corr[i], dtype=float)
    c[c <= max(delta, 0.0)] = -1.0
    c[i] = 1.0
    members, _, valid = _sorted_row(i, c, ShareOptions(K, delta))
    best, best_p = -math.inf, 1
    vals = T[members].tolist()
    for p in np.flatnonzero(valid) + 1:
        mean = math.fsum(vals[:p]) / p
        if mean > best:
            best, best_p = mean, int(p)
    return best, np.sort(members[:best_p])


def cesaro_average(betas) -> np.ndarray:
    """Running mean ``(1/r) * sum_{k<=r} beta_k`` for r = 1..len(betas)."""
    b = np.asarray(betas, dtype=float)
    return np.cumsum(b) / np.arange(1, len(b) + 1)


def correlation_order(true_corr, focal: int = 0) -> np.ndarray:
    """Features by decreasing correlation with ``focal`` (focal first, ties by index)."""
    c = np.asarray(true_corr, dtype=float)[focal]
    others = np.array([j for j in range(len(c)) if j != focal], dtype=int)
    order = others[np.lexsort((others, -c[others]))]
    return np.concatenate(([focal], order))


def covariance_kernel(true_corr, n: int, sigma2: float = 1.0, R: Optional[int] = None, focal: int = 0):
    """Covariance of the neighbourhood-average noise process.

    ``J(r, s) = sigma2 / (n r s) * sum_{j<=r} sum_{k<=s} rho(j, k)`` with
    features taken in decreasing correlation with ``focal``.
    """
    P = np.asarray(true_corr, dtype=float)
    order = correlation_order(P, focal)
    R = len(order) if R is None else R
    order = order[:R]
    S = np.cumsum(np.cumsum(P[np.ix_(order, order)], axis=0), axis=1)
    r = np.arange(1, R + 1)
    J = sigma2 * S / (n * np.outer(r, r))
    # the two cumulative sums round differently across the diagonal
    J = 0.5 * (J + J.T)
    return KernelMatrix(J, n, sigma2, order)


def noncentrality_curve(betas, rho: float, n: int = 1) -> OracleCurves:
    """Noncentrality ``n r beta_bar(r)^2 / (1 + 2 rho)`` over neighbourhood size r.

    ``t1_noncentrality`` is ``n beta_1^2``; ``pi_r1`` is the r = 1
    value of the curve, ``n beta_1^2 / (1 + 2 rho)``. Both are kept because
    they disagree by the factor ``1 + 2 rho``.
    """
    b = np.asarray(betas, dtype=float)
    bb = cesaro_average(b)
    r = np.arange(1, len(b) + 1)
    pi = n * r * bb**2 / (1.0 + 2.0 * rho)
    r_star = int(np.argmax(bb)) + 1
    return OracleCurves(
        r=r,
        beta_bar=bb,
        noncentrality=pi,
        r_star=r_star,
        t1_noncentrality=float(n * b[0] ** 2),
        pi_r1=float(pi[0]),
        n=n,
        rho=rho,
    )


def power_gain_condition(betas, rho: float) -> PowerGain:
    """Whether ``r* beta_bar(r*)^2 / (1 + 2 rho) > beta_1^2`` at ``r* = argmax beta_bar``."""
    b = np.asarray(betas, dtype=float)
    bb = cesaro_average(b)
    r_star = int(np.argmax(bb)) + 1
    lhs = r_star * bb[r_star - 1] ** 2 / (1.0 + 2.0 * rho)
    margin = float(lhs - b[0] ** 2)
    return PowerGain(margin > 0, margin, r_star)


def block_correlation(m: int, block: int, rho: float) -> np.ndarray:
    """Identity except an equicorrelated leading block of size ``block``."""
    P = np.eye(m)
    P[:block, :block] = rho
    np.fill_diagonal(P, 1.0)
    return P


def _structure(rho_structure, m):
    if isinstance(rho_structure, str):
        if rho_structure == "identity":
            return np.eye(m)
        if rho_structure == "block":
            return block_correlation(m, min(m, 20), 0.5)
        raise ValueError(f"unknown correlation structure {rho_structure!r}")
    P = np.asarray(rho_structure, dtype=float)
    if P.shape != (m, m):
        raise ValueError(f"correlation matrix must be {m}x{m}")
    return P


def lemma1_experiment(
    m: int = 200,
    C_values=(5, 20, 80),
    n_reps: int = 50,
    rho_structure="identity",
    seed: int = 0,
    workers: int = 1,
):
    """Median over repetitions of ``max_{i != j} |rho_hat - rho|`` with ``n = ceil(C log m)``.

    Returns one dict per C with keys ``C``, ``n``, ``median_max_error`` and
    ``errors`` (the per-repetition maxima).
    """
    P = _structure(rho_structure, m)
    L = np.linalg.cholesky(P)
    off = ~np.eye(m, dtype=bool)
    table = []
    for ci, C in enumerate(C_values):
        n = int(math.ceil(C * math.log(m)))

        def rep(k, n=n, ci=ci):
            rng = np.random.default_rng([seed, ci, k])
            X = L @ rng.standard_normal((m, n))
            return float(np.abs(correlation_matrix(X) - P)[off].max())

        if workers and workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                errors = list(pool.map(rep, range(n_reps)))
        else:
            errors = [rep(k) for k in range(n_reps)]
        table.append(
            {"C": C, "n": n, "median_max_error": float(np.median(errors)), "errors": errors}
        )
    return table
