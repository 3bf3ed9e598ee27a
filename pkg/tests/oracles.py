"""Slow, independent reference implementations used only by the tests."""

import itertools
import math

import numpy as np


def pearson(x, y):
    x = [float(v) for v in x]
    y = [float(v) for v in y]
    n = len(x)
    mx = math.fsum(x) / n
    my = math.fsum(y) / n
    sxy = math.fsum((a - mx) * (b - my) for a, b in zip(x, y))
    sxx = math.fsum((a - mx) ** 2 for a in x)
    syy = math.fsum((b - my) ** 2 for b in y)
    return sxy / math.sqrt(sxx * syy)


def tstat(x, labels, se_factor=True):
    g1 = [float(v) for v, g in zip(x, labels) if g == 1]
    g2 = [float(v) for v, g in zip(x, labels) if g == 2]
    n1, n2 = len(g1), len(g2)
    m1, m2 = math.fsum(g1) / n1, math.fsum(g2) / n2
    ss = math.fsum((v - m1) ** 2 for v in g1) + math.fsum((v - m2) ** 2 for v in g2)
    s = math.sqrt(ss / (n1 + n2 - 2))
    if se_factor:
        s *= math.sqrt(1 / n1 + 1 / n2)
    return (m2 - m1) / s


def cox_score(x, time, event):
    """Score test at beta = 0 by explicit loops over event times (Breslow)."""
    U = 0.0
    info = 0.0
    for t in sorted({t for t, e in zip(time, event) if e == 1}):
        risk = [v for v, tt in zip(x, time) if tt >= t]
        mean = sum(risk) / len(risk)
        var = sum((v - mean) ** 2 for v in risk) / len(risk)
        for v, tt, e in zip(x, time, event):
            if tt == t and e == 1:
                U += v - mean
                info += var
    return U / math.sqrt(info) if info > 0 else float("nan")


def brute_force_shared(C, T, K=None, delta=0.0, signed=False):
    """Scan rho over every observed correlation plus {0, 1}.

    For each candidate level set ``{j : C[i, j] >= rho}`` (respecting the floor
    and size cap) take the exact mean of ``|T|`` (or ``T`` if signed); keep the
    largest, preferring the smaller set on ties. The singleton ``{i}`` is
    always a candidate (rho = 1 means no sharing), even when another feature
    has correlation exactly 1 with ``i``.
    Returns lists ``u``, ``members``, ``rho_hat``.
    """
    C = np.asarray(C, dtype=float)
    T = [float(v) for v in T]
    vals = T if signed else [abs(v) for v in T]
    m = len(T)
    grid = np.array(sorted(set(C.ravel().tolist()) | {0.0, 1.0}))
    if delta > 0:
        grid = grid[grid > delta]
    else:
        grid = grid[grid >= 0.0]
    us, mems, rhos = [], [], []
    for i in range(m):
        level = C[i][None, :] >= grid[:, None]
        level[:, i] = True
        single = np.zeros((1, m), dtype=bool)
        single[0, i] = True
        # distinct candidate sets; many grid points give the same level set
        candidates = np.unique(np.vstack([single, level]), axis=0)
        best = None
        for mask in candidates:
            members = np.flatnonzero(mask).tolist()
            if K is not None and len(members) > K:
                continue
            mean = math.fsum(vals[j] for j in members) / len(members)
            key = (mean, -len(members))
            if best is None or key > best[0]:
                best = (key, members)
        (mean, _), members = best
        us.append(mean)
        mems.append(members)
        rhos.append(min(C[i, j] if j != i else 1.0 for j in members))
    return us, mems, rhos


def label_assignments(labels):
    """Every distinct rearrangement of a two-class label vector."""
    n = len(labels)
    n2 = sum(1 for g in labels if g == 2)
    out = []
    for pos in itertools.combinations(range(n), n2):
        lab = [1] * n
        for p in pos:
            lab[p] = 2
        out.append(lab)
    return out
