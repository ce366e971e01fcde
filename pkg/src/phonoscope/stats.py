"""Self-contained statistical kernel.

Rank statistics, effect sizes, Holm correction, percentile bootstrap, OLS
residualization and closed-form ridge regression. Statistics handle missing
values by pairwise deletion and report the post-deletion n. Special
functions come from ``scipy.special``; no statistics library is used.

All p-values are two-sided.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from math import comb, sqrt
from typing import Callable, Sequence

import numpy as np
from scipy import special

from .errors import (
    ConstantInput,
    DegeneratePooledSD,
    EmptyGroup,
    InsufficientData,
    SingularSystem,
    StatisticUndefinedOnResample,
    TooFewGroups,
    TooFewPairs,
    ZeroVector,
)

EXACT_MW_LIMIT = 12  # total sample size up to which the exact branch is used


@dataclass(frozen=True)
class TestResult:
    statistic: float
    p_value: float
    n: int
    extras: dict[str, float] = field(default_factory=dict)


@dataclass(frozen=True)
class ConfidenceInterval:
    lower: float
    upper: float
    level: float
    n_resamples: int
    seed: int


def _clean(values: Sequence) -> np.ndarray:
    a = np.asarray([np.nan if v is None else v for v in values], dtype=float)
    return a[np.isfinite(a)]


def _clean_pairs(x: Sequence, y: Sequence) -> tuple[np.ndarray, np.ndarray]:
    if len(x) != len(y):
        raise ValueError(f"length mismatch: {len(x)} vs {len(y)}")
    ax = np.asarray([np.nan if v is None else v for v in x], dtype=float)
    ay = np.asarray([np.nan if v is None else v for v in y], dtype=float)
    keep = np.isfinite(ax) & np.isfinite(ay)
    return ax[keep], ay[keep]


def rankdata(values: Sequence) -> np.ndarray:
    """Ranks starting at 1, ties receiving the average rank."""
    a = np.asarray(values, dtype=float)
    order = np.argsort(a, kind="mergesort")
    ranks = np.empty(len(a), dtype=float)
    sa = a[order]
    i, n = 0, len(a)
    while i < n:
        j = i
        while j + 1 < n and sa[j + 1] == sa[i]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def _tie_term(pooled: np.ndarray) -> float:
    """Sum of t^3 - t over tie groups."""
    _, counts = np.unique(pooled, return_counts=True)
    t = counts.astype(float)
    return float(np.sum(t**3 - t))


def spearman(x: Sequence, y: Sequence) -> TestResult:
    """Spearman rank correlation with a t-approximation p-value.

    Ranks use tie averaging; rho is the Pearson correlation of the ranks.
    For n < 10 the approximation is coarse; the result is flagged in extras.
    """
    ax, ay = _clean_pairs(x, y)
    n = len(ax)
    if n < 3:
        raise TooFewPairs(f"need >= 3 complete pairs, got {n}")
    if np.all(ax == ax[0]) or np.all(ay == ay[0]):
        raise ConstantInput("spearman undefined for constant input")
    rx, ry = rankdata(ax), rankdata(ay)
    rx -= rx.mean()
    ry -= ry.mean()
    denom = sqrt(float(rx @ rx) * float(ry @ ry))
    if denom == 0.0:
        raise ConstantInput("spearman undefined: zero rank variance")
    rho = float(rx @ ry) / denom
    rho = max(-1.0, min(1.0, rho))
    extras: dict[str, float] = {}
    if n < 10:
        extras["small_n_approx"] = 1.0
    if abs(rho) >= 1.0:
        return TestResult(rho, 0.0, n, extras)
    t = rho * sqrt((n - 2) / (1.0 - rho * rho))
    extras["t"] = t
    p = 2.0 * float(special.stdtr(n - 2, -abs(t)))
    return TestResult(rho, min(1.0, p), n, extras)


def kruskal_wallis(groups: Sequence[Sequence]) -> TestResult:
    """Kruskal-Wallis H with tie correction and epsilon-squared effect size.

    epsilon-squared = (H - k + 1) / (N - k), clamped below at zero in the
    extras (the raw value is also reported). If every value is identical the
    test degenerates to H = 0, p = 1.
    """
    cleaned = [_clean(g) for g in groups]
    if len(cleaned) < 2:
        raise TooFewGroups(f"need >= 2 groups, got {len(cleaned)}")
    for i, g in enumerate(cleaned):
        if len(g) == 0:
            raise EmptyGroup(f"group {i} is empty after missing-value deletion")
    k = len(cleaned)
    sizes = [len(g) for g in cleaned]
    pooled = np.concatenate(cleaned)
    n_total = len(pooled)
    if n_total < k + 1:
        raise TooFewGroups(f"need N >= k+1, got N={n_total}, k={k}")

    ranks = rankdata(pooled)
    h = 0.0
    offset = 0
    for size in sizes:
        r = ranks[offset : offset + size].sum()
        h += r * r / size
        offset += size
    h = 12.0 / (n_total * (n_total + 1)) * h - 3.0 * (n_total + 1)
    correction = 1.0 - _tie_term(pooled) / (n_total**3 - n_total)
    if correction <= 0.0:
        h, p = 0.0, 1.0
    else:
        h /= correction
        h = max(0.0, h)
        p = float(special.chdtrc(k - 1, h))
    h = float(h)
    eps_raw = float((h - k + 1) / (n_total - k))
    extras = {
        "epsilon_squared": max(0.0, eps_raw),
        "epsilon_squared_raw": eps_raw,
        "df": float(k - 1),
    }
    return TestResult(h, p, n_total, extras)


def epsilon_squared(h: float, k: int, n: int) -> float:
    """Kruskal-Wallis effect size from an (H, k, N) triple, clamped at 0."""
    return max(0.0, (h - k + 1) / (n - k))


def cohens_d(a: Sequence, b: Sequence) -> float:
    """Cohen's d with pooled (n-1)-weighted standard deviation."""
    xa, xb = _clean(a), _clean(b)
    if len(xa) < 2 or len(xb) < 2:
        raise InsufficientData("cohens_d needs >= 2 values per group")
    na, nb = len(xa), len(xb)
    pooled_var = ((na - 1) * xa.var(ddof=1) + (nb - 1) * xb.var(ddof=1)) / (na + nb - 2)
    sp = sqrt(pooled_var)
    if sp < 1e-12:
        raise DegeneratePooledSD("pooled standard deviation is ~0")
    return float((xa.mean() - xb.mean()) / sp)


def _mw_u(pooled_ranks: np.ndarray, n_a: int) -> float:
    return float(pooled_ranks[:n_a].sum() - n_a * (n_a + 1) / 2.0)


def mann_whitney(a: Sequence, b: Sequence) -> TestResult:
    """Mann-Whitney U for group a, two-sided.

    Exact permutation p-value when n_a + n_b <= 12, otherwise the normal
    approximation with tie and continuity correction. The rank-biserial
    effect size 1 - 2U/(n_a n_b) is in extras; it is +1 when every a value
    lies below every b value.
    """
    xa, xb = _clean(a), _clean(b)
    n_a, n_b = len(xa), len(xb)
    if n_a < 1 or n_b < 1:
        raise EmptyGroup("mann_whitney needs >= 1 value per group")
    pooled = np.concatenate([xa, xb])
    n_total = n_a + n_b
    ranks = rankdata(pooled)
    u = _mw_u(ranks, n_a)
    mu = n_a * n_b / 2.0
    extras = {"rank_biserial": 1.0 - 2.0 * u / (n_a * n_b)}

    if n_total <= EXACT_MW_LIMIT:
        extras["exact"] = 1.0
        observed_dev = abs(u - mu)
        hits = 0
        indices = range(n_total)
        for subset in combinations(indices, n_a):
            u_i = float(ranks[list(subset)].sum() - n_a * (n_a + 1) / 2.0)
            if abs(u_i - mu) >= observed_dev - 1e-9:
                hits += 1
        p = hits / comb(n_total, n_a)
        return TestResult(u, p, n_total, extras)

    extras["exact"] = 0.0
    var = (n_a * n_b / 12.0) * (
        (n_total + 1) - _tie_term(pooled) / (n_total * (n_total - 1))
    )
    if var <= 0.0:
        return TestResult(u, 1.0, n_total, extras)
    z = max(0.0, abs(u - mu) - 0.5) / sqrt(var)
    p = min(1.0, 2.0 * float(special.ndtr(-z)))
    return TestResult(u, p, n_total, extras)


def holm_adjust(p_values: Sequence[float]) -> list[float]:
    """Holm step-down adjusted p-values, returned in the input order."""
    ps = list(p_values)
    for p in ps:
        if not (0.0 <= p <= 1.0):
            raise ValueError(f"p-value {p} outside [0, 1]")
    m = len(ps)
    if m == 0:
        return []
    order = sorted(range(m), key=lambda i: ps[i])
    adjusted = [0.0] * m
    running = 0.0
    for rank, idx in enumerate(order):
        running = max(running, min(1.0, (m - rank) * ps[idx]))
        adjusted[idx] = running
    return adjusted


def bootstrap_ci(
    data: Sequence,
    statistic: Callable,
    *,
    n_resamples: int = 1000,
    level: float = 0.95,
    seed: int,
    strata: Sequence | None = None,
    max_retries: int = 10,
) -> ConfidenceInterval:
    """Percentile bootstrap confidence interval for statistic(data).

    With strata, resampling happens within each stratum with replacement,
    preserving stratum sizes. Each resample draws from an independent RNG
    stream derived from (seed, resample index, retry), so results do not
    depend on execution order. A resample on which the statistic is
    undefined is redrawn up to *max_retries* times.
    """
    if n_resamples < 100:
        raise InsufficientData(f"n_resamples must be >= 100, got {n_resamples}")
    n = len(data)
    if n == 0:
        raise InsufficientData("cannot bootstrap empty data")
    items = list(data)

    stratum_indices: list[np.ndarray]
    if strata is None:
        stratum_indices = [np.arange(n)]
    else:
        if len(strata) != n:
            raise ValueError("strata must align with data")
        labels = np.asarray(strata)
        stratum_indices = [np.flatnonzero(labels == lab) for lab in sorted(set(strata), key=str)]

    values = np.empty(n_resamples)
    for i in range(n_resamples):
        for attempt in range(max_retries + 1):
            rng = np.random.default_rng([seed, i, attempt])
            picks: list[np.ndarray] = []
            for idx in stratum_indices:
                picks.append(idx[rng.integers(0, len(idx), size=len(idx))])
            sample = [items[j] for j in np.concatenate(picks)]
            try:
                v = float(statistic(sample))
            except Exception:
                continue
            if np.isfinite(v):
                values[i] = v
                break
        else:
            raise StatisticUndefinedOnResample(
                f"statistic undefined on resample {i} after {max_retries} retries"
            )
    alpha = (1.0 - level) / 2.0
    lo, hi = np.quantile(values, [alpha, 1.0 - alpha])
    return ConfidenceInterval(float(lo), float(hi), level, n_resamples, seed)


def cosine(u: Sequence[float], v: Sequence[float]) -> float:
    """Cosine similarity of two vectors."""
    au = np.asarray(u, dtype=float)
    av = np.asarray(v, dtype=float)
    if au.shape != av.shape:
        raise ValueError(f"shape mismatch: {au.shape} vs {av.shape}")
    nu, nv = float(np.linalg.norm(au)), float(np.linalg.norm(av))
    if nu == 0.0 or nv == 0.0:
        raise ZeroVector("cosine undefined for zero vectors")
    return float(np.clip(au @ av / (nu * nv), -1.0, 1.0))


def residualize(y: Sequence[float], x: Sequence[float]) -> np.ndarray:
    """Residuals of the OLS fit y = a + b x.

    Falls back to centering when x has zero variance.
    """
    ay = np.asarray(y, dtype=float)
    ax = np.asarray(x, dtype=float)
    if len(ax) != len(ay):
        raise ValueError("x and y must have equal length")
    if len(ax) < 3:
        raise TooFewPairs(f"need >= 3 observations, got {len(ax)}")
    xc = ax - ax.mean()
    sxx = float(xc @ xc)
    if sxx == 0.0:
        return ay - ay.mean()
    slope = float(xc @ (ay - ay.mean())) / sxx
    intercept = float(ay.mean() - slope * ax.mean())
    return ay - (intercept + slope * ax)


def ridge_cv(
    X: np.ndarray,
    y: Sequence[float],
    *,
    k_folds: int = 10,
    lam: float = 1.0,
    seed: int,
) -> tuple[float, float]:
    """K-fold ridge regression; returns pooled out-of-fold (RMSE, Spearman rho).

    Features are standardized per training fold and the intercept is the
    training-fold mean of y (unpenalized). Fold assignment is a seeded
    permutation, so results are reproducible.
    """
    X = np.asarray(X, dtype=float)
    ay = np.asarray(y, dtype=float)
    n, p = X.shape
    if len(ay) != n:
        raise ValueError("X and y must align")
    if k_folds < 2 or k_folds > n:
        raise InsufficientData(f"k_folds must be in [2, {n}], got {k_folds}")
    rng = np.random.default_rng([seed])
    folds = np.array_split(rng.permutation(n), k_folds)

    preds = np.empty(n)
    for test_idx in folds:
        mask = np.ones(n, dtype=bool)
        mask[test_idx] = False
        X_tr, y_tr = X[mask], ay[mask]
        mu = X_tr.mean(axis=0)
        sd = X_tr.std(axis=0, ddof=1)
        sd[sd < 1e-12] = 1.0
        Xs = (X_tr - mu) / sd
        yc = y_tr - y_tr.mean()
        gram = Xs.T @ Xs + lam * np.eye(p)
        if lam == 0.0 and np.linalg.matrix_rank(gram) < p:
            raise SingularSystem("lambda = 0 with rank-deficient design")
        try:
            beta = np.linalg.solve(gram, Xs.T @ yc)
        except np.linalg.LinAlgError as exc:
            raise SingularSystem(str(exc)) from exc
        Xt = (X[test_idx] - mu) / sd
        preds[test_idx] = Xt @ beta + y_tr.mean()

    rmse = float(np.sqrt(np.mean((preds - ay) ** 2)))
    rho = spearman(preds, ay).statistic
    return rmse, rho
