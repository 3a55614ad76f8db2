"""Wealth and market statistics: returns, moments, Sharpe, correlations.

Conventions, fixed once and used everywhere:

  * volatility = sample standard deviation (n-1) of per-step log returns,
    no annualisation;
  * skewness and kurtosis are standardised central moments (population
    normalisation), kurtosis reported as excess (normal = 0);
  * Sharpe = mean / sample std of log returns, zero risk-free rate;
  * statistics that are undefined for the input (too few points, zero
    variance, non-positive levels) come back as None rather than raising.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass
class Moments:
    n: int
    mean: float | None
    std: float | None
    skew: float | None
    kurtosis: float | None   # excess
    sharpe: float | None


def log_returns(series) -> np.ndarray | None:
    """Per-step log returns of a level series; None if any level <= 0."""
    x = np.asarray(series, dtype=np.float64)
    if x.size < 2 or np.any(x <= 0.0):
        return None
    return np.diff(np.log(x))


def total_return(series) -> float | None:
    """last/first - 1; None when an endpoint is non-positive."""
    if len(series) < 1:
        return None
    first = float(series[0])
    last = float(series[-1])
    if first <= 0.0 or last <= 0.0:
        return None
    return last / first - 1.0


def moments(returns) -> Moments:
    x = np.asarray(returns, dtype=np.float64)
    n = int(x.size)
    if n < 2:
        return Moments(n, float(x.mean()) if n else None, None, None, None, None)
    mean = float(x.mean())
    d = x - mean
    m2 = float(np.mean(d * d))
    std = float(math.sqrt(float(np.sum(d * d)) / (n - 1)))
    skew = None
    kurt = None
    if m2 > 0.0:
        if n >= 3:
            skew = float(np.mean(d ** 3)) / m2 ** 1.5
        if n >= 4:
            kurt = float(np.mean(d ** 4)) / (m2 * m2) - 3.0
    sharpe = mean / std if std > 0.0 else None
    return Moments(n, mean, std, skew, kurt, sharpe)


def correlation(x, y) -> float | None:
    """Pearson correlation; None for length mismatch or zero variance."""
    a = np.asarray(x, dtype=np.float64)
    b = np.asarray(y, dtype=np.float64)
    if a.size != b.size or a.size < 2:
        return None
    da = a - a.mean()
    db = b - b.mean()
    va = float(np.sum(da * da))
    vb = float(np.sum(db * db))
    if va <= 0.0 or vb <= 0.0:
        return None
    return float(np.sum(da * db)) / math.sqrt(va * vb)


def _ranks(values: np.ndarray) -> np.ndarray:
    # average ranks for ties
    order = np.argsort(values, kind="stable")
    ranks = np.empty(values.size, dtype=np.float64)
    i = 0
    while i < values.size:
        j = i
        while j + 1 < values.size and values[order[j + 1]] == values[order[i]]:
            j += 1
        ranks[order[i:j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def spearman(x, y) -> float | None:
    """Rank correlation with average ranks for ties."""
    a = np.asarray(x, dtype=np.float64)
    b = np.asarray(y, dtype=np.float64)
    if a.size != b.size or a.size < 2:
        return None
    return correlation(_ranks(a), _ranks(b))
