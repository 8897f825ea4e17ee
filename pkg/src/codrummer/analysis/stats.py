"""Matched-pair t-test, first principal component, exact binomial tail."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.stats import t as t_dist

from ..errors import DataError

POWER_ITERATION_TOL = 1e-10
POWER_ITERATION_MAX = 100_000


@dataclass(frozen=True)
class PairedTResult:
    mean_diff: float
    ci_low: float
    ci_high: float
    t_stat: float
    p_two_sided: float
    n: int
    degenerate: bool = False


def paired_t(a: Sequence[float], b: Sequence[float]) -> PairedTResult:
    """Matched-pair t on a−b with a 95% CI from the t-distribution.

    Zero variance of the differences cannot produce a t statistic; the
    result is flagged degenerate and carries the exact mean.
    """
    if len(a) != len(b):
        raise DataError(f"paired samples differ in length: {len(a)} vs {len(b)}")
    n = len(a)
    if n < 2:
        raise DataError("paired t-test needs at least 2 pairs")
    d = np.asarray(a, dtype=float) - np.asarray(b, dtype=float)
    mean = float(d.mean())
    sd = float(d.std(ddof=1))
    if sd == 0.0:
        return PairedTResult(mean_diff=mean, ci_low=mean, ci_high=mean,
                             t_stat=math.nan, p_two_sided=math.nan,
                             n=n, degenerate=True)
    se = sd / math.sqrt(n)
    t_stat = mean / se
    crit = float(t_dist.ppf(0.975, n - 1))
    p = 2.0 * float(t_dist.sf(abs(t_stat), n - 1))
    return PairedTResult(mean_diff=mean, ci_low=mean - crit * se,
                         ci_high=mean + crit * se, t_stat=t_stat,
                         p_two_sided=p, n=n)


def pca_first_component(matrix) -> tuple[np.ndarray, float]:
    """First principal component by power iteration on the covariance.

    Columns are centered internally. The loading vector has unit norm with
    its largest-magnitude entry made positive; the second value is the
    fraction of total variance the component explains.
    """
    x = np.asarray(matrix, dtype=float)
    if x.ndim != 2 or x.shape[0] < 2:
        raise DataError(f"need an n>=2 by m matrix, got shape {x.shape}")
    centered = x - x.mean(axis=0)
    cov = centered.T @ centered / (x.shape[0] - 1)
    total = float(np.trace(cov))
    if total <= 1e-15:
        raise DataError("matrix has no variance")

    m = cov.shape[0]
    v = np.ones(m) / math.sqrt(m)
    for _ in range(POWER_ITERATION_MAX):
        w = cov @ v
        norm = float(np.linalg.norm(w))
        if norm <= 1e-300:
            # ones vector happens to sit in the null space; nudge off it
            v = np.zeros(m)
            v[int(np.argmax(np.diag(cov)))] = 1.0
            continue
        w = w / norm
        if min(np.linalg.norm(w - v), np.linalg.norm(w + v)) < POWER_ITERATION_TOL:
            v = w
            break
        v = w
    eigenvalue = float(v @ cov @ v)
    if v[int(np.argmax(np.abs(v)))] < 0:
        v = -v
    return v, eigenvalue / total


def binomial_test_one_sided(k: int, n: int, p0: float = 0.5) -> float:
    """Exact upper tail P(X >= k) for X ~ Binomial(n, p0), in log space."""
    if not 0 <= k <= n:
        raise DataError(f"need 0 <= k <= n, got k={k}, n={n}")
    if not 0.0 <= p0 <= 1.0:
        raise DataError(f"p0 must lie in [0,1], got {p0}")
    if k == 0:
        return 1.0
    if p0 == 0.0:
        return 0.0
    if p0 == 1.0:
        return 1.0
    log_p = math.log(p0)
    log_q = math.log1p(-p0)
    terms = [
        math.lgamma(n + 1) - math.lgamma(i + 1) - math.lgamma(n - i + 1)
        + i * log_p + (n - i) * log_q
        for i in range(k, n + 1)
    ]
    peak = max(terms)
    tail = peak + math.log(math.fsum(math.exp(t - peak) for t in terms))
    return min(1.0, math.exp(tail))
