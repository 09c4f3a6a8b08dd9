"""Correlation coefficients and hypothesis tests used by the diagnostics.

All p-values are large-sample approximations: t-based for Pearson and
Spearman, tie-adjusted normal for Kendall and the rank-sum test, the
asymptotic Kolmogorov distribution for the one-sample KS test, and the
chi-squared distribution for the serial independence test.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.special
import scipy.stats

from .errors import DataError


@dataclass(frozen=True)
class TestResult:
    statistic: float
    p_value: float
    method: str
    n: tuple[int, ...]

    def __post_init__(self):
        if not (0.0 <= self.p_value <= 1.0):
            raise DataError(f"p-value {self.p_value} outside [0,1]")

    def to_dict(self) -> dict:
        return {"statistic": self.statistic, "p_value": self.p_value,
                "method": self.method, "n": list(self.n)}


def _two_sided_t(t: float, df: int) -> float:
    if not math.isfinite(t):
        return 0.0
    return float(2.0 * scipy.stats.t.sf(abs(t), df))


def _two_sided_z(z: float) -> float:
    return float(scipy.special.erfc(abs(z) / math.sqrt(2.0)))


def pearson_r(x, y) -> TestResult:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = x.size
    if n < 3 or y.size != n:
        raise DataError("need two equal-length samples of size >= 3")
    xc, yc = x - x.mean(), y - y.mean()
    sx = float(np.sqrt(np.sum(xc**2)))
    sy = float(np.sqrt(np.sum(yc**2)))
    if sx == 0.0 or sy == 0.0:
        raise DataError("zero variance: correlation undefined")
    r = float(np.clip(np.sum(xc * yc) / (sx * sy), -1.0, 1.0))
    if 1.0 - r * r <= 0.0:
        p = 0.0
    else:
        p = _two_sided_t(r * math.sqrt((n - 2) / (1.0 - r * r)), n - 2)
    return TestResult(statistic=r, p_value=p, method="pearson", n=(n,))


def _tie_counts(v: np.ndarray) -> np.ndarray:
    _, counts = np.unique(v, return_counts=True)
    return counts[counts > 1].astype(float)


def kendall_tau(x, y) -> TestResult:
    """Kendall tau-b with tie correction; normal-approximation p-value."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = x.size
    if n < 3 or y.size != n:
        raise DataError("need two equal-length samples of size >= 3")
    s = 0.0
    for lo in range(0, n, 512):  # chunk the pair matrix
        sx = np.sign(x[lo:lo + 512, None] - x[None, :])
        sy = np.sign(y[lo:lo + 512, None] - y[None, :])
        s += float(np.sum(sx * sy))
    s /= 2.0  # ordered pairs double-count i<j

    t = _tie_counts(x)
    u = _tie_counts(y)
    n0 = n * (n - 1) / 2.0
    n1 = float(np.sum(t * (t - 1) / 2.0))
    n2 = float(np.sum(u * (u - 1) / 2.0))
    denom = math.sqrt((n0 - n1) * (n0 - n2))
    if denom == 0.0:
        raise DataError("zero variance: correlation undefined")
    tau = s / denom

    var_s = (n * (n - 1) * (2 * n + 5)
             - float(np.sum(t * (t - 1) * (2 * t + 5)))
             - float(np.sum(u * (u - 1) * (2 * u + 5)))) / 18.0
    var_s += (np.sum(t * (t - 1) * (t - 2)) * np.sum(u * (u - 1) * (u - 2))
              / (9.0 * n * (n - 1) * (n - 2)))
    var_s += (np.sum(t * (t - 1)) * np.sum(u * (u - 1))
              / (2.0 * n * (n - 1)))
    p = _two_sided_z(s / math.sqrt(var_s)) if var_s > 0 else 1.0
    return TestResult(statistic=float(tau), p_value=p, method="kendall-tau-b",
                      n=(n,))


def spearman_rho(x, y) -> TestResult:
    """Spearman rho via average ranks; t-approximation p-value."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 3 or y.size != x.size:
        raise DataError("need two equal-length samples of size >= 3")
    rx = scipy.stats.rankdata(x)
    ry = scipy.stats.rankdata(y)
    res = pearson_r(rx, ry)
    return TestResult(statistic=res.statistic, p_value=res.p_value,
                      method="spearman", n=(x.size,))


def correlations(x, y) -> dict[str, TestResult]:
    """Pearson, Kendall tau-b, and Spearman rho with p-values."""
    return {"pearson": pearson_r(x, y),
            "kendall": kendall_tau(x, y),
            "spearman": spearman_rho(x, y)}


def ks_test(sample, cdf) -> TestResult:
    """One-sample Kolmogorov-Smirnov test against a distribution function."""
    s = np.sort(np.asarray(sample, dtype=float))
    n = s.size
    if n < 1:
        raise DataError("empty sample")
    f = np.asarray(cdf(s), dtype=float)
    i = np.arange(1, n + 1)
    d_plus = float(np.max(i / n - f))
    d_minus = float(np.max(f - (i - 1) / n))
    d = max(d_plus, d_minus)
    p = float(scipy.special.kolmogorov(math.sqrt(n) * d))
    return TestResult(statistic=d, p_value=min(p, 1.0), method="ks-1sample",
                      n=(n,))


def wilcoxon_ranksum(a, b) -> TestResult:
    """Two-sample rank-sum (Mann-Whitney U) with tie-corrected normal p."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    n1, n2 = a.size, b.size
    if n1 == 0 or n2 == 0:
        raise DataError("both samples must be non-empty")
    pooled = np.concatenate([a, b])
    ranks = scipy.stats.rankdata(pooled)
    r1 = float(np.sum(ranks[:n1]))
    u1 = r1 - n1 * (n1 + 1) / 2.0
    mean_u = n1 * n2 / 2.0
    n = n1 + n2
    ties = _tie_counts(pooled)
    tie_term = float(np.sum(ties**3 - ties)) / (n * (n - 1)) if n > 1 else 0.0
    var_u = n1 * n2 / 12.0 * ((n + 1) - tie_term)
    if var_u <= 0:
        return TestResult(statistic=u1, p_value=1.0,
                          method="wilcoxon-ranksum", n=(n1, n2))
    p = _two_sided_z((u1 - mean_u) / math.sqrt(var_u))
    return TestResult(statistic=u1, p_value=p, method="wilcoxon-ranksum",
                      n=(n1, n2))


def chi2_independence(returns, lag: int = 1, bins: int = 4) -> TestResult:
    """Serial independence test: chi-squared on the lagged-pair contingency
    table with marginal-quantile bin edges and (bins-1)^2 degrees of freedom.
    """
    d = np.asarray(returns, dtype=float)
    if lag < 1:
        raise DataError("lag must be >= 1")
    if d.size <= lag:
        raise DataError("series shorter than the lag")
    if bins < 2:
        raise DataError("need at least 2 bins")
    a, b = d[:-lag], d[lag:]
    qs = np.linspace(0.0, 1.0, bins + 1)
    ia = np.clip(np.searchsorted(np.quantile(a, qs), a, side="right") - 1,
                 0, bins - 1)
    ib = np.clip(np.searchsorted(np.quantile(b, qs), b, side="right") - 1,
                 0, bins - 1)
    table = np.zeros((bins, bins))
    np.add.at(table, (ia, ib), 1.0)
    total = table.sum()
    expected = table.sum(axis=1)[:, None] * table.sum(axis=0)[None, :] / total
    if np.any((expected > 0) & (expected < 5)):
        warnings.warn("expected cell count below 5; chi-squared approximation "
                      "may be poor", stacklevel=2)
    mask = expected > 0
    stat = float(np.sum((table[mask] - expected[mask]) ** 2 / expected[mask]))
    dof = (bins - 1) ** 2
    p = float(scipy.stats.chi2.sf(stat, dof))
    return TestResult(statistic=stat, p_value=p,
                      method=f"chi2-serial(lag={lag},bins={bins})",
                      n=(a.size,))
