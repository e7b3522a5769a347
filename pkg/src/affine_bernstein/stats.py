"""Distribution-comparison statistics with pass/fail thresholds."""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
from scipy import optimize, stats

KS_THRESHOLD = 0.02
CHI2_P_THRESHOLD = 0.01
MIN_SAMPLES = 100


@dataclass(frozen=True)
class DistTestReport:
    test: str  # ks_one_sample | ks_two_sample | chi_square_gof
    statistic: float
    n: tuple
    threshold: float
    passed: bool
    p_value: float | None = None

    def to_dict(self) -> dict:
        d = asdict(self)
        d["n"] = list(self.n)
        return d


def _clean(samples, name="samples"):
    x = np.asarray(samples, dtype=float).ravel()
    if x.size == 0:
        raise ValueError(f"{name} is empty")
    if x.size < MIN_SAMPLES:
        raise ValueError(f"{name} needs at least {MIN_SAMPLES} values, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise ValueError(f"{name} contains non-finite values")
    return x


def ks_one_sample(samples, cdf, threshold: float = KS_THRESHOLD) -> DistTestReport:
    """Sup-distance between the empirical CDF of ``samples`` and ``cdf``."""
    x = _clean(samples)
    res = stats.ks_1samp(x, cdf)
    return DistTestReport("ks_one_sample", float(res.statistic), (x.size,), threshold,
                          bool(res.statistic <= threshold), float(res.pvalue))


def ks_two_sample(samples_a, samples_b, threshold: float = KS_THRESHOLD) -> DistTestReport:
    a = _clean(samples_a, "samples_a")
    b = _clean(samples_b, "samples_b")
    res = stats.ks_2samp(a, b)
    return DistTestReport("ks_two_sample", float(res.statistic), (a.size, b.size), threshold,
                          bool(res.statistic <= threshold), float(res.pvalue))


def equal_probability_edges(cdf, n_bins: int, lo: float, hi: float) -> np.ndarray:
    """Interior bin edges ``F^{-1}(k/n_bins)`` found by bracketing on [lo, hi]."""
    edges = []
    for k in range(1, n_bins):
        p = k / n_bins
        edges.append(optimize.brentq(lambda x: cdf(x) - p, lo, hi, xtol=1e-13, rtol=1e-13))
    return np.array(edges)


def chi_square_gof(samples, cdf, n_bins: int = 50, p_threshold: float = CHI2_P_THRESHOLD,
                   support: tuple[float, float] | None = None) -> DistTestReport:
    """Pearson chi-square over ``n_bins`` bins of equal probability under ``cdf``.

    ``support`` must bracket every interior quantile; by default it is the
    sample range widened by its own span.
    """
    x = _clean(samples)
    if support is None:
        span = x.max() - x.min()
        support = (x.min() - span - 1.0, x.max() + span + 1.0)
    edges = equal_probability_edges(cdf, n_bins, *support)
    counts = np.bincount(np.searchsorted(edges, x, side="right"), minlength=n_bins)
    expected = x.size / n_bins
    stat = float(np.sum((counts - expected) ** 2) / expected)
    p = float(stats.chi2.sf(stat, n_bins - 1))
    return DistTestReport("chi_square_gof", stat, (x.size,), p_threshold, bool(p >= p_threshold), p)
