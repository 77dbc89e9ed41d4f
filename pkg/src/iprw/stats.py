"""Monte Carlo estimators, jackknife standard errors and goodness-of-fit tests."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import stats as sps

from .seeding import replicate_rng


@dataclass(frozen=True)
class EstimateCI:
    point: float
    se: float
    replicates: int
    level: float = 0.99

    def __post_init__(self) -> None:
        if self.se < 0 or not math.isfinite(self.se):
            raise ValueError("standard error must be finite and >= 0")

    @property
    def z(self) -> float:
        return float(sps.norm.ppf(0.5 + self.level / 2))

    @property
    def interval(self) -> tuple[float, float]:
        return self.point - self.z * self.se, self.point + self.z * self.se

    def within(self, target: float, k: float = 3.0) -> bool:
        """|point - target| <= k se (exact equality when se = 0)."""
        return abs(self.point - target) <= k * self.se

    def to_dict(self) -> dict:
        return {"point": self.point, "se": self.se, "replicates": self.replicates, "level": self.level}


def mean_estimate(x, level: float = 0.99) -> EstimateCI:
    x = np.asarray(x, dtype=float)
    n = len(x)
    if n < 2:
        raise ValueError("need at least two replicates")
    se = float(np.std(x, ddof=1) / math.sqrt(n))
    return EstimateCI(float(np.mean(x)), se, n, level)


def jackknife_variance(x, level: float = 0.99) -> EstimateCI:
    """Unbiased sample variance with its delete-one jackknife SE (closed form)."""
    x = np.asarray(x, dtype=float)
    n = len(x)
    if n < 3:
        raise ValueError("need at least three replicates")
    d = x - x.mean()
    S = float(np.dot(d, d))
    loo = (S - n / (n - 1) * d**2) / (n - 2)
    se = math.sqrt((n - 1) / n * float(np.sum((loo - loo.mean()) ** 2)))
    return EstimateCI(S / (n - 1), se, n, level)


def jackknife_covariance(x, y, level: float = 0.99) -> EstimateCI:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = len(x)
    if n < 3 or len(y) != n:
        raise ValueError("need two equal-length samples of size >= 3")
    dx, dy = x - x.mean(), y - y.mean()
    C = float(np.dot(dx, dy))
    loo = (C - n / (n - 1) * dx * dy) / (n - 2)
    se = math.sqrt((n - 1) / n * float(np.sum((loo - loo.mean()) ** 2)))
    return EstimateCI(C / (n - 1), se, n, level)


def mc_estimate(sampler: Callable[[np.random.Generator], float], replicates: int, seed: int,
                statistic: str = "mean", level: float = 0.99) -> EstimateCI:
    """Run ``sampler`` once per replicate with the derived rng and summarise."""
    if replicates < 100:
        raise ValueError("mc_estimate needs at least 100 replicates")
    x = np.array([sampler(replicate_rng(seed, i)) for i in range(replicates)], dtype=float)
    if statistic == "mean":
        return mean_estimate(x, level)
    if statistic == "variance":
        return jackknife_variance(x, level)
    raise ValueError(f"unknown statistic {statistic!r}")


# -- Kolmogorov-Smirnov --------------------------------------------------

def kolmogorov_sf(lam: float, tail: float = 1e-12) -> float:
    """P{K > lam} for the Kolmogorov distribution, series summed until the
    next term drops below ``tail``."""
    if lam <= 0:
        return 1.0
    if lam < 1.0:
        # theta-function form converges fast for small lam
        s = 0.0
        k = 1
        c = math.pi**2 / (8 * lam * lam)
        while True:
            term = math.exp(-((2 * k - 1) ** 2) * c)
            s += term
            if term < tail:
                break
            k += 1
        return min(1.0, max(0.0, 1.0 - math.sqrt(2 * math.pi) / lam * s))
    s = 0.0
    k = 1
    while True:
        term = math.exp(-2 * k * k * lam * lam)
        s += term if k % 2 else -term
        if term < tail:
            break
        k += 1
    return min(1.0, max(0.0, 2 * s))


def ks_statistic(sample, target_cdf: Callable) -> float:
    x = np.sort(np.asarray(sample, dtype=float))
    if len(x) == 0:
        raise ValueError("empty sample")
    if not np.all(np.isfinite(x)):
        raise ValueError("sample contains non-finite values")
    n = len(x)
    F = np.asarray(target_cdf(x), dtype=float)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - F), np.max(F - (i - 1) / n)))


def ks_test(sample, target_cdf: Callable) -> tuple[float, float]:
    """(D_n, asymptotic p-value)."""
    D = ks_statistic(sample, target_cdf)
    n = len(np.asarray(sample))
    return D, kolmogorov_sf(math.sqrt(n) * D)


def normal_cdf(variance: float) -> Callable:
    sd = math.sqrt(variance)
    return lambda x: sps.norm.cdf(np.asarray(x) / sd)


def jitter(counts, rng: np.random.Generator) -> np.ndarray:
    """Integer counts plus U(-1/2, 1/2): a continuous variable with the same
    mean, used before comparing lattice data to a continuous law."""
    c = np.asarray(counts, dtype=float)
    return c + rng.random(c.shape) - 0.5


def chisq_poisson(counts, lam: float, min_expected: float = 5.0) -> tuple[float, float]:
    """Chi-square goodness of fit of integer counts to Poisson(lam); cells
    are merged from the tails until each expects at least ``min_expected``."""
    c = np.asarray(counts, dtype=np.int64)
    n = len(c)
    lo = int(sps.poisson.ppf(1e-9, lam))
    hi = int(sps.poisson.isf(1e-9, lam)) + 1
    edges = [lo]
    acc = 0.0
    for k in range(lo, hi):
        acc += n * sps.poisson.pmf(k, lam)
        if acc >= min_expected:
            edges.append(k + 1)
            acc = 0.0
    edges[-1] = hi
    inner = np.asarray(edges, dtype=float)
    cdf = sps.poisson.cdf(inner - 1, lam)
    probs = np.diff(np.concatenate(([0.0], cdf[1:-1], [1.0])))
    idx = np.searchsorted(inner[1:-1], c, side="right")
    observed = np.bincount(idx, minlength=len(probs))
    stat, p = sps.chisquare(observed, probs * n)
    return float(stat), float(p)


def nonincreasing(values, slack: float = 0.0) -> bool:
    v = np.asarray(values, dtype=float)
    return bool(np.all(np.diff(v) <= slack))
