"""Statistical checks: KS tests, covariances and the M_n statistic."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import special, stats

from .clock import sample_arrivals, sample_arrivals_batch
from .rng import as_stream


class StatsError(ValueError):
    pass


@dataclass
class SampleBatch:
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).ravel()
        if v.size == 0:
            raise StatsError("empty sample")
        if not np.all(np.isfinite(v)):
            raise StatsError("sample contains non-finite values")
        self.values = v


@dataclass
class KSResult:
    D: float
    p: float
    n: int


def _as_batch(sample) -> SampleBatch:
    return sample if isinstance(sample, SampleBatch) else SampleBatch(sample)


def ks_test(sample, cdf: Callable[[np.ndarray], np.ndarray]) -> KSResult:
    """One-sample KS: exact ``sup |F_n - F|`` and the asymptotic Kolmogorov p-value."""
    x = np.sort(_as_batch(sample).values)
    n = x.size
    F = np.asarray(cdf(x), dtype=float)
    if np.any(F < 0) or np.any(F > 1) or np.any(np.diff(F) < -1e-12):
        raise StatsError("reference cdf must be non-decreasing with values in [0, 1]")
    i = np.arange(1, n + 1)
    D = float(max(np.max(i / n - F), np.max(F - (i - 1) / n), 0.0))
    return KSResult(D, float(special.kolmogorov(math.sqrt(n) * D)), n)


def ks_2samp(a, b) -> KSResult:
    """Two-sample KS with the asymptotic p-value at effective size ``nm/(n+m)``."""
    x = np.sort(_as_batch(a).values)
    y = np.sort(_as_batch(b).values)
    allv = np.concatenate([x, y])
    Fx = np.searchsorted(x, allv, side="right") / x.size
    Fy = np.searchsorted(y, allv, side="right") / y.size
    D = float(np.max(np.abs(Fx - Fy)))
    ne = x.size * y.size / (x.size + y.size)
    return KSResult(D, float(special.kolmogorov(math.sqrt(ne) * D)), int(x.size + y.size))


def normal_cdf(variance: float, mean: float = 0.0):
    sd = math.sqrt(variance)
    return lambda x: stats.norm.cdf(x, loc=mean, scale=sd)


def empirical_cov(samples) -> np.ndarray:
    X = np.asarray(samples, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.shape[0] < 2:
        raise StatsError("need at least two samples")
    C = X - X.mean(axis=0)
    return C.T @ C / (X.shape[0] - 1)


def mn_from_arrivals(G: np.ndarray) -> np.ndarray:
    """``max_k |G_k/G_n - k/n|`` for each row of arrival times."""
    G = np.atleast_2d(G)
    n = G.shape[1]
    k = np.arange(1, n + 1) / n
    return np.max(np.abs(G / G[:, -1:] - k), axis=1)


def mn_statistic(n: int, rng) -> float:
    """``M_n`` from a fresh arrival sample."""
    if n < 1:
        raise StatsError("n must be >= 1")
    return float(mn_from_arrivals(sample_arrivals(n, rng).arrivals[None, :])[0])


def mn_batch(n: int, replicas: int, rng, chunk: int = 500) -> np.ndarray:
    rng = as_stream(rng)
    out = np.empty(replicas)
    for lo in range(0, replicas, chunk):
        hi = min(replicas, lo + chunk)
        out[lo:hi] = mn_from_arrivals(sample_arrivals_batch(n, hi - lo, rng))
    return out


def uniform_order_deviation(n: int, replicas: int, rng) -> np.ndarray:
    """``max_k |U_(k) - k/n|`` over the ``n-1`` order statistics of uniforms (``k = n`` term is 0).

    Given ``Gamma_n``, ``(Gamma_1, ..., Gamma_{n-1}) / Gamma_n`` are the order
    statistics of ``n-1`` independent uniforms, so this has the law of ``M_n``.
    """
    rng = as_stream(rng)
    if n == 1:
        return np.zeros(replicas)
    U = np.sort(rng.uniform((replicas, n - 1)), axis=1)
    k = np.arange(1, n) / n
    return np.maximum(np.max(np.abs(U - k), axis=1), 0.0)


def chi_square_gof(observed, expected, min_expected: float = 5.0) -> tuple[float, float, int]:
    """Pearson chi-square; bins with small expectation are pooled into one."""
    o = np.asarray(observed, dtype=float)
    e = np.asarray(expected, dtype=float)
    small = e < min_expected
    if small.any():
        o = np.append(o[~small], o[small].sum())
        e = np.append(e[~small], e[small].sum())
        if e[-1] == 0:
            o, e = o[:-1], e[:-1]
    e = e * o.sum() / e.sum()
    stat = float(np.sum((o - e) ** 2 / e))
    dof = len(o) - 1
    return stat, float(stats.chi2.sf(stat, dof)), dof
