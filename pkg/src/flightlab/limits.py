"""Exact samplers for the three limit processes of the rescaled flight."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .directions import DirectionLaw, DirectionLawError, psd_sqrt
from .paths import PathError, PolylinePath
from .rng import as_stream


@dataclass(frozen=True)
class PowerLimitSpec:
    alpha: float
    K: np.ndarray

    def __post_init__(self):
        if not self.alpha > 0.5:
            raise ValueError("alpha must exceed 1/2")
        K = np.atleast_2d(np.asarray(self.K, dtype=float))
        if K.shape[0] != K.shape[1]:
            raise DirectionLawError("K must be square")
        if np.trace(K) > 1 + 1e-9:
            raise DirectionLawError("covariance of a unit-sphere law has trace <= 1")
        object.__setattr__(self, "K", K)
        object.__setattr__(self, "_root", psd_sqrt(K))

    @property
    def d(self) -> int:
        return self.K.shape[0]

    @property
    def root(self) -> np.ndarray:
        return self._root


def power_marginal_variance(t: float, x, alpha: float, K) -> float:
    """``Var <Y(t), x> = 2 a^2/(2a-1) t^{(2a-1)/a} x'Kx``."""
    if not alpha > 0.5:
        raise ValueError("alpha must exceed 1/2")
    if not 0 <= t <= 1:
        raise ValueError("t must lie in [0, 1]")
    x = np.asarray(x, dtype=float)
    K = np.atleast_2d(np.asarray(K, dtype=float))
    return float(2 * alpha**2 / (2 * alpha - 1) * t ** ((2 * alpha - 1) / alpha) * (x @ K @ x))


def _check_grid(grid) -> np.ndarray:
    g = np.asarray(grid, dtype=float)
    if g.ndim != 1 or np.any(np.diff(g) < 0) or g[0] < 0 or g[-1] > 1:
        raise PathError("grid must be sorted within [0, 1]")
    return g


def sample_power_limit_batch(
    spec: PowerLimitSpec, times, size: int, rng, method: str = "time-change", cells: int = 1024
) -> np.ndarray:
    """Values of ``size`` independent copies of ``Y`` at ``times``; shape ``(size, len(times), d)``.

    ``time-change``: ``a sqrt(2/(2a-1)) K^{1/2} w(t^{(2a-1)/a})``.
    ``kernel``: midpoint discretization of ``sqrt(2a) int s^{(a-1)/(2a)} dW(s)``
    on ``cells`` uniform cells (plus the requested times).
    """
    rng = as_stream(rng)
    times = _check_grid(times)
    a, d = spec.alpha, spec.d
    if method == "time-change":
        clock = times ** ((2 * a - 1) / a)
        dt = np.diff(np.concatenate([[0.0], clock]))
        z = rng.normal((size, len(times), d)) * np.sqrt(dt)[None, :, None]
        w = np.cumsum(z, axis=1)
        return a * np.sqrt(2 / (2 * a - 1)) * w @ spec.root.T
    if method == "kernel":
        edges = np.union1d(np.linspace(0.0, 1.0, cells + 1), times)
        mid = 0.5 * (edges[1:] + edges[:-1])
        ds = np.diff(edges)
        weight = np.sqrt(2 * a) * mid ** ((a - 1) / (2 * a)) * np.sqrt(ds)
        pick = np.searchsorted(edges, times)  # value at edges[i] = sum of first i cells
        out = np.empty((size, len(times), d))
        chunk = max(1, 2_000_000 // (len(ds) * d))
        for lo in range(0, size, chunk):
            hi = min(size, lo + chunk)
            inc = rng.normal((hi - lo, len(ds), d)) * weight[None, :, None]
            cum = np.concatenate([np.zeros((hi - lo, 1, d)), np.cumsum(inc, axis=1)], axis=1)
            out[lo:hi] = cum[:, pick, :] @ spec.root.T
        return out
    raise ValueError(f"unknown method {method!r}")


def sample_power_limit(spec: PowerLimitSpec, grid, rng, method: str = "time-change") -> PolylinePath:
    grid = _check_grid(grid)
    knots = np.union1d(np.union1d(grid, [0.0]), [1.0])
    vals = sample_power_limit_batch(spec, knots, 1, rng, method)[0]
    return PolylinePath(knots, vals)


@dataclass(frozen=True)
class ExpLimitSpec:
    beta: float
    law: DirectionLaw
    truncation_tol: float = 1e-9

    def __post_init__(self):
        if not self.beta > 0:
            raise ValueError("beta must be positive")
        if not 0 < self.truncation_tol < 1:
            raise ValueError("truncation_tol must lie in (0, 1)")


@dataclass
class CoupledExpSample:
    Y_n: PolylinePath
    Y: PolylinePath
    bound: float
    gamma_increments: np.ndarray = field(repr=False)
    directions: np.ndarray = field(repr=False)


def _tail_sums(c: np.ndarray) -> np.ndarray:
    # r[k] = sum_{i >= k} c[i], accumulated from the small end
    return np.cumsum(c[::-1], axis=0)[::-1]


def sample_exp_limit_coupled(spec: ExpLimitSpec, n: int, rng) -> CoupledExpSample:
    """``Y_n`` and the (truncated) limit ``Y`` built from the same draws.

    Knots are ``t_k = exp(-beta Gamma_{k-1})`` with ``Gamma_0 = 0``, so
    ``t_1 = 1``.  ``Y_n`` ends with the segment of slope ``eps_n`` down to 0;
    ``Y`` keeps summing until ``t_K < truncation_tol`` and is set to 0 below
    ``t_K``, which moves it by less than ``truncation_tol``.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    rng = as_stream(rng)
    beta, tol = spec.beta, spec.truncation_tol
    gam = rng.exponential(n)
    while beta * gam.sum() <= -np.log(tol):
        gam = np.concatenate([gam, rng.exponential(n)])
    G = np.concatenate([[0.0], np.cumsum(gam)])  # G[j] = Gamma_j
    K = max(n, int(np.argmax(np.exp(-beta * G) < tol)) + 1)  # first k with t_k < tol
    eps = spec.law.sample(K, rng)
    t = np.exp(-beta * G[:K])  # t[k-1] = t_k, k = 1..K
    drop = t[:-1] - t[1:]  # e^{-b G_{i-1}} - e^{-b G_i}, i = 1..K-1

    c = eps[: K - 1] * drop[:, None]
    tail = _tail_sums(c)
    y_vals = np.concatenate([tail, np.zeros((1, eps.shape[1]))])  # at t_1..t_K
    Y = PolylinePath(np.concatenate([[0.0], t[::-1]]), np.concatenate([np.zeros((1, eps.shape[1])), y_vals[::-1]]))

    head = _tail_sums(c[: n - 1]) + eps[n - 1] * t[n - 1]  # k = 1..n-1
    yn_vals = np.concatenate([head, eps[n - 1 : n] * t[n - 1]])  # at tau_1..tau_n
    Y_n = PolylinePath(np.concatenate([[0.0], t[:n][::-1]]), np.concatenate([np.zeros((1, eps.shape[1])), yn_vals[::-1]]))
    return CoupledExpSample(Y_n, Y, float(2 * np.exp(-beta * G[n - 1])), gam[:K], eps)


def sample_degenerate_limit(law: DirectionLaw, rng) -> PolylinePath:
    """``Y(t) = eps t`` with ``eps`` drawn from ``law``."""
    eps = law.sample(1, rng)[0]
    return PolylinePath(np.array([0.0, 1.0]), np.vstack([np.zeros_like(eps), eps]))
