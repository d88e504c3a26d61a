"""Poisson clocks: standard arrivals, clock functions and gamma-moment identities."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .rng import RngStream, as_stream

# Bernoulli-number coefficients B_{2j} / (2j (2j-1)) of the Stirling series.
_STIRLING = (
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
)
_SHIFT_TO = 30.0


class EmptySequenceError(ValueError):
    pass


class ClockDomainError(ValueError):
    pass


@dataclass(frozen=True)
class ClockFunction:
    """Growth regime ``f`` of the clock ``T_k = f(Gamma_k)``.

    Use the constructors :meth:`power`, :meth:`exponential`,
    :meth:`superexponential` and :meth:`custom` rather than the raw fields.
    """

    kind: str
    alpha: Optional[float] = None
    beta: Optional[float] = None
    func: Optional[Callable[[np.ndarray], np.ndarray]] = field(default=None, compare=False)
    label: str = ""

    @classmethod
    def power(cls, alpha: float) -> "ClockFunction":
        if not alpha > 0.5:
            raise ClockDomainError(f"power clock needs alpha > 1/2, got {alpha}")
        return cls("power", alpha=float(alpha), label=f"t^{alpha:g}")

    @classmethod
    def exponential(cls, beta: float = 1.0) -> "ClockFunction":
        if not beta > 0:
            raise ClockDomainError(f"exponential clock needs beta > 0, got {beta}")
        return cls("exponential", beta=float(beta), label=f"exp({beta:g} t)")

    @classmethod
    def superexponential(cls) -> "ClockFunction":
        return cls("superexponential", label="exp(t^2)")

    @classmethod
    def custom(cls, func: Callable, label: str = "custom", check_upto: float = 50.0) -> "ClockFunction":
        grid = np.linspace(0.0, check_upto, 2001)
        vals = np.asarray(func(grid), dtype=float)
        if np.any(np.diff(vals) <= 0) or np.any(vals[1:] <= 0):
            raise ClockDomainError(f"custom clock {label!r} is not positive and strictly increasing on [0, {check_upto}]")
        return cls("custom", func=func, label=label)

    @classmethod
    def from_dict(cls, spec: dict) -> "ClockFunction":
        kind = spec.get("kind", "power")
        if kind == "power":
            return cls.power(spec["alpha"])
        if kind == "exponential":
            return cls.exponential(spec.get("beta", 1.0))
        if kind == "superexponential":
            return cls.superexponential()
        raise ClockDomainError(f"unknown clock kind {kind!r}")

    def to_dict(self) -> dict:
        out = {"kind": self.kind, "label": self.label}
        if self.alpha is not None:
            out["alpha"] = self.alpha
        if self.beta is not None:
            out["beta"] = self.beta
        return out

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "power":
            return t**self.alpha
        if self.kind == "exponential":
            return np.exp(self.beta * t)
        if self.kind == "superexponential":
            return np.exp(t * t)
        return np.asarray(self.func(t), dtype=float)

    def log(self, t):
        """``log f(t)``; finite for every variant where ``f`` itself overflows."""
        t = np.asarray(t, dtype=float)
        if self.kind == "power":
            with np.errstate(divide="ignore"):
                return self.alpha * np.log(t)
        if self.kind == "exponential":
            return self.beta * t
        if self.kind == "superexponential":
            return t * t
        with np.errstate(divide="ignore"):
            return np.log(self(t))

    def log_normalization(self, log_T):
        """``log B(T)``: ``T^{(2a-1)/(2a)}`` for power clocks, ``T`` otherwise."""
        log_T = np.asarray(log_T, dtype=float)
        if self.kind == "power":
            return (2 * self.alpha - 1) / (2 * self.alpha) * log_T
        return log_T


@dataclass
class ArrivalSequence:
    gamma_increments: np.ndarray
    arrivals: np.ndarray
    clock: Optional[ClockFunction] = None
    clocked: Optional[np.ndarray] = None
    log_clocked: Optional[np.ndarray] = None
    seed: Optional[int] = None
    stream_index: Optional[int] = None

    def __len__(self) -> int:
        return len(self.arrivals)


def truncate_arrivals(seq: ArrivalSequence, k: int) -> ArrivalSequence:
    """The first ``k`` arrivals of ``seq`` (clocked values included)."""
    if not 1 <= k <= len(seq):
        raise EmptySequenceError(f"cannot keep {k} of {len(seq)} arrivals")
    cut = lambda a: None if a is None else a[:k]
    return ArrivalSequence(seq.gamma_increments[:k], seq.arrivals[:k], seq.clock, cut(seq.clocked),
                           cut(seq.log_clocked), seq.seed, seq.stream_index)


def sample_arrivals(n: int, rng) -> ArrivalSequence:
    """First ``n`` points of a unit-rate Poisson process on the half line."""
    if n < 1:
        raise EmptySequenceError("need at least one arrival")
    rng = as_stream(rng)
    gam = rng.exponential(n)
    return ArrivalSequence(gam, np.cumsum(gam), seed=rng.seed, stream_index=rng.stream_index)


def sample_arrivals_batch(n: int, replicas: int, rng) -> np.ndarray:
    """``(replicas, n)`` array of arrival times, one row per replica."""
    if n < 1 or replicas < 1:
        raise EmptySequenceError("need n >= 1 and replicas >= 1")
    rng = as_stream(rng)
    return np.cumsum(rng.exponential((replicas, n)), axis=1)


def apply_clock(clock: ClockFunction, arrivals: ArrivalSequence) -> ArrivalSequence:
    if arrivals.arrivals is None or len(arrivals.arrivals) == 0:
        raise EmptySequenceError("arrivals not populated")
    log_T = np.asarray(clock.log(arrivals.arrivals), dtype=float)
    if np.any(np.diff(log_T) < 0):
        raise ClockDomainError(f"clock {clock.label!r} is not monotone on the given arrivals")
    with np.errstate(over="ignore"):
        T = np.exp(log_T) if clock.kind != "custom" else np.asarray(clock(arrivals.arrivals), dtype=float)
    return replace(arrivals, clock=clock, clocked=T, log_clocked=log_T)


def _log_gamma_ratio_large(z: float, beta: float) -> float:
    # log Gamma(z+beta) - log Gamma(z) for z, z+beta >= _SHIFT_TO
    zb = z + beta
    head = (z - 0.5) * math.log1p(beta / z) + beta * math.log(zb) - beta
    tail = 0.0
    for j, c in enumerate(_STIRLING):
        p = 2 * j + 1
        tail += c * (zb**-p - z**-p)
    return head + tail


def exact_gamma_moment(k: int, beta: float) -> float:
    """``E Gamma_k^beta = Gamma(k+beta)/Gamma(k)`` to ~1e-14 relative accuracy."""
    if k < 1:
        raise ClockDomainError("k must be a positive integer")
    if k + beta <= 0:
        raise ClockDomainError(f"k + beta must be positive, got {k + beta}")
    if beta == 0:
        return 1.0
    z = float(k)
    log_prod = 0.0
    while min(z, z + beta) < _SHIFT_TO:
        log_prod += math.log(z) - math.log(z + beta)
        z += 1.0
    return math.exp(_log_gamma_ratio_large(z, beta) + log_prod)


@dataclass
class SpacingMomentResult:
    alpha: float
    n: int
    replicas: int
    mc_sum: float
    std_error: float
    leading_term: float
    exact_sum: Optional[float]

    @property
    def ratio(self) -> float:
        return self.mc_sum / self.leading_term


def _exact_spacing_sum(alpha: float, n: int) -> Optional[float]:
    # Integer alpha: E (G_{k+1}^a - G_k^a)^2 expands into gamma moments because
    # G_{k+1} = G_k + g with g ~ Exp(1) independent of G_k.
    if float(alpha) != int(alpha):
        return None
    a = int(alpha)
    total = 0.0
    for k in range(1, n):
        s = 0.0
        for i in range(1, a + 1):
            for j in range(1, a + 1):
                s += (
                    math.comb(a, i) * math.comb(a, j)
                    * math.factorial(i + j)
                    * exact_gamma_moment(k, 2 * a - i - j)
                )
        total += s
    return total


def spacing_second_moment_sum(alpha: float, n: int, replicas: int, rng, chunk: int = 2000) -> SpacingMomentResult:
    """Monte Carlo estimate of ``sum_{k<n} E|Gamma_{k+1}^a - Gamma_k^a|^2``."""
    if not alpha > 0.5:
        raise ClockDomainError("alpha must exceed 1/2")
    if n < 2 or replicas < 2:
        raise ValueError("need n >= 2 and replicas >= 2")
    rng = as_stream(rng)
    sums = np.empty(replicas)
    for start in range(0, replicas, chunk):
        stop = min(replicas, start + chunk)
        G = sample_arrivals_batch(n, stop - start, rng)
        sums[start:stop] = np.sum(np.diff(G**alpha, axis=1) ** 2, axis=1)
    leading = 2 * alpha**2 / (2 * alpha - 1) * n ** (2 * alpha - 1)
    return SpacingMomentResult(
        alpha=alpha,
        n=n,
        replicas=replicas,
        mc_sum=float(sums.mean()),
        std_error=float(sums.std(ddof=1) / math.sqrt(replicas)),
        leading_term=leading,
        exact_sum=_exact_spacing_sum(alpha, n),
    )
