"""Piecewise-linear paths on [0, 1] and the rescaled random flight ``Z_n``."""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

from .clock import ArrivalSequence, ClockDomainError, ClockFunction, apply_clock, sample_arrivals
from .rng import as_stream


class PathError(ValueError):
    pass


@dataclass(frozen=True)
class PolylinePath:
    """Continuous broken line through ``(knot_times[i], knot_values[i])``.

    Knot times must start at 0 and end at 1.  Repeated times are collapsed,
    keeping the last value.
    """

    knot_times: np.ndarray
    knot_values: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.knot_times, dtype=float)
        v = np.asarray(self.knot_values, dtype=float)
        if v.ndim == 1:
            v = v[:, None]
        if t.ndim != 1 or t.shape[0] != v.shape[0] or t.shape[0] < 2:
            raise PathError("need at least two knots with matching values")
        if np.any(np.diff(t) < 0):
            raise PathError("knot times must be non-decreasing")
        if t[0] != 0.0 or t[-1] != 1.0:
            raise PathError(f"knot times must run from 0 to 1, got [{t[0]}, {t[-1]}]")
        keep = np.append(np.diff(t) > 0, True)
        t, v = t[keep], v[keep]
        if t.shape[0] < 2:
            raise PathError("path collapsed to a single knot")
        t.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "knot_times", t)
        object.__setattr__(self, "knot_values", v)

    @property
    def dim(self) -> int:
        return self.knot_values.shape[1]

    def __call__(self, t):
        return evaluate_at(self, t)

    def to_csv(self, path) -> None:
        write_paths_csv(path, [self])


def evaluate_at(path: PolylinePath, t):
    """Linear interpolation; ``t`` may be a scalar or an array of times in [0, 1]."""
    ts = np.asarray(t, dtype=float)
    if np.any(ts < 0) or np.any(ts > 1):
        raise PathError("evaluation time outside [0, 1]")
    flat = np.atleast_1d(ts)
    out = np.empty((flat.size, path.dim))
    for j in range(path.dim):
        out[:, j] = np.interp(flat, path.knot_times, path.knot_values[:, j])
    return out[0] if ts.ndim == 0 else out


def row_norms(X: np.ndarray) -> np.ndarray:
    """Euclidean norm of each row, rescaled first so tiny entries keep full precision."""
    X = np.atleast_2d(X)
    m = np.max(np.abs(X), axis=1)
    safe = np.where(m > 0, m, 1.0)
    return m * np.sqrt(np.sum((X / safe[:, None]) ** 2, axis=1))


def sup_distance(p: PolylinePath, q: PolylinePath) -> float:
    """``sup_t |p(t) - q(t)|``.

    The difference is affine between merged knots and the Euclidean norm of an
    affine map is convex, so the maximum over the merged knot set is the exact
    supremum.
    """
    if p.dim != q.dim:
        raise PathError(f"dimension mismatch: {p.dim} vs {q.dim}")
    ts = np.union1d(p.knot_times, q.knot_times)
    return float(np.max(row_norms(evaluate_at(p, ts) - evaluate_at(q, ts))))


def prefix_sup_norm(path: PolylinePath, t_max: float) -> float:
    """``sup_{t <= t_max} |path(t)|`` (exact, by the same convexity argument)."""
    ts = path.knot_times[path.knot_times <= t_max]
    ts = np.append(ts, t_max)
    return float(np.max(row_norms(evaluate_at(path, ts))))


def build_flight(arrivals: ArrivalSequence, directions) -> np.ndarray:
    """Positions ``S_0 = 0, S_k = S_{k-1} + eps_k (T_k - T_{k-1})``; shape ``(n+1, d)``."""
    if arrivals.clocked is None:
        raise PathError("arrivals must be clocked first")
    eps = np.atleast_2d(np.asarray(directions, dtype=float))
    T = arrivals.clocked
    if eps.shape[0] < len(T):
        raise PathError(f"need {len(T)} directions, got {eps.shape[0]}")
    steps = np.diff(np.concatenate([[0.0], T]))
    S = np.zeros((len(T) + 1, eps.shape[1]))
    S[1:] = np.cumsum(eps[: len(T)] * steps[:, None], axis=0)
    return S


def log_normalization(clock: ClockFunction, arrivals: ArrivalSequence, normalization: str) -> float:
    n = len(arrivals)
    if normalization == "gamma-exact":
        return float(clock.log_normalization(arrivals.log_clocked[-1]))
    if normalization == "n-power":
        if clock.kind != "power":
            raise PathError("n-power normalization is defined for power clocks only")
        return 0.5 * (2 * clock.alpha - 1) * np.log(n)
    raise PathError(f"unknown normalization {normalization!r}")


def rescaled_flight(
    arrivals: ArrivalSequence,
    directions,
    regime: ClockFunction,
    normalization: str = "gamma-exact",
) -> PolylinePath:
    """The broken line ``Z_n`` with knots ``(T_k/T_n, S_k/B_n)``.

    All ratios are formed from ``log T_k`` so that fast clocks do not overflow.
    """
    if regime.kind == "power" and not regime.alpha > 0.5:
        raise ClockDomainError("power regime needs alpha > 1/2")
    if arrivals.clock is not regime or arrivals.log_clocked is None:
        arrivals = apply_clock(regime, arrivals)
    n = len(arrivals)
    eps = np.atleast_2d(np.asarray(directions, dtype=float))[:n]
    if eps.shape[0] < n:
        raise PathError(f"need {n} directions, got {eps.shape[0]}")
    logT = arrivals.log_clocked
    logB = log_normalization(regime, arrivals, normalization)
    times = np.concatenate([[0.0], np.exp(logT - logT[-1])])
    scaled = np.concatenate([[0.0], np.exp(logT - logB)])
    values = np.zeros((n + 1, eps.shape[1]))
    values[1:] = np.cumsum(eps * np.diff(scaled)[:, None], axis=0)
    times[-1] = 1.0
    return PolylinePath(times, values)


def write_paths_csv(path, paths: Iterable[PolylinePath]) -> None:
    """One row per knot: ``path_id, t, x1 .. xd``."""
    paths = list(paths)
    d = paths[0].dim
    with open(Path(path), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["path_id", "t"] + [f"x{j + 1}" for j in range(d)])
        for i, p in enumerate(paths):
            for t, v in zip(p.knot_times, p.knot_values):
                w.writerow([i, repr(float(t))] + [repr(float(x)) for x in v])


def read_paths_csv(path) -> list[PolylinePath]:
    rows: dict[int, list] = {}
    with open(Path(path), newline="") as fh:
        r = csv.reader(fh)
        next(r)
        for row in r:
            rows.setdefault(int(row[0]), []).append([float(x) for x in row[1:]])
    out = []
    for key in sorted(rows):
        arr = np.array(rows[key])
        out.append(PolylinePath(arr[:, 0], arr[:, 1:]))
    return out


def sample_rescaled_flight(n: int, regime: ClockFunction, law, rng, normalization: str = "gamma-exact") -> PolylinePath:
    """Draw arrivals, then ``n`` directions, from one stream and build ``Z_n``."""
    rng = as_stream(rng)
    arrivals = sample_arrivals(n, rng)
    return rescaled_flight(arrivals, law.sample(n, rng), regime, normalization)
