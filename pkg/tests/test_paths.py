import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from flightlab.clock import ArrivalSequence, ClockDomainError, ClockFunction, apply_clock, sample_arrivals
from flightlab.directions import DirectionLaw
from flightlab.paths import (
    PathError,
    PolylinePath,
    build_flight,
    evaluate_at,
    prefix_sup_norm,
    read_paths_csv,
    rescaled_flight,
    row_norms,
    sample_rescaled_flight,
    sup_distance,
    write_paths_csv,
)


def _clocked(T):
    T = np.asarray(T, dtype=float)
    seq = ArrivalSequence(np.diff(np.concatenate([[0.0], T])), T)
    return apply_clock(ClockFunction.power(1.0), seq)


def random_path(rng, knots=8, d=2):
    t = np.concatenate([[0.0], np.sort(rng.uniform(size=knots - 2)), [1.0]])
    return PolylinePath(t, rng.normal(size=(knots, d)))


def test_single_segment_flight():
    S = build_flight(_clocked([2.0]), [[1.0, 0.0]])
    assert np.allclose(S[-1], [2.0, 0.0])


def test_two_segment_flight():
    S = build_flight(_clocked([1.0, 3.0]), [[1.0], [-1.0]])
    assert np.allclose(S[-1], [-1.0])


def test_flight_needs_enough_directions():
    with pytest.raises(PathError):
        build_flight(_clocked([1.0, 2.0]), [[1.0]])


@given(st.integers(1, 60), st.integers(0, 2**20))
def test_segment_lengths_equal_clock_gaps(n, seed):
    arr = apply_clock(ClockFunction.power(1.5), sample_arrivals(n, seed))
    eps = DirectionLaw.uniform(3).sample(n, seed + 1)
    S = build_flight(arr, eps)
    gaps = np.diff(np.concatenate([[0.0], arr.clocked]))
    assert np.allclose(np.linalg.norm(np.diff(S, axis=0), axis=1), gaps)


def test_one_step_rescaled_path():
    arr = sample_arrivals(1, 4)
    eps = np.array([[0.6, 0.8]])
    for clock in (ClockFunction.power(1.0), ClockFunction.exponential(), ClockFunction.superexponential()):
        p = rescaled_flight(arr, eps, clock)
        assert np.allclose(p.knot_times, [0, 1])
        assert np.allclose(np.linalg.norm(p(1.0)), math.exp(clock.log(arr.arrivals)[0]) / math.exp(
            clock.log_normalization(clock.log(arr.arrivals)[0])))


def test_exponential_knot_times():
    arr = sample_arrivals(20, 5)
    p = rescaled_flight(arr, DirectionLaw.uniform(2).sample(20, 6), ClockFunction.exponential(2.0))
    want = np.exp(-2.0 * (arr.arrivals[-1] - arr.arrivals))
    assert np.allclose(p.knot_times[1:], want, rtol=1e-12)


def test_normalizations_agree_at_large_n():
    arr = sample_arrivals(10_000, 8)
    eps = DirectionLaw.uniform(2).sample(10_000, 9)
    a = rescaled_flight(arr, eps, ClockFunction.power(1.0), "gamma-exact")(1.0)
    b = rescaled_flight(arr, eps, ClockFunction.power(1.0), "n-power")(1.0)
    assert np.linalg.norm(a - b) / np.linalg.norm(b) < 0.02


def test_n_power_needs_power_clock():
    with pytest.raises(PathError):
        rescaled_flight(sample_arrivals(3, 1), np.ones((3, 1)), ClockFunction.exponential(), "n-power")


def test_power_regime_domain():
    clock = ClockFunction.power(1.0)
    object.__setattr__(clock, "alpha", 0.4)
    with pytest.raises(ClockDomainError):
        rescaled_flight(sample_arrivals(3, 1), np.ones((3, 1)), clock)


@given(st.integers(1, 80), st.integers(0, 2**20),
       st.sampled_from([ClockFunction.power(0.8), ClockFunction.exponential(), ClockFunction.superexponential()]))
def test_rescaled_path_endpoints(n, seed, clock):
    arr = apply_clock(clock, sample_arrivals(n, seed))
    eps = DirectionLaw.uniform(2).sample(n, seed + 7)
    p = rescaled_flight(arr, eps, clock)
    assert np.allclose(p(0.0), 0.0)
    S = build_flight(arr, eps) if np.all(np.isfinite(arr.clocked)) and arr.clocked[-1] < 1e300 else None
    if S is not None:
        B = math.exp(clock.log_normalization(arr.log_clocked[-1]))
        assert np.allclose(p(1.0), S[-1] / B, rtol=1e-9, atol=1e-12)


@given(st.integers(2, 100), st.integers(0, 2**20))
def test_superexponential_prefix_bound(n, seed):
    clock = ClockFunction.superexponential()
    arr = apply_clock(clock, sample_arrivals(n, seed))
    p = rescaled_flight(arr, DirectionLaw.uniform(2).sample(n, seed + 1), clock)
    tau = math.exp(arr.log_clocked[-2] - arr.log_clocked[-1])
    if tau > 1e-300:
        assert prefix_sup_norm(p, tau) <= tau * (1 + 1e-12)


def test_evaluate_midpoint_and_knots():
    p = PolylinePath(np.array([0.0, 1.0]), np.array([[0.0, 0.0], [2.0, 4.0]]))
    assert np.allclose(evaluate_at(p, 0.5), [1.0, 2.0])
    rng = np.random.default_rng(0)
    q = random_path(rng)
    for t, v in zip(q.knot_times, q.knot_values):
        assert np.array_equal(evaluate_at(q, t), v)


def test_evaluate_outside_unit_interval():
    p = PolylinePath(np.array([0.0, 1.0]), np.array([0.0, 1.0]))
    with pytest.raises(PathError):
        evaluate_at(p, 1.5)


def _two_pointer(path, ts):
    order = np.argsort(ts)
    out = np.empty((len(ts), path.dim))
    j = 0
    for i in order:
        t = ts[i]
        while j + 1 < len(path.knot_times) - 1 and path.knot_times[j + 1] <= t:
            j += 1
        t0, t1 = path.knot_times[j], path.knot_times[j + 1]
        w = (t - t0) / (t1 - t0)
        out[i] = (1 - w) * path.knot_values[j] + w * path.knot_values[j + 1]
    return out


def test_evaluate_against_two_pointer():
    rng = np.random.default_rng(1)
    p = random_path(rng, knots=40, d=3)
    ts = rng.uniform(size=1000)
    assert np.allclose(evaluate_at(p, ts), _two_pointer(p, ts), atol=1e-14)


def test_ties_collapse_keeping_last():
    p = PolylinePath(np.array([0.0, 0.5, 0.5, 1.0]), np.array([0.0, 1.0, 2.0, 3.0]))
    assert np.allclose(p.knot_times, [0.0, 0.5, 1.0])
    assert p(0.5)[0] == 2.0


@pytest.mark.parametrize("t", [[0.1, 1.0], [0.0, 0.5], [0.0, 0.7, 0.3, 1.0]])
def test_bad_knots_rejected(t):
    with pytest.raises(PathError):
        PolylinePath(np.array(t), np.zeros(len(t)))


def test_sup_distance_simple_cases():
    rng = np.random.default_rng(2)
    p = random_path(rng)
    assert sup_distance(p, p) == 0.0
    zero = PolylinePath(np.array([0.0, 1.0]), np.zeros((2, 2)))
    line = PolylinePath(np.array([0.0, 1.0]), np.array([[0.0, 0.0], [3.0, 4.0]]))
    assert sup_distance(zero, line) == pytest.approx(5.0)
    with pytest.raises(PathError):
        sup_distance(zero, PolylinePath(np.array([0.0, 1.0]), np.zeros((2, 3))))


@given(st.integers(0, 2**30))
def test_sup_distance_against_dense_grid(seed):
    rng = np.random.default_rng(seed)
    p, q = random_path(rng, 6), random_path(rng, 9)
    grid = np.union1d(np.linspace(0, 1, 10_001), np.union1d(p.knot_times, q.knot_times))
    dense = np.max(np.linalg.norm(evaluate_at(p, grid) - evaluate_at(q, grid), axis=1))
    assert abs(sup_distance(p, q) - dense) < 1e-9


@given(st.integers(0, 2**30))
def test_sup_distance_metric_properties(seed):
    rng = np.random.default_rng(seed)
    p, q, r = random_path(rng), random_path(rng), random_path(rng)
    assert sup_distance(p, q) == pytest.approx(sup_distance(q, p))
    assert sup_distance(p, r) <= sup_distance(p, q) + sup_distance(q, r) + 1e-12


def test_row_norms_keep_precision_for_tiny_values():
    x = np.array([[3e-160, 4e-160]])
    assert row_norms(x)[0] == pytest.approx(5e-160, rel=1e-15)


def test_csv_round_trip(tmp_path):
    rng = np.random.default_rng(3)
    paths = [random_path(rng, 5, 2), random_path(rng, 7, 2)]
    f = tmp_path / "paths.csv"
    write_paths_csv(f, paths)
    back = read_paths_csv(f)
    assert len(back) == 2
    for a, b in zip(paths, back):
        assert np.allclose(a.knot_times, b.knot_times) and np.allclose(a.knot_values, b.knot_values)
    assert f.read_text().splitlines()[0] == "path_id,t,x1,x2"


def test_sample_rescaled_flight_is_deterministic():
    a = sample_rescaled_flight(100, ClockFunction.power(1.0), DirectionLaw.uniform(2), 5)
    b = sample_rescaled_flight(100, ClockFunction.power(1.0), DirectionLaw.uniform(2), 5)
    assert np.array_equal(a.knot_values, b.knot_values)
