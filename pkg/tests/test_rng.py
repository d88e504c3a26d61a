import numpy as np
from hypothesis import given, strategies as st

from flightlab.rng import RNG_ALGORITHM, RngStream, as_stream


def test_same_seed_and_index_repeat_exactly():
    a = RngStream(7, 3).exponential(1000)
    b = RngStream(7, 3).exponential(1000)
    assert np.array_equal(a, b)


def test_distinct_indices_are_uncorrelated():
    a = RngStream(7, 0).normal(100_000)
    b = RngStream(7, 1).normal(100_000)
    assert not np.array_equal(a, b)
    assert abs(np.corrcoef(a, b)[0, 1]) < 4 / np.sqrt(100_000)


@given(st.integers(0, 2**64 - 1), st.integers(0, 10**6))
def test_open_uniform_never_hits_endpoints(seed, index):
    u = RngStream(seed, index).open_uniform(2000)
    assert np.all(u > 0) and np.all(u < 1)
    assert np.all(RngStream(seed, index).exponential(50) > 0)


def test_negative_index_rejected():
    import pytest

    with pytest.raises(ValueError):
        RngStream(1, -1)


def test_as_stream_accepts_ints_and_streams():
    s = RngStream(5, 2)
    assert as_stream(s) is s
    assert np.array_equal(as_stream(5).uniform(4), RngStream(5, 0).uniform(4))
    assert "PCG64" in RNG_ALGORITHM
