import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import stats as sst

from flightlab.rng import RngStream
from flightlab.stats import (
    SampleBatch,
    StatsError,
    chi_square_gof,
    empirical_cov,
    ks_2samp,
    ks_test,
    mn_batch,
    mn_statistic,
    normal_cdf,
    uniform_order_deviation,
)

UNIFORM = lambda x: np.clip(x, 0, 1)


def test_single_point_sample():
    assert ks_test([0.5], UNIFORM).D == pytest.approx(0.5)


@given(st.integers(1, 500))
def test_quantile_sample_is_close(n):
    x = np.arange(1, n + 1) / (n + 1)
    assert ks_test(x, UNIFORM).D <= 1 / (n + 1) + 1e-15


@given(st.lists(st.floats(-5, 5), min_size=1, max_size=200))
def test_ks_ranges(values):
    r = ks_test(values, sst.norm.cdf)
    assert 0 <= r.D <= 1 and 0 <= r.p <= 1


def test_ks_matches_scipy():
    x = np.random.default_rng(1).normal(size=3000)
    ours = ks_test(x, sst.norm.cdf)
    ref = sst.kstest(x, "norm", method="asymp")
    assert ours.D == pytest.approx(ref.statistic, rel=1e-12)
    assert ours.p == pytest.approx(ref.pvalue, rel=1e-6)
    y = np.random.default_rng(2).normal(size=2000)
    ref2 = sst.ks_2samp(x, y, method="asymp")
    assert ks_2samp(x, y).D == pytest.approx(ref2.statistic, rel=1e-12)


def test_ks_calibration():
    fails = sum(ks_test(RngStream(100, s).normal(10_000), normal_cdf(1.0)).p <= 0.01 for s in range(20))
    assert fails <= 1


def test_ks_rejects_bad_input():
    with pytest.raises(StatsError):
        ks_test([], UNIFORM)
    with pytest.raises(StatsError):
        ks_test([0.1, np.nan], UNIFORM)
    with pytest.raises(StatsError):
        ks_test([0.1, 0.2], lambda x: 2 * x + 1)  # not a distribution function


def test_sample_batch_validation():
    assert SampleBatch([1, 2]).values.dtype == float
    with pytest.raises(StatsError):
        SampleBatch([])


def test_empirical_cov_cases():
    assert np.allclose(empirical_cov(np.ones((5, 2))), 0)
    v = np.array([1.0, 2.0])
    assert np.allclose(empirical_cov(np.array([v, -v])), 2 * np.outer(v, v))
    with pytest.raises(StatsError):
        empirical_cov(np.ones((1, 2)))


def test_mn_for_one_arrival_is_zero():
    assert mn_statistic(1, 3) == 0.0


@given(st.integers(1, 300), st.integers(0, 2**20))
def test_mn_in_unit_interval(n, seed):
    m = mn_statistic(n, seed)
    assert 0 <= m < 1


def test_mn_law_equals_order_statistics():
    a = mn_batch(100, 10_000, RngStream(21, 0))
    b = uniform_order_deviation(100, 10_000, RngStream(21, 1))
    assert ks_2samp(a, b).p > 0.01


def test_mn_median_scaling():
    meds = [np.median(mn_batch(n, 1000, RngStream(22, i))) for i, n in enumerate([100, 1000, 10_000])]
    assert meds[0] > meds[1] > meds[2]
    assert 5 <= meds[0] / meds[2] <= 20


def test_chi_square_pools_small_bins():
    stat, p, dof = chi_square_gof([10, 10, 1, 0], [10, 10, 0.5, 0.5])
    assert dof == 2 and p > 0.5
