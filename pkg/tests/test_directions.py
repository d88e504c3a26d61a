import numpy as np
import pytest
from hypothesis import given, strategies as st

from flightlab.directions import DirectionLaw, DirectionLawError, covariance_of, psd_sqrt, sample_direction
from flightlab.rng import RngStream
from flightlab.stats import empirical_cov


def test_circle_of_dimension_one_is_plus_minus_one():
    x = DirectionLaw.uniform(1).sample(100_000, RngStream(1, 0))[:, 0]
    assert set(np.unique(x)) == {-1.0, 1.0}
    assert 0.49 <= np.mean(x > 0) <= 0.51


def test_atoms_support():
    law = DirectionLaw.atoms([[1, 0], [-1, 0]], [0.5, 0.5])
    x = law.sample(1000, 2)
    assert np.all(np.abs(x[:, 0]) == 1) and np.all(x[:, 1] == 0)
    assert np.allclose(covariance_of(law), [[1, 0], [0, 0]])


def test_uniform_mean_vanishes_in_three_dimensions():
    x = DirectionLaw.uniform(3).sample(1_000_000, RngStream(2, 0))
    assert np.linalg.norm(x.mean(axis=0)) < 0.005


def test_uniform_covariance():
    assert np.allclose(covariance_of(DirectionLaw.uniform(2)), np.eye(2) / 2)
    x = DirectionLaw.uniform(3).sample(1_000_000, RngStream(3, 0))
    assert np.max(np.abs(empirical_cov(x) - np.eye(3) / 3)) < 0.003


@given(st.integers(1, 6), st.integers(0, 2**30))
def test_samples_have_unit_norm(d, seed):
    x = DirectionLaw.uniform(d).sample(200, seed)
    assert np.allclose(np.linalg.norm(x, axis=1), 1.0, atol=1e-12)
    assert sample_direction(DirectionLaw.uniform(d), seed).shape == (d,)


@given(st.integers(1, 5))
def test_covariance_has_unit_trace(d):
    K = covariance_of(DirectionLaw.uniform(d))
    assert np.trace(K) == pytest.approx(1.0)
    assert np.all(np.linalg.eigvalsh(K) >= 0)


@pytest.mark.parametrize("points,weights", [
    ([[1, 0], [0, 1]], [0.5, 0.5]),          # mean is not zero
    ([[1, 0], [-1, 0]], [0.6, 0.6]),         # weights do not sum to one
    ([[2, 0], [-2, 0]], [0.5, 0.5]),         # not on the sphere
])
def test_invalid_atoms_rejected(points, weights):
    with pytest.raises(DirectionLawError):
        DirectionLaw.atoms(points, weights)


def test_atoms_from_config_dict():
    spec = {"kind": "atoms", "points": [[0, 1], [0, -1]], "weights": [0.5, 0.5]}
    law = DirectionLaw.from_dict(spec)
    assert np.allclose(law.covariance(), [[0, 0], [0, 1]])
    assert DirectionLaw.from_dict(law.to_dict()).to_dict() == law.to_dict()


def test_psd_sqrt_of_degenerate_matrix():
    K = np.array([[1.0, 0.0], [0.0, 0.0]])
    R = psd_sqrt(K)
    assert np.allclose(R @ R, K)
