import math

import numpy as np
import pytest
import scipy.sparse as sp
from scipy import stats as sst

from flightlab.chain import ChainConfig, CoefficientField, RadialFamily, constant_field, one_step_density, preset
from flightlab.edgeworth import (
    ConvergenceError,
    Grid1D,
    GridError,
    apply_generator,
    chain_density_grid,
    correction_operator,
    expansion_error_scan,
    generator_matrix,
    parametrix_correction,
    pde_reference_density,
    quadrature_nodes,
    time_space_convolution,
)

GRID = Grid1D(-8.0, 8.0, 641)
INNER = slice(2, -2)


def _field(a, b):
    return CoefficientField(
        1,
        lambda X: np.full_like(np.asarray(X, float), b),
        lambda X: np.full(np.asarray(X).shape + (1,), math.sqrt(a)),
        "stub",
        0.0,
    )


# grids and generators -------------------------------------------------------


def test_grid_validation():
    with pytest.raises(GridError):
        Grid1D(0, 1, 2)
    with pytest.raises(GridError):
        GRID.index_of(0.0123)
    assert GRID.nodes[GRID.index_of(0.0)] == 0.0
    assert GRID.refined().spacing == pytest.approx(GRID.spacing / 2)


def test_generator_on_polynomials():
    z = GRID.nodes
    assert np.allclose(apply_generator(_field(2.0, 0.0), z**2, GRID)[INNER], 2.0)
    assert np.allclose(apply_generator(_field(0.0, 3.0), z, GRID)[INNER], 3.0)


def test_generator_matches_analytic_derivatives():
    z = GRID.nodes
    f = np.exp(-z * z)
    cf = preset("sine-sigma")
    exact = 0.5 * cf.a_1d(z) * (4 * z * z - 2) * f
    assert np.abs(apply_generator(cf, f, GRID) - exact)[INNER].max() < 1e-6


def test_generator_needs_enough_nodes():
    with pytest.raises(GridError):
        apply_generator(preset("unit"), np.zeros(5), Grid1D(-1, 1, 5))
    with pytest.raises(GridError):
        apply_generator(preset("unit"), np.zeros(7), GRID)


# reference transition density ---------------------------------------------------


def test_heat_kernel_at_origin():
    p = pde_reference_density(preset("unit"), 0.0, GRID, 4)
    assert p.final[GRID.index_of(0.0)] == pytest.approx(0.398942, abs=1e-4)
    assert p.mass_tol < 1e-6


def test_constant_drift_moves_the_mean():
    p = pde_reference_density(constant_field([0.3], [[1.0]]), 0.0, GRID, 2)
    assert GRID.mass(GRID.nodes * p.final) == pytest.approx(0.3, abs=1e-3)
    assert np.allclose(p.at(0.5), p.values[0]) and p.at(0.25).shape == (GRID.m,)


def test_reference_matches_gaussian_for_constant_coefficients():
    p = pde_reference_density(constant_field([0.0], [[1.3]]), 0.0, GRID, 1).final
    assert np.abs(p - sst.norm.pdf(GRID.nodes, scale=1.3)).max() < 1e-6


# chain density on the grid ------------------------------------------------------


def test_one_composition_is_the_one_step_density():
    cf = preset("sine-sigma")
    for kind in ("example1", "example2"):
        cfg = ChainConfig.with_steps(cf, RadialFamily(kind, 1), 1)
        pe = chain_density_grid(cfg, 1, 0.0, GRID).values
        direct = one_step_density([0.0], GRID.nodes[:, None], cfg)
        assert np.allclose(pe, direct, rtol=1e-12, atol=1e-300)


def test_constant_chain_is_gaussian():
    cfg = ChainConfig.with_steps(preset("unit"), RadialFamily.example2(1), 16)
    pe = chain_density_grid(cfg, 16, 0.0, GRID)
    assert np.abs(pe.values - sst.norm.pdf(GRID.nodes)).max() < 1e-5
    assert pe.lost_mass < 1e-8


def test_narrow_grid_is_rejected():
    cfg = ChainConfig.with_steps(preset("unit"), RadialFamily.example2(1), 16)
    with pytest.raises(GridError):
        chain_density_grid(cfg, 16, 0.0, Grid1D(-2, 2, 161))


# first-order correction -----------------------------------------------------------


def test_quadrature_nodes_integrate_smooth_functions():
    s, w = quadrature_nodes(32)
    assert np.all((s > 0) & (s < 1))
    assert w.sum() == pytest.approx(1.0, abs=1e-12)
    assert (w * s**3).sum() == pytest.approx(0.25, abs=1e-12)


@pytest.mark.parametrize("freeze", ["point", "start"])
def test_correction_vanishes_for_constant_coefficients(freeze):
    cf = constant_field([0.2], [[1.1]])
    M = correction_operator(cf, GRID, freeze)
    L = generator_matrix(cf, GRID)
    assert abs(M).max() <= 1e-13 * abs(L @ L).max()  # only rounding survives
    assert np.abs(parametrix_correction(cf, 0.0, GRID, freeze=freeze, quad_nodes=8)).max() < 1e-8


def test_unknown_freeze_mode():
    with pytest.raises(ValueError):
        correction_operator(preset("sine-sigma"), GRID, "middle")


def test_convolution_is_linear_in_the_operator():
    cf = preset("sine-sigma")
    field_ = pde_reference_density(cf, 0.0, GRID, 1)
    M1 = correction_operator(cf, GRID, "point")
    M2 = sp.diags(np.cos(GRID.nodes)) @ M1
    lhs = time_space_convolution(field_, M1 + 2 * M2, 16)
    rhs = time_space_convolution(field_, M1, 16) + 2 * time_space_convolution(field_, M2, 16)
    assert np.abs(lhs - rhs).max() <= 1e-10 * np.abs(lhs).max()


def test_correction_carries_no_mass():
    corr = parametrix_correction(preset("sine-sigma"), 0.0, GRID)
    assert abs(GRID.mass(corr)) < 1e-6 * np.abs(corr).max()


def test_correction_self_convergence():
    cf = preset("sine-sigma")
    base = parametrix_correction(cf, 0.0, GRID, quad_nodes=64)
    more_nodes = parametrix_correction(cf, 0.0, GRID, quad_nodes=128)
    finer = parametrix_correction(cf, 0.0, GRID.refined(), quad_nodes=64)[::2]
    scale = np.abs(base).max()
    assert np.abs(more_nodes - base).max() <= 0.02 * scale
    assert np.abs(finer - base).max() <= 0.02 * scale


def test_unconverged_quadrature_is_reported():
    with pytest.raises(ConvergenceError):
        parametrix_correction(preset("sine-sigma"), 0.0, GRID, quad_nodes=4, rtol=1e-12)


def test_short_scan_shows_second_order_after_correction():
    res = expansion_error_scan(preset("sine-sigma"), 0.0, [16, 32])
    row = res.rows[0]
    assert row.ratio < 0.3 and 0.4 < row.ratio_no_corr < 0.6
    assert res.grid_error < res.rows[-1].err
