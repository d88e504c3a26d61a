"""One-dimensional check of the first-order density expansion of the Euler-type chain.

Everything lives on a uniform grid.  The diffusion's transition density comes
from the method-of-lines semigroup ``exp(t L_h)`` of a fourth-order
finite-difference generator ``L_h``; the same matrix gives the forward density
``p(t, x0, .)`` (columns) and the backward function ``p(t, ., y)`` (rows).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import expm_multiply
from scipy.special import roots_legendre

from .chain import ChainConfig, CoefficientField, RadialFamily, innovation_density


class GridError(ValueError):
    pass


class ConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class Grid1D:
    lo: float
    hi: float
    m: int

    def __post_init__(self):
        if self.m < 3 or not self.hi > self.lo:
            raise GridError("need m >= 3 and hi > lo")

    @property
    def spacing(self) -> float:
        return (self.hi - self.lo) / (self.m - 1)

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.m)

    @property
    def weights(self) -> np.ndarray:
        w = np.full(self.m, self.spacing)
        w[[0, -1]] *= 0.5
        return w

    def index_of(self, x: float) -> int:
        i = int(round((x - self.lo) / self.spacing))
        if not 0 <= i < self.m or abs(self.nodes[i] - x) > 1e-9 * self.spacing:
            raise GridError(f"x0 = {x} is not a grid node")
        return i

    def refined(self) -> "Grid1D":
        return Grid1D(self.lo, self.hi, 2 * self.m - 1)

    def mass(self, values) -> float:
        return float(np.dot(values, self.weights))


def _fd_matrices(grid: Grid1D):
    h = grid.spacing
    m = grid.m
    D1 = sp.diags([1 / 12, -8 / 12, 8 / 12, -1 / 12], [-2, -1, 1, 2], shape=(m, m)) / h
    D2 = sp.diags([-1 / 12, 16 / 12, -30 / 12, 16 / 12, -1 / 12], [-2, -1, 0, 1, 2], shape=(m, m)) / h**2
    return D1.tocsr(), D2.tocsr()


def generator_matrix(coeffs: CoefficientField, grid: Grid1D, frozen_at: Optional[float] = None) -> sp.csr_matrix:
    """Backward generator ``(1/2) a D^2 + b D`` acting on grid functions.

    With ``frozen_at`` the coefficients are the constants ``a(frozen_at)``, ``b(frozen_at)``.
    """
    if coeffs.d != 1:
        raise GridError("grid generators are one-dimensional")
    if grid.m < 7:
        raise GridError("grid too coarse for fourth-order differences (m < 7)")
    D1, D2 = _fd_matrices(grid)
    z = grid.nodes if frozen_at is None else np.full(grid.m, float(frozen_at))
    a, b = coeffs.a_1d(z), coeffs.b_1d(z)
    return (sp.diags(0.5 * a) @ D2 + sp.diags(b) @ D1).tocsr()


def apply_generator(coeffs: CoefficientField, fvals, grid: Grid1D, frozen_at: Optional[float] = None) -> np.ndarray:
    """``L f`` on the grid (centered fourth-order differences; the two edge nodes
    on each side use truncated stencils and are not accurate)."""
    f = np.asarray(fvals, dtype=float)
    if f.shape != (grid.m,):
        raise GridError("function values must be given on the full grid")
    return generator_matrix(coeffs, grid, frozen_at) @ f


def correction_operator(coeffs: CoefficientField, grid: Grid1D, freeze: str = "point", x0: float = 0.0) -> sp.csr_matrix:
    """Grid version of ``L_*^2 - L^2``.

    ``freeze="point"`` freezes the coefficients at the node where the result is
    evaluated; ``freeze="start"`` freezes them at ``x0``.  Both squares are
    built from the same difference matrices, so the operator vanishes
    identically when the coefficients are constant.
    """
    D1, D2 = _fd_matrices(grid)
    L = generator_matrix(coeffs, grid)
    if freeze == "point":
        a, b = coeffs.a_1d(grid.nodes), coeffs.b_1d(grid.nodes)
        L_star_sq = (
            sp.diags(0.25 * a * a) @ (D2 @ D2)
            + sp.diags(0.5 * a * b) @ (D1 @ D2 + D2 @ D1)
            + sp.diags(b * b) @ (D1 @ D1)
        )
    elif freeze == "start":
        F = generator_matrix(coeffs, grid, frozen_at=x0)
        L_star_sq = F @ F
    else:
        raise ValueError(f"freeze must be 'point' or 'start', got {freeze!r}")
    return (L_star_sq - L @ L).tocsr()


class Semigroup:
    """``exp(t L)`` for a fixed grid generator, via eigendecomposition when it is
    well conditioned and ``expm_multiply`` otherwise."""

    def __init__(self, L: sp.spmatrix, max_condition: float = 1e8):
        self.L = sp.csr_matrix(L)
        dense = self.L.toarray()
        lam, V = np.linalg.eig(dense)
        self.condition = float(np.linalg.cond(V))
        self.eigen = self.condition < max_condition and np.max(lam.real) < 1e-8
        if self.eigen:
            self.lam, self.V, self.Vinv = lam, V, np.linalg.inv(V)
            recon = np.abs((V * lam) @ self.Vinv - dense).max()
            if recon > 1e-6 * np.abs(dense).max():
                self.eigen = False

    def forward(self, v: np.ndarray, t: float) -> np.ndarray:
        """``exp(t L)^T v``: evolves a vector of masses (weight times density) for time ``t``."""
        if t == 0:
            return np.array(v, dtype=float)
        if self.eigen:
            c = np.exp(self.lam * t) * (self.V.T @ v)
            return (self.Vinv.T @ c).real
        return expm_multiply(self.L.T * t, v)

    def backward(self, f: np.ndarray, t: float) -> np.ndarray:
        """``exp(t L) f``: ``x -> E_x f(X_t)``."""
        if t == 0:
            return np.array(f, dtype=float)
        if self.eigen:
            return (self.V @ (np.exp(self.lam * t) * (self.Vinv @ f))).real
        return expm_multiply(self.L * t, f)


@dataclass
class DensityField:
    """Transition densities ``p(t, x0, .)`` on a grid at increasing times."""

    grid: Grid1D
    x0: float
    times: np.ndarray
    values: np.ndarray
    mass_tol: float
    semigroup: Semigroup = field(repr=False)
    coefficients: CoefficientField = field(repr=False)

    def at(self, t: float) -> np.ndarray:
        """Density at any ``t`` in ``(0, 1]`` (computed from the semigroup)."""
        hit = np.flatnonzero(np.isclose(self.times, t, rtol=0, atol=1e-15))
        if hit.size:
            return self.values[hit[0]]
        return self.semigroup.forward(self._unit_mass(), t) / self.grid.weights

    def _unit_mass(self) -> np.ndarray:
        e = np.zeros(self.grid.m)
        e[self.grid.index_of(self.x0)] = 1.0
        return e

    @property
    def final(self) -> np.ndarray:
        return self.values[-1]


def pde_reference_density(coeffs: CoefficientField, x0: float, grid: Grid1D, time_steps: int = 64) -> DensityField:
    """Forward Kolmogorov solution from a point mass at ``x0`` at times ``k/time_steps``."""
    coeffs.check(grid.nodes.reshape(-1, 1))
    sg = Semigroup(generator_matrix(coeffs, grid))
    times = np.arange(1, time_steps + 1) / time_steps
    field_ = DensityField(grid, float(x0), times, np.empty((0, grid.m)), 0.0, sg, coeffs)
    mass = field_._unit_mass()
    vals = np.array([sg.forward(mass, t) for t in times]) / grid.weights
    masses = vals @ grid.weights
    drift = float(np.max(np.abs(masses - 1.0)))
    if not np.all(np.isfinite(vals)) or drift > 1e-3:
        raise ConvergenceError(
            f"unstable Kolmogorov solve (mass drift {drift:.2e}, m={grid.m}, "
            f"spacing={grid.spacing:.3g}, eigen-condition={sg.condition:.2e})"
        )
    field_.values = vals
    field_.mass_tol = drift
    return field_


def one_step_kernel(config: ChainConfig, grid: Grid1D) -> np.ndarray:
    """``K[j, i] = w_j p_E(1, z_j, y_i)``: trapezoid-weighted one-step transition matrix."""
    if config.d != 1:
        raise GridError("grid kernels are one-dimensional")
    z = grid.nodes
    cf, D = config.coefficients, config.delta
    a, b = cf.a_1d(z), cf.b_1d(z)
    K = np.empty((grid.m, grid.m))
    for j in range(grid.m):
        u = (z - z[j] - D * b[j]) / math.sqrt(D)
        K[j] = D**-0.5 * innovation_density(u[:, None], np.array([[a[j]]]), config.radial)
    return K * grid.weights[:, None]


@dataclass
class ChainDensity:
    values: np.ndarray
    lost_mass: float


def chain_density_grid(config: ChainConfig, n: int, x0: float, grid: Grid1D, max_step_loss: float = 1e-8) -> ChainDensity:
    """``p_E(n, x0, .)`` by ``n``-fold discrete Chapman-Kolmogorov composition."""
    if config.d != 1:
        raise GridError("grid composition is one-dimensional")
    K = one_step_kernel(config, grid)
    i0 = grid.index_of(x0)
    p = K[i0] / grid.weights[i0]
    lost = 1.0 - grid.mass(p)
    for _ in range(n - 1):
        mass_before = grid.mass(p)
        p = p @ K
        step_loss = mass_before - grid.mass(p)
        if step_loss > max_step_loss:
            raise GridError(f"grid truncates {step_loss:.2e} of the mass in one step; widen it")
        lost = 1.0 - grid.mass(p)
    return ChainDensity(p, max(lost, 0.0))


def quadrature_nodes(count: int):
    """Time nodes on (0, 1) clustered at both ends: ``s = sin^2(pi u / 2)`` with Gauss-Legendre ``u``."""
    u, w = roots_legendre(count)
    u = 0.5 * (u + 1)
    w = 0.5 * w
    s = np.sin(0.5 * np.pi * u) ** 2
    return s, w * 0.5 * np.pi * np.sin(np.pi * u)


def time_space_convolution(field_: DensityField, operator: sp.spmatrix, nodes: int) -> np.ndarray:
    """``y -> int_0^1 ds int p(s, x0, z) [M p(1-s, ., y)](z) dz`` for a grid operator ``M``.

    With ``g = p(1-s, ., y)`` the inner integral is ``sum_k w_k phi_k (M g)_k``,
    i.e. the masses ``M^T (w phi)`` pushed forward for time ``1-s``.
    """
    s_nodes, s_weights = quadrature_nodes(nodes)
    w = field_.grid.weights
    sg = field_.semigroup
    mass = field_._unit_mass()
    MT = sp.csr_matrix(operator).T
    out = np.zeros(field_.grid.m)
    for s, ws in zip(s_nodes, s_weights):
        phi = sg.forward(mass, s) / w
        out += ws * sg.forward(MT @ (w * phi), 1.0 - s)
    return out / w


def parametrix_correction(
    coeffs: CoefficientField,
    x0: float,
    grid: Grid1D,
    p_field: Optional[DensityField] = None,
    quad_nodes: int = 64,
    freeze: str = "point",
    rtol: float = 1e-3,
) -> np.ndarray:
    """``(p (x) (L_*^2 - L^2) p)(1, x0, .)`` on the grid.

    The s-quadrature is repeated with half the nodes; a relative discrepancy
    above ``rtol`` raises :class:`ConvergenceError`.
    """
    if p_field is None:
        p_field = pde_reference_density(coeffs, x0, grid)
    M = correction_operator(coeffs, grid, freeze, x0)
    full = time_space_convolution(p_field, M, quad_nodes)
    half = time_space_convolution(p_field, M, max(quad_nodes // 2, 2))
    scale = max(np.abs(full).max(), 1e-300)
    gap = np.abs(full - half).max()
    if gap > rtol * scale and gap > 1e-10:
        raise ConvergenceError(f"s-quadrature not converged: change {gap:.2e} between {quad_nodes // 2} and {quad_nodes} nodes")
    return full


@dataclass
class ScanRow:
    n: int
    err: float
    err_no_corr: float
    ratio: Optional[float] = None
    ratio_no_corr: Optional[float] = None


@dataclass
class ScanResult:
    rows: list
    grid_error: float
    freeze: str
    window: tuple
    correction_norm: float
    lost_mass: float

    def as_table(self) -> list[dict]:
        return [vars(r) for r in self.rows]


def estimate_grid_error(coeffs: CoefficientField, x0: float, grid: Grid1D, coarse: Optional[np.ndarray] = None) -> float:
    """Twice the change in ``p(1, x0, .)`` when the grid spacing is halved (max over shared nodes)."""
    if coarse is None:
        coarse = pde_reference_density(coeffs, x0, grid, 1).final
    fine = pde_reference_density(coeffs, x0, grid.refined(), 1).final[::2]
    return 2.0 * float(np.abs(coarse - fine).max())


def expansion_error_scan(
    coeffs: CoefficientField,
    x0: float,
    n_list: Sequence[int],
    grid: Optional[Grid1D] = None,
    quad_nodes: int = 64,
    freeze: str = "point",
    half_width: float = 6.0,
    radial: Optional[RadialFamily] = None,
) -> ScanResult:
    """``err(n) = max_y |p_E(n) - p - correction/(2n)|`` and the uncorrected error on ``|y - x0| <= half_width``."""
    grid = grid or Grid1D(-8.0, 8.0, 641)
    radial = radial or RadialFamily.example2(1)
    field_ = pde_reference_density(coeffs, x0, grid)
    p1 = field_.final
    corr = parametrix_correction(coeffs, x0, grid, field_, quad_nodes, freeze)
    win = np.abs(grid.nodes - x0) <= half_width
    rows, lost = [], 0.0
    for n in sorted(n_list):
        pe = chain_density_grid(ChainConfig.with_steps(coeffs, radial, n), n, x0, grid)
        lost = max(lost, pe.lost_mass)
        rows.append(ScanRow(
            n,
            float(np.abs(pe.values - p1 - corr / (2 * n))[win].max()),
            float(np.abs(pe.values - p1)[win].max()),
        ))
    by_n = {r.n: r for r in rows}
    for r in rows:
        nxt = by_n.get(2 * r.n)
        if nxt is not None:
            r.ratio = nxt.err / r.err if r.err > 0 else None
            r.ratio_no_corr = nxt.err_no_corr / r.err_no_corr if r.err_no_corr > 0 else None
    return ScanResult(
        rows,
        estimate_grid_error(coeffs, x0, grid, p1),
        freeze,
        (x0 - half_width, x0 + half_width),
        float(np.abs(corr).max()),
        lost,
    )
