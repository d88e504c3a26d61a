"""Independent checks for the one-step innovation laws.

The closed-form densities are integrated by quadrature (d = 1, 2) and sampled
histograms are compared with cell probabilities obtained from the same
densities.  Nothing here calls the samplers' own normalizations, so an error in
the radial scaling shows up as a failed identity.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .chain import ChainConfig, RadialFamily, constant_field, innovation_density, sample_steps
from .directions import psd_sqrt
from .stats import chi_square_gof


@dataclass
class MomentIdentity:
    mass: float
    mean: np.ndarray
    cov: np.ndarray

    def max_error(self, a: np.ndarray) -> float:
        """Largest deviation from mass 1, mean 0 and covariance ``a``."""
        return float(max(abs(self.mass - 1.0), np.max(np.abs(self.mean)), np.max(np.abs(self.cov - a))))


def innovation_moments_quadrature(a, radial: RadialFamily, phi_nodes: int = 64) -> MomentIdentity:
    """Mass, mean and covariance of ``q`` by quadrature (``d`` = 1 or 2)."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    d = a.shape[0]
    opts = dict(epsabs=1e-13, epsrel=1e-12, limit=400)
    if d == 1:
        def mom(p):
            f = lambda z: z**p * innovation_density(np.array([[z]]), a, radial)[0]
            return integrate.quad(f, -np.inf, 0, **opts)[0] + integrate.quad(f, 0, np.inf, **opts)[0]

        return MomentIdentity(mom(0), np.array([mom(1)]), np.array([[mom(2)]]))
    if d != 2:
        raise ValueError("quadrature identities are implemented for d = 1, 2; use Monte Carlo above")
    # periodic trapezoid in the angle (spectrally accurate), adaptive in the radius
    phis = 2 * np.pi * np.arange(phi_nodes) / phi_nodes
    mass, mean, cov = 0.0, np.zeros(2), np.zeros((2, 2))
    for phi in phis:
        e = np.array([math.cos(phi), math.sin(phi)])
        radial_int = [
            integrate.quad(lambda r, p=p: r ** (p + 1) * innovation_density((r * e)[None, :], a, radial)[0], 0, np.inf, **opts)[0]
            for p in range(3)
        ]
        mass += radial_int[0]
        mean += radial_int[1] * e
        cov += radial_int[2] * np.outer(e, e)
    w = 2 * np.pi / phi_nodes
    return MomentIdentity(mass * w, mean * w, cov * w)


def _unit_config(a, radial: RadialFamily) -> ChainConfig:
    d = np.atleast_2d(a).shape[0]
    return ChainConfig(constant_field(np.zeros(d), psd_sqrt(np.atleast_2d(a))), radial, theta=1.0)


def scaled_innovations(a, radial: RadialFamily, samples: int, rng) -> np.ndarray:
    """Draws of ``(y - x - D b)/sqrt(D)`` from the sampler, at ``x = 0`` with ``b = 0``."""
    cfg = _unit_config(a, radial)
    return sample_steps(np.zeros((samples, cfg.d)), cfg, rng) / math.sqrt(cfg.delta)


def innovation_moments_mc(a, radial: RadialFamily, samples: int, rng) -> MomentIdentity:
    Z = scaled_innovations(a, radial, samples, rng)
    return MomentIdentity(1.0, Z.mean(axis=0), np.cov(Z, rowvar=False).reshape(Z.shape[1], Z.shape[1]))


def _cell_probabilities(edges: list[np.ndarray], a, radial: RadialFamily, order: int = 16) -> np.ndarray:
    g, gw = np.polynomial.legendre.leggauss(order)
    d = len(edges)
    if d == 1:
        lo, hi = edges[0][:-1], edges[0][1:]
        mid, half = (lo + hi) / 2, (hi - lo) / 2
        z = (mid[:, None] + half[:, None] * g[None, :]).reshape(-1, 1)
        q = innovation_density(z, a, radial).reshape(len(lo), order)
        return (q * gw).sum(axis=1) * half
    if d == 2:
        out = np.empty((len(edges[0]) - 1, len(edges[1]) - 1))
        for i, (x0, x1) in enumerate(zip(edges[0][:-1], edges[0][1:])):
            xs = (x0 + x1) / 2 + (x1 - x0) / 2 * g
            for j, (y0, y1) in enumerate(zip(edges[1][:-1], edges[1][1:])):
                ys = (y0 + y1) / 2 + (y1 - y0) / 2 * g
                X, Y = np.meshgrid(xs, ys, indexing="ij")
                q = innovation_density(np.column_stack([X.ravel(), Y.ravel()]), a, radial).reshape(order, order)
                out[i, j] = gw @ q @ gw * (x1 - x0) * (y1 - y0) / 4
        return out
    raise ValueError("cell probabilities are implemented for d = 1, 2")


def step_chi_square(a, radial: RadialFamily, samples: int, rng, bins: int | None = None, width: float = 4.0):
    """Pearson test of sampled innovations against the closed-form density.

    Cells tile ``[-L, L]^d`` with ``L = width * sqrt(max diag a)``; everything
    outside is one extra cell.  Returns ``(statistic, p_value, dof)``.
    """
    a = np.atleast_2d(np.asarray(a, dtype=float))
    d = a.shape[0]
    bins = bins or (40 if d == 1 else 12)
    L = width * math.sqrt(np.max(np.diag(a)))
    edges = [np.linspace(-L, L, bins + 1)] * d
    probs = _cell_probabilities(edges, a, radial).ravel()
    Z = scaled_innovations(a, radial, samples, rng)
    counts, _ = np.histogramdd(Z, bins=edges)
    counts = counts.ravel()
    observed = np.append(counts, samples - counts.sum())
    expected = np.append(probs, max(1.0 - probs.sum(), 0.0)) * samples
    return chi_square_gof(observed, expected)


def charfn_closed_form(t, x, config: ChainConfig) -> float:
    """Characteristic function of ``rho_0 eps_0`` at radius scale ``s = config.radial_scale``.

    Gaussian family ``exp(-s^2 |a^{1/2} t|^2 / 4)``; Gamma family
    ``(1 + s^2 |a^{1/2} t|^2)^{-(d+1)/2}``.
    """
    d = config.d
    t = np.asarray(t, dtype=float).reshape(d)
    a = config.coefficients.a(np.asarray(x, dtype=float).reshape(1, d))[0]
    k2 = float(t @ a @ t)
    s = config.radial_scale
    if config.radial.kind == "example2":
        return math.exp(-s * s * k2 / 4)
    if config.radial.kind == "example1":
        return (1 + s * s * k2) ** (-(d + 1) / 2)
    raise ValueError("no closed form for a custom radial family")
