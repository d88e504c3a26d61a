"""Random walk over ellipsoids and the diffusion-approximation chain.

One step from ``x`` is ``x + D b(x) + sqrt(D) a^{1/2}(x) V`` where ``V`` is an
isotropic vector whose radius has the family's radial density, scaled so that
``Cov V = I``.  The general chain (``Chain13Config``) uses an arbitrary radius
law with ``E rho^2 = d`` and the matrix ``sigma(x)`` instead.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import integrate, special

from .directions import DirectionLaw, psd_sqrt
from .paths import PolylinePath
from .rng import as_stream


class ChainConfigError(ValueError):
    pass


class QuadratureError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# coefficients


@dataclass(frozen=True)
class CoefficientField:
    """Drift ``b`` and diffusion matrix ``sigma`` on ``R^d``.

    Both callables are vectorized: ``b(X)`` maps ``(N, d)`` to ``(N, d)`` and
    ``sigma(X)`` maps ``(N, d)`` to ``(N, d, d)``.
    """

    d: int
    b: Callable[[np.ndarray], np.ndarray]
    sigma: Callable[[np.ndarray], np.ndarray]
    name: str = "custom"
    ellipticity: float = 0.0

    def _points(self, x) -> np.ndarray:
        X = np.asarray(x, dtype=float)
        if self.d == 1 and X.ndim <= 1:
            X = X.reshape(-1, 1)
        return np.atleast_2d(X)

    def drift(self, x) -> np.ndarray:
        return np.asarray(self.b(self._points(x)), dtype=float)

    def diffusion(self, x) -> np.ndarray:
        return np.asarray(self.sigma(self._points(x)), dtype=float)

    def a(self, x) -> np.ndarray:
        s = self.diffusion(x)
        return s @ np.swapaxes(s, -1, -2)

    def a_1d(self, z) -> np.ndarray:
        """``a`` on a 1-d grid as a flat array."""
        return self.a(np.asarray(z, dtype=float).reshape(-1, 1))[:, 0, 0]

    def b_1d(self, z) -> np.ndarray:
        return self.drift(np.asarray(z, dtype=float).reshape(-1, 1))[:, 0]

    def check(self, grid) -> None:
        """Ellipticity and boundedness on a finite set of test points."""
        A = self.a(grid)
        if not np.allclose(A, np.swapaxes(A, -1, -2), atol=1e-12):
            raise ChainConfigError("a(x) is not symmetric")
        lam = np.linalg.eigvalsh(A).min()
        if lam < self.ellipticity or lam <= 0:
            raise ChainConfigError(f"a(x) fails ellipticity: min eigenvalue {lam:.3g}")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(self.drift(grid)))):
            raise ChainConfigError("coefficients are not finite on the test grid")

    def is_constant(self, grid) -> bool:
        A, B = self.a(grid), self.drift(grid)
        return bool(np.allclose(A, A[0]) and np.allclose(B, B[0]))


def constant_field(b, sigma, name: str = "constant") -> CoefficientField:
    b = np.atleast_1d(np.asarray(b, dtype=float))
    sigma = np.atleast_2d(np.asarray(sigma, dtype=float))
    d = b.shape[0]
    lam = np.linalg.eigvalsh(sigma @ sigma.T).min()
    return CoefficientField(
        d,
        lambda X: np.broadcast_to(b, (len(X), d)).copy(),
        lambda X: np.broadcast_to(sigma, (len(X), d, d)).copy(),
        name,
        float(lam),
    )


def _sine_sigma(X):
    return (1.0 + 0.2 * np.sin(X[:, 0]))[:, None, None]


PRESETS = ("unit", "diag(1,4)", "sine-sigma")


def preset(name: str, d: int = 1) -> CoefficientField:
    """Named coefficient fields used by the experiment configs."""
    if name == "unit":
        return constant_field(np.zeros(d), np.eye(d), "unit")
    if name == "diag(1,4)":
        return constant_field(np.zeros(2), np.diag([1.0, 2.0]), "diag(1,4)")
    if name == "sine-sigma":
        return CoefficientField(1, lambda X: np.zeros_like(X), _sine_sigma, "sine-sigma", 0.64)
    raise ChainConfigError(f"unknown coefficient preset {name!r}; known: {', '.join(PRESETS)}")


# ---------------------------------------------------------------------------
# radial families


def example2_constant(d: int) -> float:
    """Normalizing constant of the Gaussian-type radial density (as printed, by parity of d)."""
    if d % 2:
        double_fact = math.prod(range(d - 2, 0, -2))  # (d-2)!!, with (-1)!! = 1
        return 2 ** ((d + 1) / 2) / (double_fact * math.sqrt(math.pi))
    return 2 / math.factorial((d - 2) // 2)


@dataclass(frozen=True)
class RadialFamily:
    """Radial density ``f(r; theta)``, homogeneous of degree -1 in ``(r, theta)``."""

    kind: str
    d: int
    func: Optional[Callable] = field(default=None, compare=False)
    c_d: Optional[float] = None

    @classmethod
    def example1(cls, d: int) -> "RadialFamily":
        return cls("example1", d)

    @classmethod
    def example2(cls, d: int) -> "RadialFamily":
        return cls("example2", d)

    @classmethod
    def custom(cls, func: Callable, d: int, c_d: Optional[float] = None) -> "RadialFamily":
        return cls("custom", d, func, c_d)

    def density(self, r, theta: float):
        r = np.asarray(r, dtype=float)
        if np.any(r <= 0):
            raise ValueError("radial density needs r > 0")
        if theta <= 0:
            raise ValueError("theta must be positive")
        d, u = self.d, r / theta
        if self.kind == "example1":
            return np.exp((d - 1) * np.log(u) - u - special.gammaln(d)) / theta
        if self.kind == "example2":
            return example2_constant(d) * np.exp((d - 1) * np.log(u) - u * u) / theta
        return np.asarray(self.func(r, theta), dtype=float)

    def unit_second_moment(self) -> float:
        """``int r^2 f(r; 1) dr``."""
        d = self.d
        if self.kind == "example1":
            return d * (d + 1.0)
        if self.kind == "example2":
            return d / 2.0
        val, _ = integrate.quad(lambda r: r * r * self.density(r, 1.0), 0, np.inf, limit=200)
        return val

    @property
    def unit_scale(self) -> float:
        """Scale making the isotropic vector with this radius law have identity covariance."""
        return math.sqrt(self.d / self.unit_second_moment())

    def sample_radius(self, size, theta: float, rng) -> np.ndarray:
        rng = as_stream(rng)
        if self.kind == "example1":
            return theta * rng.gamma(self.d, size)
        if self.kind == "example2":
            return theta * np.sqrt(rng.gamma(self.d / 2.0, size))
        grid = np.geomspace(1e-8, 50.0, 4001) * theta
        cdf = integrate.cumulative_trapezoid(self.density(grid, theta), grid, initial=0.0)
        cdf /= cdf[-1]
        return np.interp(rng.uniform(size), cdf, grid)


def delta_of_theta(radial: RadialFamily, theta: float) -> float:
    """Effective time step ``Delta(theta) = c_d theta^2``."""
    if theta <= 0:
        raise ValueError("theta must be positive")
    if radial.kind == "example1":
        return (radial.d + 1) ** 2 * theta**2
    if radial.kind == "example2":
        return theta**2 / 2
    if radial.c_d is None:
        raise ChainConfigError("custom radial family must declare c_d")
    return radial.c_d * theta**2


def radial_density_eval(radial: RadialFamily, r, theta: float):
    return radial.density(r, theta)


# ---------------------------------------------------------------------------
# the ellipsoid walk


@dataclass(frozen=True)
class ChainConfig:
    coefficients: CoefficientField
    radial: RadialFamily
    theta: float
    steps: int = 1
    x0: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.coefficients.d != self.radial.d:
            raise ChainConfigError("coefficient and radial dimensions differ")
        if self.steps < 1:
            raise ChainConfigError("steps must be >= 1")
        if not self.delta > 0:
            raise ChainConfigError("Delta(theta) must be positive")

    @classmethod
    def with_steps(cls, coefficients, radial, n: int, x0=None) -> "ChainConfig":
        """Pick ``theta`` so that ``Delta(theta) = 1/n`` (``theta_n = sqrt(2/n)`` for the Gaussian family)."""
        c_d = delta_of_theta(radial, 1.0)
        return cls(coefficients, radial, math.sqrt(1.0 / (c_d * n)), n, x0)

    @property
    def d(self) -> int:
        return self.radial.d

    @property
    def delta(self) -> float:
        return delta_of_theta(self.radial, self.theta)

    @property
    def radial_scale(self) -> float:
        """Scale of the unnormalized step radius ``|a^{-1/2} (x' - x - D b)|``."""
        return math.sqrt(self.delta) * self.radial.unit_scale


def sample_steps(X, config: ChainConfig, rng) -> np.ndarray:
    """One step from each row of ``X`` (shape ``(N, d)``)."""
    rng = as_stream(rng)
    cf = config.coefficients
    X = cf._points(X)
    N, d = X.shape
    u = DirectionLaw.uniform(d).sample(N, rng)
    R = config.radial.sample_radius(N, config.radial.unit_scale, rng)
    lam, V = np.linalg.eigh(cf.a(X))
    root = (V * np.sqrt(np.clip(lam, 0, None))[:, None, :]) @ np.swapaxes(V, -1, -2)
    if np.any(lam < 1e-12):
        raise ChainConfigError("a(x) is singular")
    D = config.delta
    return X + D * cf.drift(X) + math.sqrt(D) * np.einsum("nij,nj->ni", root, R[:, None] * u)


def sample_step(x, config: ChainConfig, rng) -> np.ndarray:
    return sample_steps(np.atleast_2d(np.asarray(x, dtype=float)).reshape(1, -1), config, rng)[0]


def innovation_density(z, a: np.ndarray, radial: RadialFamily) -> np.ndarray:
    """Closed-form density ``q_x(z)`` of the scaled innovation; ``z`` has shape ``(N, d)``."""
    a = np.atleast_2d(a)
    d = a.shape[0]
    z = np.asarray(z, dtype=float).reshape(-1, d)
    a_inv_root = np.linalg.inv(psd_sqrt(a))
    det_root = math.sqrt(np.linalg.det(a))
    if radial.kind == "example1":
        c = (d + 1) ** (d / 2) / (2**d * math.pi ** ((d - 1) / 2) * math.gamma((d + 1) / 2) * det_root)
        return c * np.exp(-math.sqrt(d + 1) * np.linalg.norm(z @ a_inv_root.T, axis=1))
    if radial.kind == "example2":
        quad = np.einsum("ni,ij,nj->n", z, np.linalg.inv(a), z)
        return np.exp(-0.5 * quad) / ((2 * math.pi) ** (d / 2) * det_root)
    raise ChainConfigError("closed-form one-step density exists only for Examples 1 and 2")


def one_step_density(x, y, config: ChainConfig) -> np.ndarray:
    """``p(1, x, y) = D^{-d/2} q_x((y - x - D b(x)) / sqrt(D))`` for each row of ``y``."""
    cf, D, d = config.coefficients, config.delta, config.d
    x = np.asarray(x, dtype=float).reshape(1, d)
    y = np.asarray(y, dtype=float).reshape(-1, d)
    z = (y - x - D * cf.drift(x)) / math.sqrt(D)
    return D ** (-d / 2) * innovation_density(z, cf.a(x)[0], config.radial)


def _bessel_kernel(z, d: int):
    # Gamma(d/2) (2/z)^nu J_nu(z), nu = (d-2)/2: the characteristic function of
    # the uniform law on S^{d-1} at radius z.
    z = np.asarray(z, dtype=float)
    if d == 1:
        return np.cos(z)
    if d == 3:
        return np.sinc(z / math.pi)
    nu = (d - 2) / 2
    out = np.ones_like(z)
    big = z > 1e-6
    out[big] = math.gamma(d / 2) * (2 / z[big]) ** nu * special.jv(nu, z[big])
    small = ~big
    out[small] = 1 - z[small] ** 2 / (2 * d)
    return out


def charfn_bessel(t, x, config: ChainConfig, quad_tol: float = 1e-10, theta: Optional[float] = None) -> float:
    """One-step characteristic function of ``rho_0 eps_0`` by Bessel quadrature.

    ``2^{(d-2)/2} Gamma(d/2) int_0^inf J_nu(r k) (r k)^{-nu} f(r; theta) dr`` with
    ``k = |a^{1/2}(x) t|``, ``nu = (d-2)/2``.  ``theta`` defaults to the chain's
    radial scale, which for the Gaussian family is the configured ``theta``.  In
    dimensions 1 and 3 the kernel is ``cos`` and ``sin(z)/z`` and the
    oscillatory-weight rules are used; otherwise the half-line is cut at the
    kernel's half periods.
    """
    d = config.d
    t = np.asarray(t, dtype=float).reshape(d)
    a = config.coefficients.a(np.asarray(x, dtype=float).reshape(1, d))[0]
    k = float(np.linalg.norm(psd_sqrt(a) @ t))
    if k == 0.0:
        return 1.0
    th = config.radial_scale if theta is None else theta
    f = config.radial

    def dens(r):
        return f.density(np.array([max(r, 1e-300)]), th)[0]

    if d == 1:
        total, err = integrate.quad(dens, 0, np.inf, weight="cos", wvar=k, epsabs=quad_tol * 1e-2, limlst=200)
    elif d == 3:
        total, err = integrate.quad(lambda r: dens(r) / (r * k) if r > 0 else 0.0, 0, np.inf,
                                    weight="sin", wvar=k, epsabs=quad_tol * 1e-2, limlst=200)
    else:
        period = math.pi / k
        edges = np.arange(0.0, th * 60.0 + period, period)
        total, err = 0.0, 0.0
        for lo, hi in zip(edges[:-1], edges[1:]):
            val, e = integrate.quad(lambda r: _bessel_kernel(np.array([r * k]), d)[0] * dens(r),
                                    lo, hi, epsabs=quad_tol * 1e-2, epsrel=1e-12, limit=200)
            total += val
            err += e
    if err > quad_tol:
        raise QuadratureError(f"Bessel quadrature error {err:.2e} exceeds {quad_tol:.2e}")
    return total


def inverse_charfn_1d(z, x, config: ChainConfig, quad_tol: float = 1e-9) -> float:
    """``q_x(z)`` recovered from the characteristic function by cosine inversion (d = 1)."""
    if config.d != 1:
        raise ChainConfigError("inverse_charfn_1d is one-dimensional")
    scale = math.sqrt(config.delta)

    def psi(tau):
        return charfn_bessel([tau / scale], x, config, quad_tol * 10)

    if z == 0:
        val, _ = integrate.quad(psi, 0, np.inf, limit=400, epsabs=quad_tol)
    else:
        val, _ = integrate.quad(psi, 0, np.inf, weight="cos", wvar=abs(z), limlst=100, epsabs=quad_tol)
    return val / math.pi


# ---------------------------------------------------------------------------
# the general chain: sigma(x) times a radius law with E rho^2 = d


@dataclass(frozen=True)
class RhoLaw:
    """Law of the non-negative radius ``rho`` with ``E rho^2 = d``."""

    kind: str
    d: int
    density: Optional[Callable] = field(default=None, compare=False)
    sampler: Optional[Callable] = field(default=None, compare=False)

    @classmethod
    def chi(cls, d: int) -> "RhoLaw":
        return cls("chi", d)

    @classmethod
    def uniform(cls, d: int) -> "RhoLaw":
        return cls("uniform", d)

    @classmethod
    def constant(cls, d: int) -> "RhoLaw":
        return cls("constant", d)

    @classmethod
    def custom(cls, density, sampler, d: int) -> "RhoLaw":
        law = cls("custom", d, density, sampler)
        m2 = law.second_moment()
        if abs(m2 - d) > 0.01 * d:
            raise ChainConfigError(f"E rho^2 = {m2:.4g}, expected {d}")
        return law

    @property
    def upper(self) -> float:
        return math.sqrt(3 * self.d) if self.kind == "uniform" else np.inf

    def pdf(self, r):
        r = np.asarray(r, dtype=float)
        if self.kind == "chi":
            return np.where(r > 0, np.exp((self.d - 1) * np.log(np.maximum(r, 1e-300)) - r * r / 2
                                          - (self.d / 2 - 1) * math.log(2) - special.gammaln(self.d / 2)), 0.0)
        if self.kind == "uniform":
            return np.where((r >= 0) & (r <= self.upper), 1 / self.upper, 0.0)
        if self.kind == "custom":
            return np.asarray(self.density(r), dtype=float)
        raise ChainConfigError("constant radius has no density")

    def second_moment(self) -> float:
        if self.kind in ("chi", "uniform", "constant"):
            return float(self.d)
        val, _ = integrate.quad(lambda r: r * r * self.pdf(r), 0, np.inf, limit=200)
        return val

    def sample(self, size, rng) -> np.ndarray:
        rng = as_stream(rng)
        if self.kind == "chi":
            return np.sqrt(2 * rng.gamma(self.d / 2, size))
        if self.kind == "uniform":
            return self.upper * rng.uniform(size)
        if self.kind == "constant":
            return np.full(size, math.sqrt(self.d))
        return np.asarray(self.sampler(size, rng), dtype=float)

    @classmethod
    def from_name(cls, name: str, d: int) -> "RhoLaw":
        if name not in ("chi", "uniform", "constant"):
            raise ChainConfigError(f"unknown rho law {name!r}")
        return cls(name, d)


@dataclass(frozen=True)
class Chain13Config:
    coefficients: CoefficientField
    rho: RhoLaw
    x0: np.ndarray = field(default_factory=lambda: np.zeros(1))

    def __post_init__(self):
        if self.rho.d != self.coefficients.d:
            raise ChainConfigError("rho law and coefficients have different dimensions")
        m2 = self.rho.second_moment()
        if abs(m2 - self.rho.d) > 0.01 * self.rho.d:
            raise ChainConfigError(f"E rho^2 = {m2:.4g} differs from d = {self.rho.d}")
        object.__setattr__(self, "x0", np.asarray(self.x0, dtype=float).reshape(self.coefficients.d))


def innovations13(X, config: Chain13Config, rng) -> np.ndarray:
    """``xi = rho sigma(x) eps`` for each row of ``X``."""
    cf = config.coefficients
    N, d = X.shape
    eps = DirectionLaw.uniform(d).sample(N, rng)
    rho = config.rho.sample(N, rng)
    return rho[:, None] * np.einsum("nij,nj->ni", cf.diffusion(X), eps)


def simulate_chain13_batch(config: Chain13Config, h: float, steps: int, paths: int, rng, record: str = "final"):
    """Run ``paths`` independent chains; return final states ``(paths, d)`` or full ``(paths, steps+1, d)``."""
    rng = as_stream(rng)
    cf = config.coefficients
    X = np.tile(config.x0, (paths, 1))
    hist = [X.copy()] if record == "all" else None
    sq = math.sqrt(h)
    for _ in range(steps):
        X = X + h * cf.drift(X) + sq * innovations13(X, config, rng)
        if hist is not None:
            hist.append(X.copy())
    return np.stack(hist, axis=1) if hist is not None else X


def simulate_chain13(config: Chain13Config, h: float, steps: int, rng) -> PolylinePath:
    """One trajectory as a broken line with vertices at ``k h`` (time rescaled to [0, 1])."""
    vals = simulate_chain13_batch(config, h, steps, 1, rng, record="all")[0]
    return PolylinePath(np.linspace(0.0, 1.0, steps + 1), vals)


def euler_reference_batch(coefficients: CoefficientField, x0, h: float, steps: int, paths: int, rng) -> np.ndarray:
    """Final states of the Gaussian Euler scheme (fine-step reference)."""
    rng = as_stream(rng)
    X = np.tile(np.asarray(x0, dtype=float).reshape(coefficients.d), (paths, 1))
    sq = math.sqrt(h)
    for _ in range(steps):
        Z = rng.normal(X.shape)
        X = X + h * coefficients.drift(X) + sq * np.einsum("nij,nj->ni", coefficients.diffusion(X), Z)
    return X


# ---------------------------------------------------------------------------
# truncated moments


@dataclass
class TruncatedMoments:
    a_h: np.ndarray
    b_h: np.ndarray
    delta_h_eps: float
    a_err: float
    b_err: float
    se_a: np.ndarray
    se_b: np.ndarray
    se_delta: float
    method: str


def _moments_quadrature(x, h, config: Chain13Config, epsilon) -> TruncatedMoments:
    # d = 1: Y - x = h b + s u with s = +-1 equiprobable and u = sqrt(h) |sigma| rho.
    # Errors are computed from tail integrals directly, never by subtracting
    # nearly equal numbers.
    cf = config.coefficients
    xp = np.asarray(x, dtype=float).reshape(1, 1)
    b = float(cf.drift(xp)[0, 0])
    a = float(cf.a(xp)[0].item())
    scale = math.sqrt(h * a)
    hb = h * b
    rho = config.rho
    top = rho.upper * scale

    def tail(power, s, lo, hi):
        # E[(hb + s u)^power ; lo < u < hi] over u >= 0, halved for the sign
        lo, hi = max(lo, 0.0), min(hi, top)
        if hi <= lo:
            return 0.0
        f = lambda u: (hb + s * u) ** power * rho.pdf(u / scale) / scale  # noqa: E731
        if np.isinf(hi):
            pieces = [(lo, lo + 10 * scale), (lo + 10 * scale, np.inf)]
        else:
            pieces = [(lo, hi)]
        val = 0.0
        for p_lo, p_hi in pieces:
            v, _ = integrate.quad(f, p_lo, p_hi, epsabs=0.0, epsrel=1e-11, limit=400)
            val += v
        return 0.5 * val

    def outside(power, c):
        # E[(Y-x)^power ; |Y-x| > c]
        tot = 0.0
        # s = +1: u > c - hb or u < -c - hb;  s = -1: u > c + hb or u < hb - c
        return (tail(power, 1.0, c - hb, np.inf) + tail(power, 1.0, 0.0, -c - hb)
                + tail(power, -1.0, c + hb, np.inf) + tail(power, -1.0, 0.0, hb - c))

    out2, out1 = outside(2, 1.0), outside(1, 1.0)
    a_h = a + h * b * b - out2 / h
    b_h = b - out1 / h
    a_err = abs(h * b * b - out2 / h)
    b_err = abs(out1 / h)
    delta = outside(0, epsilon) / h
    z = np.zeros((1, 1))
    return TruncatedMoments(np.array([[a_h]]), np.array([b_h]), delta, a_err, b_err, z, np.zeros(1), 0.0, "quadrature")


def _moments_monte_carlo(x, h, config: Chain13Config, epsilon, mc_samples, rng) -> TruncatedMoments:
    cf = config.coefficients
    d = cf.d
    xp = np.asarray(x, dtype=float).reshape(1, d)
    X = np.repeat(xp, mc_samples, axis=0)
    dy = h * cf.drift(xp)[0] + math.sqrt(h) * innovations13(X, config, rng)
    r = np.linalg.norm(dy, axis=1)
    inside = (r <= 1.0)[:, None]
    m1 = dy * inside / h
    m2 = (dy[:, :, None] * dy[:, None, :]) * inside[:, :, None] / h
    far = (r >= epsilon) / h
    sq = math.sqrt(mc_samples)
    a_h, b_h = m2.mean(0), m1.mean(0)
    a = cf.a(xp)[0]
    b = cf.drift(xp)[0]
    return TruncatedMoments(
        a_h, b_h, float(far.mean()),
        float(np.linalg.norm(a_h - a, 2)), float(np.linalg.norm(b_h - b)),
        m2.std(0, ddof=1) / sq, m1.std(0, ddof=1) / sq, float(far.std(ddof=1) / sq),
        "monte-carlo",
    )


def truncated_moments(x, h: float, config: Chain13Config, epsilon: float, mc_samples: int = 10**6,
                      rng=0, method: str = "auto") -> TruncatedMoments:
    """Truncated second moment ``a_h``, drift ``b_h`` and jump rate ``Delta_h^eps`` at ``x``.

    ``method="auto"`` uses quadrature in one dimension and Monte Carlo otherwise.
    """
    if method == "auto":
        method = "quadrature" if config.coefficients.d == 1 else "monte-carlo"
    if method == "quadrature":
        if config.coefficients.d != 1:
            raise ChainConfigError("quadrature moments are one-dimensional")
        return _moments_quadrature(x, h, config, epsilon)
    return _moments_monte_carlo(x, h, config, epsilon, mc_samples, as_stream(rng))
