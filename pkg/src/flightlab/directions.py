"""Zero-mean direction laws on the unit sphere."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .rng import as_stream

_TOL = 1e-12


class DirectionLawError(ValueError):
    pass


@dataclass(frozen=True)
class DirectionLaw:
    """Either the uniform law on ``S^{d-1}`` or a finite set of weighted atoms.

    >>> DirectionLaw.uniform(2).covariance()
    array([[0.5, 0. ],
           [0. , 0.5]])
    """

    kind: str
    d: int
    points: Optional[np.ndarray] = None
    weights: Optional[np.ndarray] = None

    @classmethod
    def uniform(cls, d: int) -> "DirectionLaw":
        if d < 1:
            raise DirectionLawError("dimension must be >= 1")
        return cls("uniform", int(d))

    @classmethod
    def atoms(cls, points: Sequence[Sequence[float]], weights: Sequence[float]) -> "DirectionLaw":
        P = np.atleast_2d(np.asarray(points, dtype=float))
        w = np.asarray(weights, dtype=float)
        if P.shape[0] != w.shape[0] or P.shape[0] == 0:
            raise DirectionLawError("points and weights must have the same non-zero length")
        if np.any(w < 0) or abs(w.sum() - 1.0) > _TOL:
            raise DirectionLawError("weights must be non-negative and sum to 1")
        if np.any(np.abs(np.linalg.norm(P, axis=1) - 1.0) > _TOL):
            raise DirectionLawError("every atom must be a unit vector")
        if np.any(np.abs(w @ P) > _TOL):
            raise DirectionLawError("direction law must have zero mean")
        P.setflags(write=False)
        w.setflags(write=False)
        return cls("atoms", P.shape[1], P, w)

    @classmethod
    def from_dict(cls, spec: dict) -> "DirectionLaw":
        if spec.get("kind", "uniform") == "uniform":
            return cls.uniform(spec.get("d", 2))
        return cls.atoms(spec["points"], spec["weights"])

    def to_dict(self) -> dict:
        if self.kind == "uniform":
            return {"kind": "uniform", "d": self.d}
        return {"kind": "atoms", "points": self.points.tolist(), "weights": self.weights.tolist()}

    def sample(self, size: int, rng) -> np.ndarray:
        """``(size, d)`` array of i.i.d. directions."""
        rng = as_stream(rng)
        if self.kind == "uniform":
            if self.d == 1:
                return np.where(rng.uniform((size, 1)) < 0.5, -1.0, 1.0)
            g = rng.normal((size, self.d))
            return g / np.linalg.norm(g, axis=1, keepdims=True)
        idx = rng.choice(len(self.weights), size, p=self.weights)
        return self.points[idx].copy()

    def covariance(self) -> np.ndarray:
        if self.kind == "uniform":
            return np.eye(self.d) / self.d
        return (self.points * self.weights[:, None]).T @ self.points


def sample_direction(law: DirectionLaw, rng) -> np.ndarray:
    return law.sample(1, rng)[0]


def covariance_of(law: DirectionLaw) -> np.ndarray:
    return law.covariance()


def psd_sqrt(K: np.ndarray, floor: float = 1e-12) -> np.ndarray:
    """Symmetric square root of a PSD matrix; eigenvalues below ``floor`` are zeroed."""
    K = np.atleast_2d(np.asarray(K, dtype=float))
    if not np.allclose(K, K.T, atol=1e-12):
        raise DirectionLawError("matrix is not symmetric")
    lam, V = np.linalg.eigh(K)
    if lam.min() < -1e-9 * max(1.0, abs(lam).max()):
        raise DirectionLawError(f"matrix is not positive semi-definite (min eigenvalue {lam.min():.3g})")
    lam = np.where(lam < floor, 0.0, lam)
    return (V * np.sqrt(lam)) @ V.T
