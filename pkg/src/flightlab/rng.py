"""Reproducible random streams.

Every sampler in the package takes an explicit :class:`RngStream`.  A stream
is identified by ``(seed, stream_index)``; the generator behind it is
``numpy.random.PCG64`` seeded through ``SeedSequence(seed, spawn_key=(index,))``
so that distinct indices give independent streams.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

RNG_ALGORITHM = "numpy.PCG64/SeedSequence(seed, spawn_key=(stream_index,))"

_TWO_M53 = 2.0**-53


@dataclass
class RngStream:
    seed: int
    stream_index: int = 0
    _gen: np.random.Generator = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.stream_index < 0:
            raise ValueError("stream_index must be non-negative")
        ss = np.random.SeedSequence(int(self.seed) % 2**64, spawn_key=(int(self.stream_index),))
        self._gen = np.random.Generator(np.random.PCG64(ss))

    @property
    def generator(self) -> np.random.Generator:
        return self._gen

    def child(self, index: int) -> "RngStream":
        """Stream with the same seed and another index (used for replica pools)."""
        return RngStream(self.seed, index)

    def open_uniform(self, size) -> np.ndarray:
        """Uniforms on the open interval (0, 1) with 53-bit resolution."""
        k = self._gen.integers(0, 2**53, size=size, dtype=np.int64)
        return (k.astype(np.float64) + 0.5) * _TWO_M53

    def exponential(self, size) -> np.ndarray:
        """Standard exponentials by inversion, ``-log U``; always strictly positive."""
        return -np.log(self.open_uniform(size))

    def normal(self, size) -> np.ndarray:
        return self._gen.standard_normal(size)

    def gamma(self, shape, size) -> np.ndarray:
        return self._gen.standard_gamma(shape, size)

    def uniform(self, size) -> np.ndarray:
        return self._gen.random(size)

    def choice(self, n: int, size, p=None) -> np.ndarray:
        return self._gen.choice(n, size=size, p=p)


def as_stream(rng) -> RngStream:
    if isinstance(rng, RngStream):
        return rng
    if isinstance(rng, (int, np.integer)):
        return RngStream(int(rng))
    raise TypeError(f"expected RngStream or integer seed, got {type(rng).__name__}")
