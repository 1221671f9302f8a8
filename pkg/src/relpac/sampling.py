"""Reproducible random streams.

Every random decision in the package goes through :class:`Stream`, which
draws raw 64-bit words from numpy's Philox4x64 counter-based generator
(seeded through ``SeedSequence``) and converts them with fixed integer
arithmetic.  Only the raw bit stream of the bit generator is used, never
numpy's ``Generator`` methods, so results do not depend on the numpy
version or the platform.

Bounded integers: ``below(m) = floor(raw * m / 2**64)`` (multiply-shift,
bias below ``m / 2**64``).  Subsets: partial Fisher-Yates shuffle of the
sorted population, step ``j`` swapping position ``j`` with ``j + below(N - j)``.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

_BUFFER = 4096
_MASK32 = np.uint64(0xFFFFFFFF)
_SHIFT32 = np.uint64(32)


def _mulshift(raw: np.ndarray, m: int) -> np.ndarray:
    """Exact floor(raw * m / 2**64) for uint64 ``raw`` and m < 2**32."""
    mm = np.uint64(m)
    hi = raw >> _SHIFT32
    lo = raw & _MASK32
    return (hi * mm + ((lo * mm) >> _SHIFT32)) >> _SHIFT32


class Stream:
    """A named random stream: ``Stream(seed, *path)``.

    Streams with different paths are statistically independent; the same
    (seed, path) always yields the same sequence.
    """

    def __init__(self, seed: int, *path: int):
        if seed < 0 or any(p < 0 for p in path):
            raise ValueError("seed and stream path must be non-negative")
        self.seed = seed
        self.path = path
        self._bitgen = np.random.Philox(np.random.SeedSequence([seed, *path]))
        self._buf = np.empty(0, dtype=np.uint64)
        self._pos = 0

    def child(self, *path: int) -> "Stream":
        return Stream(self.seed, *self.path, *path)

    def raw(self, size: int) -> np.ndarray:
        out = np.empty(size, dtype=np.uint64)
        filled = 0
        while filled < size:
            if self._pos >= len(self._buf):
                self._buf = self._bitgen.random_raw(_BUFFER)
                self._pos = 0
            take = min(size - filled, len(self._buf) - self._pos)
            out[filled:filled + take] = self._buf[self._pos:self._pos + take]
            self._pos += take
            filled += take
        return out

    def raw1(self) -> int:
        if self._pos >= len(self._buf):
            self._buf = self._bitgen.random_raw(_BUFFER)
            self._pos = 0
        value = int(self._buf[self._pos])
        self._pos += 1
        return value

    def below(self, m: int) -> int:
        if m <= 0:
            raise ValueError("bound must be positive")
        return (self.raw1() * m) >> 64

    def below_many(self, m: int, size: int) -> np.ndarray:
        if not 0 < m < 2**32:
            raise ValueError("vector bound must lie in [1, 2**32)")
        return _mulshift(self.raw(size), m).astype(np.int64)

    def uniform(self) -> float:
        return (self.raw1() >> 11) * 2.0**-53

    def bernoulli_many(self, p: float, size: int) -> np.ndarray:
        """``size`` independent coin flips with P[True] = p."""
        if not 0.0 <= p <= 1.0:
            raise ValueError("probability must lie in [0, 1]")
        u = (self.raw(size) >> np.uint64(11)).astype(np.float64) * 2.0**-53
        return u < p

    def sample_indices(self, population: int, k: int) -> list[int]:
        """Partial Fisher-Yates: k distinct indices from range(population), in draw order."""
        if not 0 <= k <= population:
            raise ValueError(f"cannot draw {k} of {population}")
        swapped: dict[int, int] = {}
        out = []
        for j in range(k):
            r = j + self.below(population - j)
            vj = swapped.get(j, j)
            vr = swapped.get(r, r)
            swapped[r] = vj
            out.append(vr)
        return out

    def sample(self, items: Sequence, k: int) -> list:
        """k distinct elements of ``items`` (taken in the given order, callers sort)."""
        return [items[i] for i in self.sample_indices(len(items), k)]

    def sample_batch(self, population: int, k: int, count: int) -> np.ndarray:
        """``count`` independent size-k draws as a (count, k) index array.

        Vectorised partial Fisher-Yates; randomness is consumed step-major
        (all rows for step 0, then step 1, ...), so rows differ from
        repeated :meth:`sample_indices` calls but follow the same law.
        """
        if not 0 <= k <= population:
            raise ValueError(f"cannot draw {k} of {population}")
        # Only touched positions are tracked: (target, value) pairs, last write wins.
        targets = np.empty((count, k), dtype=np.int64)
        values = np.empty((count, k), dtype=np.int64)
        out = np.empty((count, k), dtype=np.int64)
        for j in range(k):
            r = j + self.below_many(population - j, count)
            vj = np.full(count, j, dtype=np.int64)
            vr = r.copy()
            for i in range(j):
                vj = np.where(targets[:, i] == j, values[:, i], vj)
                vr = np.where(targets[:, i] == r, values[:, i], vr)
            out[:, j] = vr
            targets[:, j] = r
            values[:, j] = vj
        return out


def as_stream(rng: "Stream | int") -> Stream:
    return rng if isinstance(rng, Stream) else Stream(int(rng))
