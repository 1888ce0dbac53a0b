"""Deterministic pseudorandom generator (pcg32-v1).

All sampling in this package flows through Pcg32 so that identical seeds
produce identical bytes on every platform and Python version. The stdlib
Mersenne Twister is avoided on purpose: its bounded-int helpers have
changed across CPython releases.
"""

from __future__ import annotations

GENERATOR_NAME = "pcg32-v1"

_MASK64 = (1 << 64) - 1
_MASK32 = (1 << 32) - 1
_PCG_MULT = 6364136223846793005


def splitmix64(x: int) -> int:
    """One splitmix64 step; used to derive independent per-problem seeds."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_seed(master_seed: int, index: int) -> int:
    """Stable per-item seed for item `index` under `master_seed`."""
    return splitmix64((master_seed & _MASK64) ^ splitmix64(index & _MASK64))


class Pcg32:
    """PCG-XSH-RR 64/32 (O'Neill's pcg32), minimal and self-contained."""

    def __init__(self, seed: int, seq: int = 0):
        self._state = 0
        self._inc = (((seq & _MASK64) << 1) | 1) & _MASK64
        self._next_u32()
        self._state = (self._state + (seed & _MASK64)) & _MASK64
        self._next_u32()

    def _next_u32(self) -> int:
        old = self._state
        self._state = (old * _PCG_MULT + self._inc) & _MASK64
        xorshifted = (((old >> 18) ^ old) >> 27) & _MASK32
        rot = old >> 59
        return ((xorshifted >> rot) | (xorshifted << ((-rot) & 31))) & _MASK32

    def randrange(self, n: int) -> int:
        """Uniform integer in [0, n); rejection sampling, no modulo bias."""
        if n <= 0:
            raise ValueError("randrange() bound must be positive")
        threshold = (1 << 32) % n
        while True:
            r = self._next_u32()
            if r >= threshold:
                return r % n

    def randint(self, lo: int, hi: int) -> int:
        """Uniform integer in [lo, hi] inclusive."""
        return lo + self.randrange(hi - lo + 1)

    def choice(self, seq):
        return seq[self.randrange(len(seq))]

    def sample_distinct(self, lo: int, hi: int, k: int) -> list:
        """k distinct integers from [lo, hi], in draw order."""
        if k > hi - lo + 1:
            raise ValueError("sample larger than population")
        seen: set = set()
        out = []
        while len(out) < k:
            v = self.randint(lo, hi)
            if v not in seen:
                seen.add(v)
                out.append(v)
        return out

    def shuffle(self, items: list) -> None:
        """Fisher-Yates, in place."""
        for i in range(len(items) - 1, 0, -1):
            j = self.randrange(i + 1)
            items[i], items[j] = items[j], items[i]
