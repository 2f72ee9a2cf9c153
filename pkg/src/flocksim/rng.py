"""Deterministic 64-bit PRNG (splitmix64).

The sequence is pinned by constants rather than by a library so that a log
replayed on any machine — or a port of this engine to another language —
draws identical values. Reference stream for seed 0:

    0xE220A8397B1DCDAF, 0x6E789E6AA1B965F4, 0x06C45D188009454F
"""

from __future__ import annotations

_MASK = (1 << 64) - 1


class SplitMix64:
    __slots__ = ("state",)

    def __init__(self, seed: int) -> None:
        self.state = seed & _MASK

    def next_uint64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def random(self) -> float:
        """Uniform float in [0, 1) with 53 bits of precision."""
        return (self.next_uint64() >> 11) * (1.0 / (1 << 53))

    def randint_below(self, n: int) -> int:
        """Uniform integer in [0, n) via fixed-point multiply."""
        if n <= 0:
            raise ValueError("n must be positive")
        return (self.next_uint64() * n) >> 64
