"""Portable deterministic random source for simulation runs.

Every stochastic decision in a run is drawn from a single SplitMix64 stream
seeded from the scenario seed, so a (seed, config) pair always produces the
same event log on any platform and Python version.

State update rule (all arithmetic modulo 2**64):

    state    <- state + 0x9E3779B97F4A7C15
    z        <- state
    z        <- (z XOR (z >> 30)) * 0xBF58476D1CE4E5B9
    z        <- (z XOR (z >> 27)) * 0x94D049BB133111EB
    output   <- z XOR (z >> 31)

Derived draws:

    random()            = next_u64() >> 11, scaled by 2**-53 (uniform in [0, 1))
    uniform_int(lo, hi) = lo + next_u64() mod (hi - lo + 1)
    shuffle(xs)         = Fisher-Yates, j = next_u64() mod (i + 1) for i = n-1 .. 1
"""

from __future__ import annotations

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


class SplitMix64:
    """SplitMix64 generator with the update rule documented in the module."""

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
        z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
        return z ^ (z >> 31)

    def random(self) -> float:
        """Uniform float in [0, 1) with 53 bits of precision."""
        return (self.next_u64() >> 11) * (2.0 ** -53)

    def uniform_int(self, lo: int, hi: int) -> int:
        """Uniform integer in the closed range [lo, hi]."""
        if hi < lo:
            raise ValueError(f"empty range [{lo}, {hi}]")
        return lo + self.next_u64() % (hi - lo + 1)

    def shuffle(self, xs: list) -> None:
        """In-place Fisher-Yates shuffle consuming len(xs) - 1 draws."""
        for i in range(len(xs) - 1, 0, -1):
            j = self.next_u64() % (i + 1)
            xs[i], xs[j] = xs[j], xs[i]
