"""SplitMix64 generator used for instance generation.

Instances must be bit-identical across runs and across builds in other
languages, so edge lengths come from this tiny, fully specified generator
rather than from numpy's bit generators.  Sampling (tours, Monte Carlo runs)
uses numpy ``Generator`` objects seeded from the same 64-bit seed.
"""

from __future__ import annotations

from collections.abc import Iterator

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15


class SplitMix64:
    """Sebastiano Vigna's SplitMix64.

    >>> g = SplitMix64(0)
    >>> hex(g.next_u64())
    '0xe220a8397b1dcdaf'
    """

    def __init__(self, seed: int) -> None:
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + GOLDEN_GAMMA) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def randint(self, lo: int, hi: int) -> int:
        """Integer in ``lo..hi`` inclusive, as ``lo + u64 % (hi - lo + 1)``.

        The modulo bias is below 2**-58 for the small ranges used here.
        """
        return lo + self.next_u64() % (hi - lo + 1)

    def __iter__(self) -> Iterator[int]:
        while True:
            yield self.next_u64()
