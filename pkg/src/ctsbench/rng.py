"""Deterministic pseudorandom primitives used by every seeded step.

All randomness in the pipeline flows through SplitMix64 (Steele, Lea & Flood,
"Fast splittable pseudorandom number generators", OOPSLA 2014) so that runs
are reproducible bit-for-bit from a 64-bit seed, independent of Python's own
``random`` module and its version history.

The generator is pinned exactly:

    state := (state + 0x9E3779B97F4A7C15) mod 2^64
    z := state
    z := ((z XOR (z >> 30)) * 0xBF58476D1CE4E5B9) mod 2^64
    z := ((z XOR (z >> 27)) * 0x94D049BB133111EB) mod 2^64
    output := z XOR (z >> 31)

Integer draws below a bound use rejection sampling (no modulo bias), floats
take the top 53 bits of one output, shuffles are Fisher-Yates from the last
index down, and approximate normals use Irwin-Hall with 12 uniforms (no libm
trig, so the byte stream of generated artifacts does not depend on platform
trigonometry).
"""

from __future__ import annotations

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3


def _mix64(z: int) -> int:
    """SplitMix64 output function applied to a single 64-bit value."""
    z &= _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def _fnv1a(data: bytes) -> int:
    h = _FNV_OFFSET
    for b in data:
        h = ((h ^ b) * _FNV_PRIME) & _MASK64
    return h


def derive_seed(root: int, *parts: int | str) -> int:
    """Derive a domain-separated sub-seed from a root seed.

    Each part (string labels, design/placement indices, ...) is folded into
    the running hash via FNV-1a over its byte encoding, then finalized with
    the SplitMix64 mixer. Independent part tuples give independent streams.
    """
    h = root & _MASK64
    for part in parts:
        if isinstance(part, int):
            data = (part & _MASK64).to_bytes(8, "little")
        else:
            data = str(part).encode("utf-8")
        h = _mix64((h ^ _fnv1a(data)) + _GOLDEN)
    return h


class SplitMix64:
    """Sequential SplitMix64 stream over a 64-bit state."""

    __slots__ = ("_state",)

    def __init__(self, seed: int) -> None:
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GOLDEN) & _MASK64
        return _mix64(self._state)

    def below(self, n: int) -> int:
        """Unbiased integer in [0, n) via rejection sampling."""
        if n <= 0:
            raise ValueError("bound must be positive")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            v = self.next_u64()
            if v < limit:
                return v % n

    def int_in(self, lo: int, hi: int) -> int:
        """Uniform integer in the inclusive range [lo, hi]."""
        if hi < lo:
            raise ValueError("empty range")
        return lo + self.below(hi - lo + 1)

    def uniform(self) -> float:
        """Float in [0, 1) with 53 bits of precision."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def uniform_in(self, lo: float, hi: float) -> float:
        return lo + (hi - lo) * self.uniform()

    def choice(self, seq):
        return seq[self.below(len(seq))]

    def normal(self, mu: float = 0.0, sigma: float = 1.0) -> float:
        """Approximate normal draw (Irwin-Hall, 12 uniforms)."""
        s = sum(self.uniform() for _ in range(12)) - 6.0
        return mu + sigma * s

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates shuffle, deterministic per seed."""
        for i in range(len(items) - 1, 0, -1):
            j = self.below(i + 1)
            items[i], items[j] = items[j], items[i]
