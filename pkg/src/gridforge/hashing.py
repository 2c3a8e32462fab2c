"""Deterministic 64-bit hashing and PRNG primitives shared across the engine."""

from __future__ import annotations

_MASK64 = (1 << 64) - 1

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3


def fnv1a64(data: bytes) -> int:
    """FNV-1a 64-bit hash of a byte string."""
    h = FNV_OFFSET
    for byte in data:
        h = ((h ^ byte) * FNV_PRIME) & _MASK64
    return h


def splitmix64(state: int) -> tuple[int, int]:
    """One splitmix64 step: returns (next_state, output)."""
    state = (state + 0x9E3779B97F4A7C15) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return state, z ^ (z >> 31)


def mix_seed(seed: int, stream: int = 0) -> int:
    """Derive a decorrelated 64-bit seed from (seed, stream)."""
    state = (seed & _MASK64) ^ ((stream & _MASK64) * 0xD1B54A32D192ED03 & _MASK64)
    _, out = splitmix64(state)
    return out


class SplitMix64:
    """Tiny deterministic PRNG stream built on splitmix64.

    Used wherever the artifact needs seeded randomness (level generation,
    random rollout policies).  Kept intentionally independent of ``random``
    so streams are reproducible across platforms and Python versions.
    """

    __slots__ = ("state",)

    def __init__(self, seed: int):
        self.state = seed & _MASK64

    def next_u64(self) -> int:
        self.state, out = splitmix64(self.state)
        return out

    def uniform(self) -> float:
        """Float in [0, 1) with 53 bits of entropy."""
        return (self.next_u64() >> 11) / float(1 << 53)

    def randrange(self, n: int) -> int:
        """Integer in [0, n). Rejection-free modulo is fine for our ranges."""
        if n <= 0:
            raise ValueError("randrange needs n >= 1")
        return self.next_u64() % n

    def choice(self, seq):
        return seq[self.randrange(len(seq))]

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates shuffle."""
        for i in range(len(items) - 1, 0, -1):
            j = self.randrange(i + 1)
            items[i], items[j] = items[j], items[i]
