"""Counter-based random number generation for reproducible chains.

The generator is SplitMix64: output ``i`` is a bijective 64-bit mix of
``seed + (i+1)*GOLDEN``, so the whole stream is addressed by a single draw
counter.  That makes checkpointing trivial (store the counter), makes skipping
ahead O(1), and lets the jitted kernels and the pure-Python reference path
consume bit-identical streams.  Chains are split by XOR-ing the chain id into
the master seed.
"""

from __future__ import annotations

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15


def mix64(z: int) -> int:
    """SplitMix64 finalizer: bijective avalanche mix of a 64-bit word."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def chain_seed(master_seed: int, chain_id: int) -> int:
    """Per-chain seed: master seed XOR chain id, remixed to decorrelate."""
    return mix64((master_seed ^ chain_id) & MASK64)


class SplitMix64:
    """Stream view of the counter-based generator.

    State is ``(seed, draws)``; two instances with equal state produce equal
    futures regardless of how they got there.
    """

    __slots__ = ("seed", "draws")

    def __init__(self, seed: int, draws: int = 0):
        self.seed = seed & MASK64
        self.draws = draws

    def next_u64(self) -> int:
        self.draws += 1
        return mix64((self.seed + self.draws * GOLDEN) & MASK64)

    def randint(self, n: int) -> int:
        """Uniform integer in [0, n).  Modulo bias is O(n/2^64), negligible."""
        return self.next_u64() % n

    def jump_to(self, draws: int) -> None:
        self.draws = draws

    def clone(self) -> "SplitMix64":
        return SplitMix64(self.seed, self.draws)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, SplitMix64)
            and self.seed == other.seed
            and self.draws == other.draws
        )

    def __repr__(self) -> str:
        return f"SplitMix64(seed={self.seed:#x}, draws={self.draws})"
