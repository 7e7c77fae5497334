"""Seeded random sources for the Monte Carlo replicas."""

import numpy as np

_WORD_BITS = 64


def make_generator(seed: int) -> np.random.Generator:
    """PCG64 generator for one replica."""
    return np.random.Generator(np.random.PCG64(seed))


def derive_seed(base_seed: int, replica: int) -> int:
    """
    64-bit seed of replica r, mixed from (base_seed, r).

    SeedSequence hashes its entropy and spawn key, so neighbouring replica
    indices get unrelated streams and the seed depends on nothing else.
    """
    sequence = np.random.SeedSequence(base_seed, spawn_key=(replica,))
    return int(sequence.generate_state(1, np.uint64)[0])


class BoundedSampler:
    """Uniform integers in [0, bound) from buffered 64-bit words.

    Uses multiply-and-reject over as many words as the bound needs, so the
    draw is exact for bounds beyond 2**64 (neighbour counts grow like 2**K).
    """

    def __init__(self, rng: np.random.Generator, block: int = 4096) -> None:
        self.rng = rng
        self.block = block
        self._words: list[int] = []
        self._pos = 0

    def word(self) -> int:
        if self._pos == len(self._words):
            self._words = self.rng.integers(
                0, 2**_WORD_BITS, size=self.block, dtype=np.uint64
            ).tolist()
            self._pos = 0
        w = self._words[self._pos]
        self._pos += 1
        return w

    def below(self, bound: int) -> int:
        if bound < 1:
            raise ValueError(f"bound must be positive, got {bound}")
        if bound == 1:
            return 0
        words = -(-bound.bit_length() // _WORD_BITS)
        shift = _WORD_BITS * words
        mask = (1 << shift) - 1
        threshold = (1 << shift) % bound
        while True:
            x = 0
            for _ in range(words):
                x = (x << _WORD_BITS) | self.word()
            m = x * bound
            if m & mask >= threshold:
                return m >> shift

    def shuffle(self, items: list[int]) -> None:
        """In-place Fisher-Yates shuffle."""
        for i in range(len(items) - 1, 0, -1):
            j = self.below(i + 1)
            items[i], items[j] = items[j], items[i]
