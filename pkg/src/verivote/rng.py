"""Deterministic seeded randomness with labeled stream derivation.

Every operation that consumes randomness takes an explicit ``Prng`` handle.
Streams are SHA-256 in counter mode, so identical seeds reproduce identical
runs on every platform and Python version.
"""

from __future__ import annotations

import hashlib


def _encode_seed(seed: int | str | bytes) -> bytes:
    if isinstance(seed, bytes):
        return seed
    if isinstance(seed, int):
        return str(seed).encode()
    return seed.encode()


class Prng:
    """SHA-256 counter-mode byte stream keyed by a seed and a label path."""

    def __init__(self, seed: int | str | bytes, label: str = ""):
        material = _encode_seed(seed)
        self._key = hashlib.sha256(b"key|" + material + b"|" + label.encode()).digest()
        self._counter = 0
        self._buffer = b""

    def derive(self, label: str) -> "Prng":
        """Independent child stream; children never overlap the parent."""
        child = Prng.__new__(Prng)
        child._key = hashlib.sha256(b"drv|" + self._key + b"|" + label.encode()).digest()
        child._counter = 0
        child._buffer = b""
        return child

    def randbytes(self, n: int) -> bytes:
        while len(self._buffer) < n:
            block = hashlib.sha256(
                b"blk|" + self._key + self._counter.to_bytes(8, "big")
            ).digest()
            self._counter += 1
            self._buffer += block
        out, self._buffer = self._buffer[:n], self._buffer[n:]
        return out

    def below(self, bound: int) -> int:
        """Uniform integer in [0, bound) by rejection sampling."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        bits = bound.bit_length()
        nbytes = (bits + 7) // 8
        mask = (1 << bits) - 1
        while True:
            value = int.from_bytes(self.randbytes(nbytes), "big") & mask
            if value < bound:
                return value

    def randrange(self, start: int, stop: int) -> int:
        return start + self.below(stop - start)

    def getrandbits(self, bits: int) -> int:
        nbytes = (bits + 7) // 8
        value = int.from_bytes(self.randbytes(nbytes), "big")
        return value >> (nbytes * 8 - bits)

    def permutation(self, n: int) -> list[int]:
        """Fisher-Yates permutation of range(n)."""
        perm = list(range(n))
        for i in range(n - 1, 0, -1):
            j = self.below(i + 1)
            perm[i], perm[j] = perm[j], perm[i]
        return perm
