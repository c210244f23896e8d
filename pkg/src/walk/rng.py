"""Counter-based random streams keyed by (seed, stream id).

Each stream owns a Philox key derived from ``SeedSequence(seed, spawn_key=(stream,))``.
Uniforms are produced in fixed-size blocks; block ``b`` is generated by a fresh Philox
generator whose counter starts at ``b * BLOCK // 4`` (Philox emits four 64-bit words per
counter value and each double consumes one word). A stream position is therefore just
``(block, offset)`` and can be saved and restored without replaying the stream.
"""
from __future__ import annotations

from typing import Any, Dict, Optional

import numpy as np

BLOCK = 1 << 16
_WORDS_PER_COUNTER = 4


def stream_key(seed: int, stream: int = 0) -> np.ndarray:
    """128-bit Philox key for (seed, stream)."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(stream),))
    return ss.generate_state(2, dtype=np.uint64)


def _block(key: np.ndarray, index: int, size: int = BLOCK) -> np.ndarray:
    bitgen = np.random.Philox(key=key, counter=index * (size // _WORDS_PER_COUNTER))
    return np.random.Generator(bitgen).random(size)


class RandomSource:
    """Uniform [0, 1) draws from one (seed, stream) pair."""

    def __init__(self, seed: int, stream: int = 0, block: int = 0, offset: int = 0):
        self.seed = int(seed)
        self.stream = int(stream)
        self._key = stream_key(self.seed, self.stream)
        self._block_index = block
        self._buffer = _block(self._key, block)
        self._offset = offset

    def random(self) -> float:
        if self._offset >= BLOCK:
            self._refill()
        u = self._buffer[self._offset]
        self._offset += 1
        return float(u)

    def take(self) -> np.ndarray:
        """Hand out the unread remainder of the current block and advance past it."""
        if self._offset >= BLOCK:
            self._refill()
        chunk = self._buffer[self._offset:]
        self._offset = BLOCK
        return chunk

    def give_back(self, unused: int) -> None:
        """Return the last `unused` draws of the chunk handed out by `take`."""
        self._offset = BLOCK - unused

    def _refill(self) -> None:
        self._block_index += 1
        self._buffer = _block(self._key, self._block_index)
        self._offset = 0

    def split(self, stream: int) -> "RandomSource":
        """Independent stream for the same seed."""
        return RandomSource(self.seed, stream)

    @property
    def position(self) -> int:
        """Number of draws consumed so far."""
        return self._block_index * BLOCK + self._offset

    def snapshot(self) -> Dict[str, Any]:
        return {"seed": self.seed, "stream": self.stream, "block": self._block_index, "offset": self._offset}

    @classmethod
    def restore(cls, state: Dict[str, Any]) -> "RandomSource":
        return cls(state["seed"], state["stream"], state["block"], state["offset"])


class FixedDraws:
    """Replays a given list of draws; handy to pin a CDF bucket in tests."""

    def __init__(self, draws, fallback: Optional[RandomSource] = None):
        self._draws = list(draws)
        self._fallback = fallback

    def random(self) -> float:
        if self._draws:
            return float(self._draws.pop(0))
        if self._fallback is None:
            raise IndexError("no draws left")
        return self._fallback.random()
