"""Raw 32-bit word streams (big-endian, as consumed by ``dieharder -g 200``)."""

from __future__ import annotations

import io
import warnings
from typing import BinaryIO, Iterable, Iterator

import numpy as np

from ..pcg import PcgConfig, golden_blocks, RANDU_MULTIPLIER


class InsufficientData(Exception):
    pass


class TrailingBytesWarning(UserWarning):
    pass


def read_words(data: bytes) -> np.ndarray:
    """Decode consecutive big-endian 4-byte groups; a trailing fragment is dropped."""
    usable = len(data) - len(data) % 4
    if usable != len(data):
        warnings.warn(
            f"dropping {len(data) - usable} trailing byte(s) of an incomplete word",
            TrailingBytesWarning,
            stacklevel=2,
        )
    return np.frombuffer(data[:usable], dtype=">u4").astype(np.uint32)


def write_words(words: Iterable[int] | np.ndarray) -> bytes:
    """Big-endian serialisation, byte-identical to ``struct.pack('>I', w)`` per word."""
    return np.asarray(words, dtype=np.uint32).astype(">u4").tobytes()


def bits_of(words: np.ndarray | Iterable[int]) -> np.ndarray:
    """32 bits per word, most significant first, as a ``uint8`` 0/1 array."""
    w = np.asarray(words, dtype=np.uint32)
    return np.unpackbits(w.astype(">u4").view(np.uint8))


class WordStream:
    """Sequential reader handing out ``uint32`` arrays without buffering the whole input."""

    def __init__(self, blocks: Iterator[np.ndarray]):
        self._blocks = blocks
        self._pending = np.zeros(0, dtype=np.uint32)
        self.consumed = 0

    @classmethod
    def from_array(cls, words) -> "WordStream":
        return cls(iter([np.asarray(words, dtype=np.uint32)]))

    @classmethod
    def from_file(cls, fh: BinaryIO, chunk_words: int = 1 << 16) -> "WordStream":
        def blocks():
            tail = b""
            while True:
                data = fh.read(4 * chunk_words)
                if not data:
                    break
                data = tail + data
                cut = len(data) - len(data) % 4
                tail = data[cut:]
                yield np.frombuffer(data[:cut], dtype=">u4").astype(np.uint32)
            if tail:
                read_words(tail)  # warns about the fragment

        return cls(blocks())

    @classmethod
    def from_bytes(cls, data: bytes) -> "WordStream":
        return cls.from_file(io.BytesIO(data))

    @classmethod
    def golden(cls, config: PcgConfig) -> "WordStream":
        return cls(golden_blocks(config, None))

    @classmethod
    def randu(cls, seed: int, chunk: int = 1 << 15) -> "WordStream":
        def blocks():
            x = seed & 0x7FFFFFFF
            while True:
                out = np.empty(chunk, dtype=np.uint32)
                for k in range(chunk):
                    x = (x * RANDU_MULTIPLIER) & 0x7FFFFFFF
                    out[k] = x
                yield out

        return cls(blocks())

    def take(self, n: int) -> np.ndarray:
        """Next ``n`` words; raises :class:`InsufficientData` if the stream ends first.

        A failed request consumes nothing.
        """
        parts = [self._pending]
        have = self._pending.size
        while have < n:
            try:
                block = next(self._blocks)
            except StopIteration:
                # keep what was buffered so a smaller request can still succeed
                self._pending = np.concatenate(parts) if len(parts) > 1 else parts[0]
                raise InsufficientData(f"needed {n} words, stream ended after {have}") from None
            parts.append(block)
            have += block.size
        joined = np.concatenate(parts) if len(parts) > 1 else parts[0]
        self._pending = joined[n:]
        self.consumed += n
        return joined[:n]
