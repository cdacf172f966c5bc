"""Counter-based random streams.

Every draw is addressed by ``(key, item index)``, so any index range can be
generated independently and in any order with identical results.
"""
from __future__ import annotations

import zlib

import numpy as np
from scipy.special import ndtri

_WORDS_PER_BLOCK = 4  # Philox4x64 emits four 64-bit words per counter step


def derive_key(seed: int, *labels: str) -> np.ndarray:
    """128-bit Philox key for the substream named by ``labels`` under ``seed``."""
    entropy = [int(seed) & 0xFFFFFFFFFFFFFFFF] + [zlib.crc32(label.encode()) for label in labels]
    return np.random.SeedSequence(entropy).generate_state(2, dtype=np.uint64)


def raw_words(key: np.ndarray, start: int, count: int, words_per_item: int) -> np.ndarray:
    """uint64 words of shape (count, words_per_item) for items start..start+count-1."""
    blocks = -(-words_per_item // _WORDS_PER_BLOCK)
    gen = np.random.Philox(key=key, counter=int(start) * blocks)
    out = gen.random_raw(count * blocks * _WORDS_PER_BLOCK)
    return out.reshape(count, blocks * _WORDS_PER_BLOCK)[:, :words_per_item]


def bits(key: np.ndarray, start: int, count: int, width: int) -> np.ndarray:
    """Uniform bits of shape (count, width), dtype uint8."""
    words = raw_words(key, start, count, -(-width // 64))
    packed = words.astype("<u8").view(np.uint8).reshape(count, -1)
    return np.unpackbits(packed, axis=1, bitorder="little")[:, :width]


def normals(key: np.ndarray, start: int, count: int, per_item: int) -> np.ndarray:
    """Standard normal draws of shape (count, per_item) by inverse CDF."""
    words = raw_words(key, start, count, per_item)
    u = ((words >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53
    return ndtri(u)
