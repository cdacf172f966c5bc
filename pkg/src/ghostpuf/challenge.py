"""Challenge bit vectors and the parity (phi) transform.

Bit order: column 0 is stage 1, the stage nearest the signal entry. All
functions accept a single challenge of shape (n,) or a batch of shape (N, n).
"""
from __future__ import annotations

import numpy as np


class InvalidInput(ValueError):
    """Raised when an argument violates an operation's precondition."""


def as_bits(c, name: str = "challenge") -> np.ndarray:
    arr = np.asarray(c)
    if arr.ndim == 0 or arr.shape[-1] == 0:
        raise InvalidInput(f"{name} must be a non-empty bit vector")
    if arr.dtype != np.uint8:
        if not np.all((arr == 0) | (arr == 1)):
            raise InvalidInput(f"{name} must contain only 0/1 values")
        arr = arr.astype(np.uint8)
    elif arr.max(initial=0) > 1:
        raise InvalidInput(f"{name} must contain only 0/1 values")
    return arr


def transform_challenge(c) -> np.ndarray:
    """phi_i = prod_{j>=i} (2 c_j - 1), returned as int8 in {-1, +1}."""
    bits = as_bits(c)
    signs = (2 * bits.astype(np.int8) - 1)
    return np.flip(np.cumprod(np.flip(signs, -1), axis=-1, dtype=np.int8), -1)


def inverse_transform(phi) -> np.ndarray:
    arr = np.asarray(phi)
    if arr.ndim == 0 or arr.shape[-1] == 0:
        raise InvalidInput("phi must be a non-empty vector")
    if not np.all((arr == 1) | (arr == -1)):
        raise InvalidInput("phi must contain only -1/+1 values")
    arr = arr.astype(np.int8)
    signs = arr.copy()
    signs[..., :-1] = arr[..., :-1] * arr[..., 1:]  # phi_i / phi_{i+1} for +/-1 values
    return ((signs + 1) // 2).astype(np.uint8)


def random_challenge(rng, n: int, count: int | None = None) -> np.ndarray:
    """Uniform challenge(s); ``rng`` is a seed or a ``numpy.random.Generator``."""
    if n < 1:
        raise InvalidInput("stage count must be >= 1")
    rng = np.random.default_rng(rng)
    shape = (n,) if count is None else (count, n)
    return rng.integers(0, 2, size=shape, dtype=np.uint8)
