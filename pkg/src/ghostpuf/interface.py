"""The m-ghost-bit challenge interface.

An interfaced PUF accepts n+m input bits but wires only a secret, per-instance
subset of n positions to its stages; the other m ghost bits are ignored.
Selected positions feed stages in increasing position order.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .challenge import InvalidInput, as_bits


@dataclass(frozen=True)
class GhostMask:
    n_plus_m: int
    selected: tuple  # 1-based input positions, sorted

    def __post_init__(self):
        sel = tuple(int(i) for i in self.selected)
        if not sel:
            raise InvalidInput("mask must select at least one position")
        if len(set(sel)) != len(sel) or min(sel) < 1 or max(sel) > self.n_plus_m:
            raise InvalidInput("mask positions must be distinct and within 1..n+m")
        object.__setattr__(self, "selected", sel)
        object.__setattr__(self, "_index", np.array(sel, dtype=np.intp) - 1)

    @property
    def n(self) -> int:
        return len(self.selected)

    @property
    def m(self) -> int:
        return self.n_plus_m - self.n

    @property
    def ghosts(self) -> tuple:
        chosen = set(self.selected)
        return tuple(i for i in range(1, self.n_plus_m + 1) if i not in chosen)


def sample_mask(rng, challenge_width: int, m: int) -> GhostMask:
    if challenge_width < 1 or m < 0:
        raise InvalidInput("need challenge_width >= 1 and m >= 0")
    total = challenge_width + m
    rng = np.random.default_rng(rng)
    chosen = np.sort(rng.choice(total, size=challenge_width, replace=False)) + 1
    return GhostMask(total, tuple(chosen.tolist()))


def apply_mask(mask: GhostMask, input_bits) -> np.ndarray:
    bits = as_bits(input_bits, "input")
    if bits.shape[-1] != mask.n_plus_m:
        raise InvalidInput(f"input width {bits.shape[-1]} does not match {mask.n_plus_m}")
    return bits[..., mask._index]


@dataclass(frozen=True)
class InterfacedPuf:
    inner: object
    mask: GhostMask

    def __post_init__(self):
        if self.mask.n != self.inner.input_width:
            raise InvalidInput(
                f"mask selects {self.mask.n} bits but the PUF takes {self.inner.input_width}")

    @property
    def type_tag(self) -> str:
        return self.inner.type_tag

    @property
    def input_width(self) -> int:
        return self.mask.n_plus_m

    @property
    def noise_draws(self) -> int:
        return self.inner.noise_draws

    @property
    def noisiness(self) -> float:
        return self.inner.noisiness

    def respond(self, input_bits, z=None):
        return self.inner.respond(apply_mask(self.mask, input_bits), z)

    def eval(self, input_bits, noise_rng=None):
        return self.inner.eval(apply_mask(self.mask, input_bits), noise_rng)


def interface(rng, puf, m: int) -> InterfacedPuf:
    return InterfacedPuf(puf, sample_mask(rng, puf.input_width, m))


def eval_interfaced(ipuf: InterfacedPuf, input_bits, noise_rng=None):
    return ipuf.eval(input_bits, noise_rng)
