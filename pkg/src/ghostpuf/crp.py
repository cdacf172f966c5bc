"""Challenge-response pair generation, splitting and text serialization.

CRP i is a function of ``(seed, i)`` only: challenge bits and noise draws come
from counter-addressed substreams, so any chunking reproduces the same set.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import streams
from .challenge import InvalidInput

CHUNK = 100_000


class CrpFormatError(InvalidInput):
    pass


@dataclass(eq=False)
class CrpSet:
    inputs: np.ndarray      # (N, width) uint8
    responses: np.ndarray   # (N,) uint8
    puf_type: str
    seed: int
    noisy: bool

    def __post_init__(self):
        self.inputs = np.asarray(self.inputs, dtype=np.uint8)
        self.responses = np.asarray(self.responses, dtype=np.uint8).reshape(-1)
        if self.inputs.ndim != 2 or self.inputs.shape[0] == 0:
            raise InvalidInput("a CRP set must be a nonempty 2-D array of inputs")
        if self.inputs.shape[0] != self.responses.shape[0]:
            raise InvalidInput("inputs and responses differ in length")

    @property
    def width(self) -> int:
        return self.inputs.shape[1]

    def __len__(self) -> int:
        return self.responses.shape[0]

    def subset(self, index) -> "CrpSet":
        return CrpSet(self.inputs[index], self.responses[index], self.puf_type, self.seed, self.noisy)

    def __eq__(self, other):
        return (isinstance(other, CrpSet) and self.puf_type == other.puf_type
                and self.seed == other.seed and self.noisy == other.noisy
                and np.array_equal(self.inputs, other.inputs)
                and np.array_equal(self.responses, other.responses))


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.85
    validation_fraction: float = 0.05
    test_fraction: float = 0.10

    def __post_init__(self):
        fr = (self.train_fraction, self.validation_fraction, self.test_fraction)
        if any(not 0 <= f <= 1 for f in fr) or abs(sum(fr) - 1) > 1e-9:
            raise InvalidInput("split fractions must lie in [0,1] and sum to 1")


PAPER_SPLIT = SplitSpec()


def _chunk(target, start: int, count: int, seed: int, noisy: bool):
    inputs = streams.bits(streams.derive_key(seed, "challenge"), start, count, target.input_width)
    z = None
    if noisy:
        z = streams.normals(streams.derive_key(seed, "noise"), start, count, target.noise_draws)
    return inputs, target.respond(inputs, z)


def iter_crps(target, count: int, seed: int, noisy: bool = False, start: int = 0,
              chunk: int = CHUNK):
    for lo in range(start, start + count, chunk):
        yield _chunk(target, lo, min(chunk, start + count - lo), seed, noisy)


def generate_crps(target, count: int, seed: int, noisy: bool = False, start: int = 0) -> CrpSet:
    """CRPs with indices start..start+count-1 for ``target``."""
    if count < 1:
        raise InvalidInput("count must be >= 1")
    parts = list(iter_crps(target, count, seed, noisy, start))
    return CrpSet(np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts]),
                  target.type_tag, int(seed), bool(noisy))


def split_sizes(total: int, spec: SplitSpec):
    val = math.floor(spec.validation_fraction * total + 1e-9)
    test = math.floor(spec.test_fraction * total + 1e-9)
    return total - val - test, val, test


def split(crps: CrpSet, spec: SplitSpec = PAPER_SPLIT, seed: int = 0):
    """Seeded shuffle, then (train, validation, test); remainder goes to train."""
    total = len(crps)
    if total < 20:
        raise InvalidInput("need at least 20 CRPs to split")
    n_train, n_val, n_test = split_sizes(total, spec)
    if min(n_train, n_val, n_test) == 0:
        raise InvalidInput(f"degenerate split sizes {(n_train, n_val, n_test)}")
    perm = np.random.default_rng(seed).permutation(total)
    return (crps.subset(perm[:n_train]), crps.subset(perm[n_train:n_train + n_val]),
            crps.subset(perm[n_train + n_val:]))


def _header(width: int, puf_type: str, seed: int, noisy: bool) -> bytes:
    return f"#crp width={width} type={puf_type} seed={seed} noisy={int(noisy)}\n".encode()


def _rows(inputs: np.ndarray, responses: np.ndarray) -> bytes:
    n, w = inputs.shape
    buf = np.empty((n, w + 3), dtype=np.uint8)
    buf[:, :w] = inputs + ord("0")
    buf[:, w] = ord(" ")
    buf[:, w + 1] = responses + ord("0")
    buf[:, w + 2] = ord("\n")
    return buf.tobytes()


def write_crps(crps: CrpSet, destination) -> None:
    with open(destination, "wb") as fh:
        fh.write(_header(crps.width, crps.puf_type, crps.seed, crps.noisy))
        for lo in range(0, len(crps), CHUNK):
            fh.write(_rows(crps.inputs[lo:lo + CHUNK], crps.responses[lo:lo + CHUNK]))


def stream_crps(target, count: int, seed: int, destination, noisy: bool = False) -> None:
    """Generate straight to file without holding the whole set in memory."""
    with open(destination, "wb") as fh:
        fh.write(_header(target.input_width, target.type_tag, seed, noisy))
        for inputs, responses in iter_crps(target, count, seed, noisy):
            fh.write(_rows(inputs, responses))


def read_crps(source) -> CrpSet:
    data = Path(source).read_bytes()
    head, _, body = data.partition(b"\n")
    try:
        fields = dict(tok.split("=", 1) for tok in head.decode().split()[1:])
        if not head.startswith(b"#crp "):
            raise ValueError("missing '#crp'")
        width, puf_type = int(fields["width"]), fields["type"]
        seed, noisy = int(fields["seed"]), fields["noisy"]
        if noisy not in ("0", "1") or width < 1:
            raise ValueError("bad noisy flag or width")
    except (ValueError, KeyError, UnicodeDecodeError) as exc:
        raise CrpFormatError(f"line 1: malformed header ({exc})") from None
    lines = body.split(b"\n")
    if lines and lines[-1] == b"":
        lines.pop()
    if not lines:
        raise CrpFormatError("line 2: no CRP rows")
    stride = width + 2
    bad = [i for i, ln in enumerate(lines) if len(ln) != stride]
    if bad:
        raise CrpFormatError(f"line {bad[0] + 2}: expected {width} bits, a space and a response")
    arr = np.frombuffer(b"".join(lines), dtype=np.uint8).reshape(len(lines), stride)
    ok = np.all((arr[:, :width] == ord("0")) | (arr[:, :width] == ord("1")), axis=1)
    ok &= arr[:, width] == ord(" ")
    ok &= (arr[:, width + 1] == ord("0")) | (arr[:, width + 1] == ord("1"))
    if not ok.all():
        raise CrpFormatError(f"line {int(np.argmin(ok)) + 2}: non-binary symbol or bad separator")
    return CrpSet(arr[:, :width] - ord("0"), arr[:, width + 1] - ord("0"), puf_type, seed, noisy == "1")
