"""Arbiter PUF variants under the additive delay model.

Responses are bits: 1 when the (noisy) delay difference is >= 0, else 0.
Noise is Gaussian on the delay difference with standard deviation
``noisiness * ||w||_2``, drawn independently for every arbiter evaluation.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .challenge import InvalidInput, as_bits, transform_challenge


@dataclass(frozen=True)
class WeightModel:
    tag: str
    mean: float
    std: float

    def __post_init__(self):
        if self.tag not in ("standard-normal", "gate-delay"):
            raise InvalidInput(f"unknown weight model {self.tag!r}")
        if not self.std > 0:
            raise InvalidInput("weight model std must be positive")


STANDARD_NORMAL = WeightModel("standard-normal", 0.0, 1.0)
GATE_DELAY = WeightModel("gate-delay", 300.0, 40.0)


def _check_width(c: np.ndarray, n: int) -> np.ndarray:
    c = as_bits(c)
    if c.shape[-1] != n:
        raise InvalidInput(f"challenge width {c.shape[-1]} does not match {n}")
    return c


def _normals(noise_rng, shape) -> np.ndarray:
    return np.random.default_rng(noise_rng).standard_normal(shape)


@dataclass(frozen=True, eq=False)
class ArbiterPuf:
    w: np.ndarray
    v: float
    noisiness: float = 0.0

    type_tag = "arbiter"
    noise_draws = 1

    def __post_init__(self):
        w = np.asarray(self.w, dtype=np.float64)
        if w.ndim != 1 or w.size < 1:
            raise InvalidInput("w must be a non-empty vector")
        if self.noisiness < 0:
            raise InvalidInput("noisiness must be >= 0")
        w.setflags(write=False)
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "v", float(self.v))
        object.__setattr__(self, "noisiness", float(self.noisiness))

    @property
    def n(self) -> int:
        return self.w.size

    @property
    def input_width(self) -> int:
        return self.n

    @property
    def noise_std(self) -> float:
        return self.noisiness * float(np.linalg.norm(self.w))

    def delay_difference(self, c) -> np.ndarray:
        phi = transform_challenge(_check_width(c, self.n))
        return phi.astype(np.float64) @ self.w + self.v

    def respond(self, c, z=None) -> np.ndarray:
        """Responses given standard normal draws ``z`` (shape (..., 1)) or none."""
        d = self.delay_difference(c)
        if z is not None:
            d = d + self.noise_std * np.asarray(z)[..., 0]
        return (d >= 0).astype(np.uint8)

    def eval(self, c, noise_rng=None):
        c = as_bits(c)
        z = None if noise_rng is None else _normals(noise_rng, c.shape[:-1] + (1,))
        return self.respond(c, z)

    def __eq__(self, other):
        return (type(other) is ArbiterPuf and np.array_equal(self.w, other.w)
                and self.v == other.v and self.noisiness == other.noisiness)


@dataclass(frozen=True, eq=False)
class XorPuf:
    components: tuple

    type_tag = "xor"

    def __post_init__(self):
        comps = tuple(self.components)
        if not comps:
            raise InvalidInput("an XOR PUF needs at least one component")
        if len({p.n for p in comps}) != 1:
            raise InvalidInput("all XOR components must have the same stage count")
        object.__setattr__(self, "components", comps)

    @property
    def k(self) -> int:
        return len(self.components)

    @property
    def n(self) -> int:
        return self.components[0].n

    @property
    def input_width(self) -> int:
        return self.n

    @property
    def noisiness(self) -> float:
        return self.components[0].noisiness

    @property
    def noise_draws(self) -> int:
        return self.k

    def respond(self, c, z=None) -> np.ndarray:
        c = _check_width(c, self.n)
        out = np.zeros(c.shape[:-1], dtype=np.uint8)
        for j, p in enumerate(self.components):
            out ^= p.respond(c, None if z is None else np.asarray(z)[..., j:j + 1])
        return out

    def eval(self, c, noise_rng=None):
        c = as_bits(c)
        z = None if noise_rng is None else _normals(noise_rng, c.shape[:-1] + (self.k,))
        return self.respond(c, z)

    def __eq__(self, other):
        return type(other) is XorPuf and self.components == other.components


def validate_loops(n: int, loops) -> tuple:
    loops = tuple((int(a), int(b)) for a, b in loops)
    if len(loops) >= n:
        raise InvalidInput("an FF PUF needs fewer loops than stages")
    ends = [b for _, b in loops]
    starts = {a for a, _ in loops}
    for a, b in loops:
        if not 1 <= a < b <= n:
            raise InvalidInput(f"loop ({a},{b}) must satisfy 1 <= i1 < i2 <= {n}")
    if len(set(ends)) != len(ends):
        raise InvalidInput("loop-ending stages must be distinct")
    if starts & set(ends):
        raise InvalidInput("a loop-ending stage may not start another loop")
    return loops


def default_loops(n: int, k: int) -> tuple:
    """k loops with ends spread evenly over [n/2, n-1] and length about n/4."""
    if k < 1:
        return ()
    lo, hi = n / 2, n - 1
    ends = sorted({int(round(lo + j * (hi - lo) / max(k - 1, 1))) for j in range(k)})
    if len(ends) != k:
        raise InvalidInput(f"cannot place {k} loops in {n} stages")
    span = int(round(n / 4))
    loops = []
    for b in ends:
        a = max(b - span, 1)
        while a in ends and a > 1:
            a -= 1
        loops.append((a, b))
    return validate_loops(n, loops)


@dataclass(frozen=True, eq=False)
class FfPuf:
    base: ArbiterPuf
    loops: tuple
    inner_bias: np.ndarray

    type_tag = "ff"
    noise_draws = 1

    def __post_init__(self):
        loops = validate_loops(self.base.n, self.loops)
        bias = np.asarray(self.inner_bias, dtype=np.float64).reshape(-1)
        if bias.size != len(loops):
            raise InvalidInput("inner_bias needs one value per loop")
        bias.setflags(write=False)
        object.__setattr__(self, "loops", loops)
        object.__setattr__(self, "inner_bias", bias)

    @property
    def n(self) -> int:
        return self.base.n

    @property
    def k(self) -> int:
        return len(self.loops)

    @property
    def input_width(self) -> int:
        return self.n - self.k

    @property
    def noisiness(self) -> float:
        return self.base.noisiness

    def internal_challenge(self, c_ext) -> np.ndarray:
        """Full n-bit challenge with every loop-ending stage filled in."""
        c_ext = _check_width(c_ext, self.input_width)
        full = np.zeros(c_ext.shape[:-1] + (self.n,), dtype=np.uint8)
        ends = np.array([b for _, b in self.loops], dtype=int) - 1
        free = np.setdiff1d(np.arange(self.n), ends)
        full[..., free] = c_ext
        w = self.base.w
        for j in np.argsort(ends, kind="stable"):
            a, b = self.loops[j]
            phi = transform_challenge(full[..., :a]).astype(np.float64)
            full[..., b - 1] = (phi @ w[:a] + self.inner_bias[j] >= 0)
        return full

    def respond(self, c_ext, z=None) -> np.ndarray:
        return self.base.respond(self.internal_challenge(c_ext), z)

    def eval(self, c_ext, noise_rng=None):
        return self.base.eval(self.internal_challenge(c_ext), noise_rng)

    def __eq__(self, other):
        return (type(other) is FfPuf and self.base == other.base and self.loops == other.loops
                and np.array_equal(self.inner_bias, other.inner_bias))


# Gate-delay columns: straight-top, straight-bottom, crossed-top, crossed-bottom.
def sample_gate_delays(rng, n: int, model: WeightModel = GATE_DELAY) -> np.ndarray:
    if n < 1:
        raise InvalidInput("stage count must be >= 1")
    return np.random.default_rng(rng).normal(model.mean, model.std, size=(n, 4))


def reduce_gate_delays(delays: np.ndarray):
    """Linear weights (w, v) plus per-stage partial biases for a gate-delay chain.

    With a_i = straight skew, b_i = crossed skew, alpha = (a-b)/2 and
    beta = (a+b)/2: w_1 = alpha_1, w_i = alpha_i + beta_{i-1}, v = beta_n.
    The delay difference after stage t equals sum_{i<=t} w_i phi^t_i + beta_t,
    so ``beta[t-1]`` is the bias seen by a feed-forward arbiter tapping stage t.
    """
    delays = np.asarray(delays, dtype=np.float64)
    a = delays[:, 0] - delays[:, 1]
    b = delays[:, 2] - delays[:, 3]
    alpha, beta = (a - b) / 2, (a + b) / 2
    w = alpha.copy()
    w[1:] += beta[:-1]
    return w, float(beta[-1]), beta


def sample_arbiter(rng, n: int, model: WeightModel = STANDARD_NORMAL,
                   noisiness: float = 0.0) -> ArbiterPuf:
    if n < 1:
        raise InvalidInput("stage count must be >= 1")
    rng = np.random.default_rng(rng)
    if model.tag == "gate-delay":
        w, v, _ = reduce_gate_delays(sample_gate_delays(rng, n, model))
    else:
        w = rng.normal(model.mean, model.std, size=n)
        v = rng.normal(model.mean, model.std)
    return ArbiterPuf(w, v, noisiness)


def sample_xor(rng, n: int, k: int, model: WeightModel = STANDARD_NORMAL,
               noisiness: float = 0.0) -> XorPuf:
    if k < 1:
        raise InvalidInput("k must be >= 1")
    rng = np.random.default_rng(rng)
    return XorPuf(tuple(sample_arbiter(rng, n, model, noisiness) for _ in range(k)))


def sample_ff(rng, n: int, loops, model: WeightModel = GATE_DELAY,
              noisiness: float = 0.0) -> FfPuf:
    loops = validate_loops(n, loops)
    rng = np.random.default_rng(rng)
    if model.tag == "gate-delay":
        w, v, beta = reduce_gate_delays(sample_gate_delays(rng, n, model))
        bias = [beta[a - 1] for a, _ in loops]
    else:
        w = rng.normal(model.mean, model.std, size=n)
        v = rng.normal(model.mean, model.std)
        bias = rng.normal(model.mean, model.std, size=len(loops))
    return FfPuf(ArbiterPuf(w, v, noisiness), loops, bias)


def delay_difference(puf: ArbiterPuf, c) -> np.ndarray:
    return puf.delay_difference(c)


def eval_arbiter(puf: ArbiterPuf, c, noise_rng=None):
    return puf.eval(c, noise_rng)


def eval_xor(xpuf: XorPuf, c, noise_rng=None):
    return xpuf.eval(c, noise_rng)


def eval_ff(ffpuf: FfPuf, c_ext, noise_rng=None):
    return ffpuf.eval(c_ext, noise_rng)
