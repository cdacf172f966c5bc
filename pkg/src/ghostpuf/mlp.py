"""Dense tanh/sigmoid network trained with Adam on binary cross-entropy.

Everything runs in float64 numpy with a fixed evaluation order, so a given
(data, seed, config) triple always produces the same parameters.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .challenge import InvalidInput, as_bits, transform_challenge

BCE_EPS = 1e-7


@dataclass(frozen=True)
class MlpArchitecture:
    input_width: int
    hidden_sizes: tuple = (32, 64, 32)
    hidden_activation: str = "tanh"
    output_activation: str = "sigmoid"
    use_phi_input_layer: bool = True

    def __post_init__(self):
        object.__setattr__(self, "hidden_sizes", tuple(int(h) for h in self.hidden_sizes))
        if self.input_width < 1 or any(h < 1 for h in self.hidden_sizes):
            raise InvalidInput("layer widths must be >= 1")
        if self.hidden_activation != "tanh" or self.output_activation != "sigmoid":
            raise InvalidInput("only tanh hidden layers and a sigmoid output are supported")

    @property
    def layer_sizes(self) -> tuple:
        return (self.input_width, *self.hidden_sizes, 1)


@dataclass
class MlpModel:
    architecture: MlpArchitecture
    weights: list  # (fan_in, fan_out) per layer
    biases: list

    def params(self) -> list:
        return [*self.weights, *self.biases]

    def copy(self) -> "MlpModel":
        return MlpModel(self.architecture, [w.copy() for w in self.weights],
                        [b.copy() for b in self.biases])


def init_model(arch: MlpArchitecture, seed: int = 0, zero: bool = False) -> MlpModel:
    """Glorot-uniform weights, zero biases."""
    rng = np.random.default_rng(seed)
    sizes = arch.layer_sizes
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        limit = 0.0 if zero else np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return MlpModel(arch, weights, biases)


def phi_input_layer(rows) -> np.ndarray:
    """Parity transform over the full row width, as float64."""
    return transform_challenge(rows).astype(np.float64)


def features(model_or_arch, rows) -> np.ndarray:
    arch = getattr(model_or_arch, "architecture", model_or_arch)
    if arch.use_phi_input_layer:
        return phi_input_layer(rows)
    # raw-bit ablation: bits fed as +/-1 so both encodings share a scale
    return 2.0 * as_bits(rows, "input").astype(np.float64) - 1.0


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _activations(model: MlpModel, x: np.ndarray) -> list:
    acts = [x]
    last = len(model.weights) - 1
    for i, (w, b) in enumerate(zip(model.weights, model.biases)):
        z = acts[-1] @ w + b
        acts.append(_sigmoid(z) if i == last else np.tanh(z))
    return acts


def forward(model: MlpModel, x) -> np.ndarray:
    """Output probabilities of shape (N,) for a feature batch x of shape (N, width)."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != model.architecture.input_width:
        raise InvalidInput(f"expected input of width {model.architecture.input_width}, got {x.shape}")
    return _activations(model, x)[-1][:, 0]


def predict_proba(model: MlpModel, rows) -> np.ndarray:
    return forward(model, features(model, rows))


def bce_loss(p, y) -> float:
    p, y = np.asarray(p, dtype=np.float64), np.asarray(y, dtype=np.float64)
    if p.shape != y.shape:
        raise InvalidInput("probabilities and labels differ in shape")
    p = np.clip(p, BCE_EPS, 1 - BCE_EPS)
    return float(-np.mean(y * np.log(p) + (1 - y) * np.log(1 - p)))


def backward(model: MlpModel, x, y):
    """Exact gradients of the mean clamped BCE; returns (weight_grads, bias_grads)."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    if x.ndim != 2 or x.shape[1] != model.architecture.input_width or x.shape[0] != y.size:
        raise InvalidInput("batch shape does not match the model or the labels")
    acts = _activations(model, x)
    p = acts[-1][:, 0]
    # dL/dz for sigmoid + BCE is p - y; zero where the clamp is active
    delta = ((p - y) * ((p > BCE_EPS) & (p < 1 - BCE_EPS)) / y.size)[:, None]
    gw, gb = [None] * len(model.weights), [None] * len(model.weights)
    for i in range(len(model.weights) - 1, -1, -1):
        gw[i] = acts[i].T @ delta
        gb[i] = delta.sum(axis=0)
        if i:
            delta = (delta @ model.weights[i].T) * (1.0 - acts[i] ** 2)
    return gw, gb


@dataclass
class AdamState:
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0
    m: list = field(default_factory=list)
    v: list = field(default_factory=list)


def optimizer_step(state: AdamState, params: list, grads: list):
    """In-place Adam update of ``params``; returns (params, state)."""
    if not state.m:
        state.m = [np.zeros_like(p) for p in params]
        state.v = [np.zeros_like(p) for p in params]
    state.t += 1
    c1 = 1.0 - state.beta1 ** state.t
    c2 = 1.0 - state.beta2 ** state.t
    for p, g, m, v in zip(params, grads, state.m, state.v):
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * g * g
        p -= state.lr * (m / c1) / (np.sqrt(v / c2) + state.eps)
    return params, state


@dataclass(frozen=True)
class TrainConfig:
    max_epochs: int = 300
    patience: int = 5
    batch_size: int = 1000
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    seed: int = 0
    monitor: str = "accuracy"

    def __post_init__(self):
        if self.monitor not in ("accuracy", "loss"):
            raise InvalidInput("monitor must be 'accuracy' or 'loss'")
        if self.batch_size < 1 or not 0 <= self.patience < self.max_epochs:
            raise InvalidInput("need batch_size >= 1 and 0 <= patience < max_epochs")


@dataclass(frozen=True)
class TrainReport:
    epochs_run: int
    best_epoch: int
    best_validation_accuracy: float
    test_accuracy: float | None
    converged: bool
    wall_time: float = field(compare=False)


@dataclass(frozen=True)
class Preset:
    name: str
    hidden_sizes: tuple
    batch_size: int

    def architecture(self, input_width: int, raw_bits: bool = False) -> MlpArchitecture:
        return MlpArchitecture(input_width, self.hidden_sizes, use_phi_input_layer=not raw_bits)

    def config(self, seed: int = 0, **overrides) -> TrainConfig:
        return TrainConfig(batch_size=self.batch_size, seed=seed, **overrides)


PRESETS = {
    "table1": Preset("table1", (32, 64, 32), 1000),
    "table4": Preset("table4", (64, 32, 32, 64), 3000),
    "single-unit": Preset("single-unit", (), 100),
}


def _accuracy(model: MlpModel, x: np.ndarray, y: np.ndarray) -> float:
    return float(np.mean((forward(model, x) >= 0.5) == (y == 1)))


def evaluate(model: MlpModel, crps) -> float:
    """Fraction of predictions (p >= 0.5 -> 1) that match the labels."""
    if len(crps) == 0:
        raise InvalidInput("empty evaluation set")
    return _accuracy(model, features(model, crps.inputs), crps.responses)


def train(model: MlpModel, train_set, val_set, config: TrainConfig, test_set=None,
          success_threshold: float = 0.9, log=None) -> TrainReport:
    """Mini-batch Adam with validation-accuracy early stopping.

    ``model`` is updated in place and left at its best-validation parameters.
    """
    if len(train_set) == 0 or len(val_set) == 0:
        raise InvalidInput("training and validation sets must be nonempty")
    width = model.architecture.input_width
    if train_set.width != width or val_set.width != width:
        raise InvalidInput("CRP width does not match the model input width")
    x_train = features(model, train_set.inputs)
    y_train = train_set.responses.astype(np.float64)
    x_val, y_val = features(model, val_set.inputs), val_set.responses

    start = time.perf_counter()
    rng = np.random.default_rng(config.seed)
    state = AdamState(config.lr, config.beta1, config.beta2, config.eps)
    params = model.params()
    best_score, best_acc, best_epoch, best = -np.inf, -1.0, 0, model.copy()
    stale = 0
    epoch = 0
    for epoch in range(1, config.max_epochs + 1):
        order = rng.permutation(len(y_train))
        for lo in range(0, order.size, config.batch_size):
            idx = order[lo:lo + config.batch_size]
            gw, gb = backward(model, x_train[idx], y_train[idx])
            optimizer_step(state, params, [*gw, *gb])
        p_val = forward(model, x_val)
        acc = float(np.mean((p_val >= 0.5) == (y_val == 1)))
        score = acc if config.monitor == "accuracy" else -bce_loss(p_val, y_val)
        if log:
            log(f"epoch {epoch}: validation accuracy {acc:.4f}")
        if score > best_score:
            best_score, best_acc, best_epoch, best, stale = score, acc, epoch, model.copy(), 0
        else:
            stale += 1
            if stale >= config.patience:
                break
    for dst, src in zip(params, best.params()):
        dst[...] = src
    wall = time.perf_counter() - start

    test_acc = None if test_set is None else evaluate(model, test_set)
    reference = best_acc if test_acc is None else test_acc
    return TrainReport(epoch, best_epoch, best_acc, test_acc, reference >= success_threshold, wall)


def _fmt(x) -> str:
    return format(float(x), ".17g")


def write_model(model: MlpModel, path) -> None:
    arch = model.architecture
    lines = [f"#mlp input_width={arch.input_width} hidden={','.join(map(str, arch.hidden_sizes))} "
             f"hidden_activation={arch.hidden_activation} output_activation={arch.output_activation} "
             f"phi={int(arch.use_phi_input_layer)}"]
    for i, (w, b) in enumerate(zip(model.weights, model.biases)):
        lines.append(f"W{i} {w.shape[0]} {w.shape[1]}")
        lines += [" ".join(_fmt(x) for x in row) for row in w]
        lines.append(f"b{i} {b.size}")
        lines.append(" ".join(_fmt(x) for x in b))
    Path(path).write_text("\n".join(lines) + "\n")


def read_model(path) -> MlpModel:
    lines = Path(path).read_text().splitlines()
    try:
        head = dict(tok.split("=", 1) for tok in lines[0].split()[1:])
        hidden = tuple(int(h) for h in head["hidden"].split(",") if h)
        arch = MlpArchitecture(int(head["input_width"]), hidden, head["hidden_activation"],
                               head["output_activation"], head["phi"] == "1")
        model = init_model(arch, zero=True)
        pos = 1
        for i in range(len(model.weights)):
            rows, cols = (int(t) for t in lines[pos].split()[1:])
            model.weights[i] = np.array([[float(t) for t in lines[pos + 1 + r].split()]
                                         for r in range(rows)]).reshape(rows, cols)
            pos += rows + 1
            model.biases[i] = np.array([float(t) for t in lines[pos + 1].split()]).reshape(-1)
            pos += 2
    except (IndexError, KeyError, ValueError) as exc:
        raise InvalidInput(f"malformed model checkpoint: {exc}") from None
    if [w.shape for w in model.weights] != list(zip(arch.layer_sizes[:-1], arch.layer_sizes[1:])):
        raise InvalidInput("checkpoint matrix shapes do not chain")
    return model
