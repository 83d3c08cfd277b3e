"""Dense ReLU classifier with softmax output, inverted dropout and Adam.

Everything runs in float64. Parameters are plain numpy arrays held by
:class:`ModelParams`; a batch of inputs is a 2-D array ``(n, input_dim)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import ConfigurationError, InputError, ShapeError

PROB_FLOOR = 1e-12


@dataclass(frozen=True)
class ArchitectureSpec:
    hidden_sizes: tuple[int, ...]
    input_dim: int
    num_classes: int
    dropout_rate: float = 0.0
    epochs: int = 1

    def __post_init__(self):
        object.__setattr__(self, "hidden_sizes", tuple(int(h) for h in self.hidden_sizes))
        if not self.hidden_sizes or any(h < 1 for h in self.hidden_sizes):
            raise ConfigurationError(f"hidden_sizes must be non-empty and positive, got {self.hidden_sizes}")
        if self.input_dim < 1:
            raise ConfigurationError(f"input_dim must be >= 1, got {self.input_dim}")
        if self.num_classes < 2:
            raise ConfigurationError(f"num_classes must be >= 2, got {self.num_classes}")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ConfigurationError(f"dropout_rate must lie in [0, 1), got {self.dropout_rate}")
        if self.epochs < 1:
            raise ConfigurationError(f"epochs must be >= 1, got {self.epochs}")

    @property
    def layer_sizes(self) -> tuple[int, ...]:
        return (self.input_dim, *self.hidden_sizes, self.num_classes)


@dataclass
class ModelParams:
    """Per-layer weights ``(fan_in, fan_out)`` and biases ``(fan_out,)``."""

    weights: list[np.ndarray]
    biases: list[np.ndarray]

    def arrays(self) -> list[np.ndarray]:
        out = []
        for w, b in zip(self.weights, self.biases):
            out.extend((w, b))
        return out

    @property
    def num_layers(self) -> int:
        return len(self.weights)

    def copy(self) -> "ModelParams":
        return ModelParams([w.copy() for w in self.weights], [b.copy() for b in self.biases])

    def zeros_like(self) -> "ModelParams":
        return ModelParams([np.zeros_like(w) for w in self.weights], [np.zeros_like(b) for b in self.biases])

    def flatten(self) -> np.ndarray:
        return np.concatenate([a.ravel() for a in self.arrays()])

    def unflatten(self, vector: np.ndarray) -> "ModelParams":
        """New params with this object's shapes, filled from ``vector``."""
        vector = np.asarray(vector, dtype=np.float64)
        if vector.size != self.size:
            raise ShapeError(f"expected {self.size} values, got {vector.size}")
        weights, biases, pos = [], [], 0
        for w, b in zip(self.weights, self.biases):
            weights.append(vector[pos:pos + w.size].reshape(w.shape).copy())
            pos += w.size
            biases.append(vector[pos:pos + b.size].copy())
            pos += b.size
        return ModelParams(weights, biases)

    @property
    def size(self) -> int:
        return sum(a.size for a in self.arrays())


@dataclass
class LayerActivations:
    """Everything a backward pass needs from a forward pass.

    ``inputs[l]`` is the input fed to layer ``l`` (so ``inputs[0]`` is x and
    ``inputs[l]`` for l >= 1 is the post-ReLU, post-dropout output of hidden
    layer ``l - 1``). ``pre[l]`` holds hidden pre-activations and ``masks[l]``
    the scaled dropout mask (None when dropout was inactive).
    """

    inputs: list[np.ndarray]
    pre: list[np.ndarray]
    masks: list[Optional[np.ndarray]]
    logits: np.ndarray
    probs: np.ndarray

    @property
    def hidden(self) -> list[np.ndarray]:
        return self.inputs[1:]


def as_seed_sequence(seed) -> np.random.SeedSequence:
    """Accept an int, a sequence of ints, or an existing SeedSequence."""
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(seed)


def init_params(arch: ArchitectureSpec, seed: int) -> ModelParams:
    """He-normal weights, zero biases."""
    rng = np.random.default_rng(seed)
    sizes = arch.layer_sizes
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        weights.append(rng.normal(0.0, np.sqrt(2.0 / fan_in), size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return ModelParams(weights, biases)


def softmax(logits) -> np.ndarray:
    """Row-wise softmax with max subtraction; accepts 1-D or 2-D input."""
    z = np.asarray(logits, dtype=np.float64)
    shifted = z - z.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def cross_entropy_loss(probs, label) -> float:
    probs = np.asarray(probs, dtype=np.float64)
    label = int(label)
    if not 0 <= label < probs.shape[-1]:
        raise InputError(f"label {label} outside [0, {probs.shape[-1]})")
    return float(-np.log(max(probs[label], PROB_FLOOR)))


def mean_cross_entropy(probs: np.ndarray, labels) -> float:
    labels = _check_labels(labels, probs.shape[1], probs.shape[0])
    picked = np.maximum(probs[np.arange(len(labels)), labels], PROB_FLOOR)
    return float(-np.log(picked).mean())


def _check_labels(labels, num_classes: int, n: int) -> np.ndarray:
    labels = np.asarray(labels, dtype=np.int64).ravel()
    if labels.shape[0] != n:
        raise ShapeError(f"{labels.shape[0]} labels for {n} rows")
    if labels.size and (labels.min() < 0 or labels.max() >= num_classes):
        raise InputError(f"labels must lie in [0, {num_classes})")
    return labels


def _as_batch(x, input_dim: int) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x[None, :]
    if x.ndim != 2 or x.shape[1] != input_dim:
        raise ShapeError(f"expected input with {input_dim} columns, got shape {x.shape}")
    return x


def forward(
    params: ModelParams,
    x,
    train: bool = False,
    rng: Optional[np.random.Generator] = None,
    dropout_rate: float = 0.0,
    hidden_hook: Optional[Callable[[int, np.ndarray], np.ndarray]] = None,
) -> LayerActivations:
    """Run a batch through the network.

    With ``train=True`` and ``dropout_rate > 0`` an inverted dropout mask is
    applied to every hidden layer after the ReLU. ``hidden_hook(l, a)``, if
    given, replaces the output of hidden layer ``l`` (0-based) before it
    feeds the next layer.
    """
    a = _as_batch(x, params.weights[0].shape[0])
    use_dropout = train and dropout_rate > 0.0
    if use_dropout and rng is None:
        raise ConfigurationError("train-mode dropout needs an rng")
    inputs, pre, masks = [a], [], []
    last = params.num_layers - 1
    for l in range(last):
        w, b = params.weights[l], params.biases[l]
        if a.shape[1] != w.shape[0]:
            raise ShapeError(f"layer {l}: input width {a.shape[1]} != fan_in {w.shape[0]}")
        z = a @ w + b
        a = np.maximum(z, 0.0)
        mask = None
        if use_dropout:
            mask = (rng.random(a.shape) >= dropout_rate) / (1.0 - dropout_rate)
            a = a * mask
        if hidden_hook is not None:
            a = hidden_hook(l, a)
        pre.append(z)
        masks.append(mask)
        inputs.append(a)
    logits = a @ params.weights[last] + params.biases[last]
    return LayerActivations(inputs, pre, masks, logits, softmax(logits))


def backward(params: ModelParams, acts: LayerActivations, labels) -> ModelParams:
    """Gradient of the batch-mean cross-entropy, reusing the forward masks."""
    n, k = acts.probs.shape
    labels = _check_labels(labels, k, n)
    if len(acts.inputs) != params.num_layers:
        raise ShapeError("activations were not produced by these params")
    delta = acts.probs.copy()
    delta[np.arange(n), labels] -= 1.0
    delta /= n
    grads = params.zeros_like()
    for l in range(params.num_layers - 1, -1, -1):
        grads.weights[l] = acts.inputs[l].T @ delta
        grads.biases[l] = delta.sum(axis=0)
        if l == 0:
            break
        delta = delta @ params.weights[l].T
        if acts.masks[l - 1] is not None:
            delta = delta * acts.masks[l - 1]
        delta = delta * (acts.pre[l - 1] > 0.0)
    return grads


@dataclass
class AdamState:
    m: list[np.ndarray]
    v: list[np.ndarray]
    t: int = 0
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8

    @classmethod
    def for_params(cls, params: ModelParams, **hyper) -> "AdamState":
        arrays = params.arrays()
        return cls([np.zeros_like(a) for a in arrays], [np.zeros_like(a) for a in arrays], **hyper)


def adam_step(params: ModelParams, grads: ModelParams, state: AdamState) -> tuple[ModelParams, AdamState]:
    """One bias-corrected Adam update, applied in place to ``params`` and ``state``."""
    state.t += 1
    b1, b2 = state.beta1, state.beta2
    c1 = 1.0 - b1 ** state.t
    c2 = 1.0 - b2 ** state.t
    for p, g, m, v in zip(params.arrays(), grads.arrays(), state.m, state.v):
        if p.shape != g.shape:
            raise ShapeError(f"gradient shape {g.shape} != parameter shape {p.shape}")
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * g * g
        p -= state.learning_rate * (m / c1) / (np.sqrt(v / c2) + state.epsilon)
    return params, state


@dataclass
class TrainingSet:
    features: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        if self.features.ndim != 2:
            raise ShapeError("features must be 2-D")
        self.labels = np.asarray(self.labels, dtype=np.int64).ravel()
        if self.labels.shape[0] != self.features.shape[0]:
            raise ShapeError(f"{self.features.shape[0]} feature rows but {self.labels.shape[0]} labels")

    def __len__(self):
        return self.labels.shape[0]


@dataclass
class TrainOptions:
    batch_size: int = 32
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8


EpochObserver = Callable[[int, ModelParams], None]


def train(
    arch: ArchitectureSpec,
    data: TrainingSet,
    seed: int,
    observer: Optional[EpochObserver] = None,
    options: TrainOptions = TrainOptions(),
) -> ModelParams:
    """Mini-batch Adam for ``arch.epochs`` epochs from a fresh He initialisation.

    ``observer(epoch, params)`` is called after every epoch; it must not keep
    a reference to ``params`` without copying, because training continues
    updating the arrays in place.
    """
    if len(data) == 0:
        raise InputError("cannot train on an empty data set")
    if data.features.shape[1] != arch.input_dim:
        raise ShapeError(f"features have {data.features.shape[1]} columns, architecture expects {arch.input_dim}")
    _check_labels(data.labels, arch.num_classes, len(data))
    init_seed, shuffle_seed = as_seed_sequence(seed).spawn(2)
    params = init_params(arch, np.random.default_rng(init_seed).integers(2**63))
    rng = np.random.default_rng(shuffle_seed)
    state = AdamState.for_params(
        params,
        learning_rate=options.learning_rate,
        beta1=options.beta1,
        beta2=options.beta2,
        epsilon=options.epsilon,
    )
    n = len(data)
    for epoch in range(arch.epochs):
        order = rng.permutation(n)
        for start in range(0, n, options.batch_size):
            idx = order[start:start + options.batch_size]
            acts = forward(params, data.features[idx], train=True, rng=rng, dropout_rate=arch.dropout_rate)
            adam_step(params, backward(params, acts, data.labels[idx]), state)
        if observer is not None:
            observer(epoch, params)
    return params


def predict_proba(params: ModelParams, x) -> np.ndarray:
    return forward(params, x).probs


def accuracy(params: ModelParams, data: TrainingSet) -> float:
    return float((predict_proba(params, data.features).argmax(axis=1) == data.labels).mean())
