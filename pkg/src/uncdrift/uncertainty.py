"""Predictive distributions and entropy-based uncertainty for five estimators.

Every ``predict_*`` function accepts a single sample (1-D) or a batch (2-D)
and returns ``(probs, entropy)``; batches give ``(n, K)`` and ``(n,)``.
Entropies are in bits.
"""

from __future__ import annotations

import math
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import ConfigurationError, InputError, ShapeError, StateError
from .nn import ArchitectureSpec, as_seed_sequence, ModelParams, TrainingSet, TrainOptions, forward, train

ESTIMATOR_KINDS = ("basic", "mcd", "ensemble", "swag", "ash")


def bma_average(samples) -> np.ndarray:
    """Mean over the leading (member) axis of a ``(P, ..., K)`` stack."""
    samples = np.asarray(samples, dtype=np.float64)
    if samples.ndim < 2 or samples.shape[0] == 0:
        raise InputError("need at least one member prediction")
    mean = samples.mean(axis=0)
    total = mean.sum(axis=-1, keepdims=True)
    if np.any(np.abs(total - 1.0) > 1e-9):
        mean = mean / total
    return mean


def shannon_entropy(dist) -> np.ndarray | float:
    """Entropy in bits, row-wise for 2-D input, with 0 * log2(0) = 0."""
    p = np.asarray(dist, dtype=np.float64)
    single = p.ndim == 1
    p = np.atleast_2d(p)
    k = p.shape[-1]
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p > 0.0, p * np.log2(np.where(p > 0.0, p, 1.0)), 0.0)
    h = np.clip(-terms.sum(axis=-1), 0.0, math.log2(k))
    # all-equal rows evaluated in closed form so the maximum is hit exactly
    uniform = np.all(p == p[:, :1], axis=-1)
    h = np.where(uniform, math.log2(k), h)
    return float(h[0]) if single else h


def _finish(probs: np.ndarray, single: bool):
    ent = shannon_entropy(probs)
    if single:
        return probs[0], float(ent[0])
    return probs, ent


def _batch(x) -> tuple[np.ndarray, bool]:
    x = np.asarray(x, dtype=np.float64)
    return (x[None, :], True) if x.ndim == 1 else (x, False)


def predict_basic(params: ModelParams, x):
    x, single = _batch(x)
    return _finish(forward(params, x).probs, single)


def predict_mcd(params: ModelParams, x, passes: int, rng: np.random.Generator, dropout_rate: float):
    """``passes`` dropout-active forward passes, averaged."""
    if dropout_rate <= 0.0:
        raise ConfigurationError("MC dropout needs a positive dropout rate")
    if passes < 1:
        raise ConfigurationError("MC dropout needs at least one pass")
    x, single = _batch(x)
    n = x.shape[0]
    stacked = np.tile(x, (passes, 1))
    probs = forward(params, stacked, train=True, rng=rng, dropout_rate=dropout_rate).probs
    return _finish(bma_average(probs.reshape(passes, n, -1)), single)


def predict_ensemble(members: Sequence[ModelParams], x):
    if len(members) == 0:
        raise InputError("ensemble has no members")
    x, single = _batch(x)
    return _finish(bma_average([forward(m, x).probs for m in members]), single)


def predict_swag(sampled_weights: Sequence[ModelParams], x):
    if len(sampled_weights) == 0:
        raise InputError("need at least one weight sample")
    x, single = _batch(x)
    return _finish(bma_average([forward(w, x).probs for w in sampled_weights]), single)


class SwagPosterior:
    """Running SWA moments plus the last ``rank`` deviation vectors.

    >>> post = SwagPosterior(3, rank=2)
    >>> post.observe(np.array([1.0, 2.0, 3.0]))
    >>> post.theta_bar
    array([1., 2., 3.])
    """

    def __init__(self, num_params: int, rank: int = 25):
        if rank < 1:
            raise ConfigurationError("rank must be >= 1")
        self.rank = rank
        self.theta_bar = np.zeros(num_params)
        self.second_moment = np.zeros(num_params)
        self.deviations: deque[np.ndarray] = deque(maxlen=rank)
        self.num_collected = 0

    def observe(self, flat_params: np.ndarray) -> None:
        theta = np.asarray(flat_params, dtype=np.float64).ravel()
        if theta.shape != self.theta_bar.shape:
            raise ShapeError(f"expected {self.theta_bar.size} parameters, got {theta.size}")
        n = self.num_collected
        self.theta_bar = (n * self.theta_bar + theta) / (n + 1)
        self.second_moment = (n * self.second_moment + theta * theta) / (n + 1)
        self.deviations.append(theta - self.theta_bar)
        self.num_collected = n + 1

    @property
    def diag_variance(self) -> np.ndarray:
        return np.maximum(self.second_moment - self.theta_bar ** 2, 0.0)

    def deviation_matrix(self) -> np.ndarray:
        """``(num_params, R')`` with the oldest column first."""
        return np.stack(list(self.deviations), axis=1)

    def sample(self, count: int, rng: np.random.Generator) -> np.ndarray:
        """``count`` flat weight vectors drawn from the low-rank-plus-diagonal Gaussian."""
        cols = len(self.deviations)
        if self.num_collected < 2 or cols < 2:
            raise StateError("SWAG sampling needs at least two collected iterates")
        dev = self.deviation_matrix()
        diag_std = np.sqrt(self.diag_variance)
        z1 = rng.standard_normal((count, self.theta_bar.size))
        z2 = rng.standard_normal((count, cols))
        return (
            self.theta_bar
            + (diag_std * z1) / math.sqrt(2.0)
            + (z2 @ dev.T) / math.sqrt(2.0 * (cols - 1))
        )


def swag_sample_weights(posterior: SwagPosterior, template: ModelParams, count: int, rng) -> list[ModelParams]:
    return [template.unflatten(v) for v in posterior.sample(count, rng)]


def ash_prune(activations, pruning_percent: float) -> np.ndarray:
    """ASH-p: zero the ``floor(n * p / 100)`` smallest entries of each row.

    Ties go to the lower index. Surviving values are untouched.
    """
    a = np.asarray(activations, dtype=np.float64)
    single = a.ndim == 1
    a = np.atleast_2d(a)
    n = a.shape[-1]
    if n == 0:
        raise InputError("cannot prune an empty activation vector")
    k = math.floor(n * pruning_percent / 100)
    out = a.copy()
    if k > 0:
        lowest = np.argsort(a, axis=-1, kind="stable")[:, :k]
        np.put_along_axis(out, lowest, 0.0, axis=-1)
    return out[0] if single else out


@dataclass(frozen=True)
class AshConfig:
    """``layer_index`` counts back from the output layer (output = 0).

    The default 2 selects the penultimate hidden layer, i.e. the third last
    layer overall.
    """

    pruning_percent: float = 60.0
    layer_index: int = 2

    def hidden_position(self, num_hidden: int) -> int:
        if not 1 <= self.layer_index <= num_hidden:
            raise ConfigurationError(
                f"ASH layer_index {self.layer_index} invalid for {num_hidden} hidden layers"
            )
        return num_hidden - self.layer_index


def predict_ash(params: ModelParams, x, config: AshConfig = AshConfig()):
    target = config.hidden_position(params.num_layers - 1)

    def hook(layer, a):
        return ash_prune(a, config.pruning_percent) if layer == target else a

    x, single = _batch(x)
    return _finish(forward(params, x, hidden_hook=hook).probs, single)


@dataclass(frozen=True)
class EstimatorConfig:
    kind: str = "basic"
    mcd_passes: int = 100
    ensemble_members: int = 3
    swag_samples: int = 100
    swag_rank: int = 25
    ash_percent: float = 60.0
    ash_layer: int = 2
    parallel_members: bool = False

    def __post_init__(self):
        if self.kind not in ESTIMATOR_KINDS:
            raise ConfigurationError(f"unknown estimator {self.kind!r}; choose from {ESTIMATOR_KINDS}")
        if self.ensemble_members < 2 and self.kind == "ensemble":
            raise ConfigurationError("an ensemble needs at least two members")


class Estimator:
    """Train-then-predict wrapper used by the stream harness.

    ``fit`` always starts from a fresh initialisation; ``predict`` returns
    ``(probs, entropy)`` for a batch.
    """

    def __init__(self, arch: ArchitectureSpec, config: EstimatorConfig = EstimatorConfig(),
                 options: TrainOptions = TrainOptions()):
        self.arch = arch
        self.config = config
        self.options = options
        if config.kind == "mcd" and arch.dropout_rate <= 0.0:
            raise ConfigurationError("MC dropout needs an architecture with dropout_rate > 0")
        if config.kind == "swag" and (arch.epochs < 2 or config.swag_rank < 2):
            raise ConfigurationError("SWAG needs at least two epochs and rank >= 2")
        if config.kind == "ash":
            AshConfig(config.ash_percent, config.ash_layer).hidden_position(len(arch.hidden_sizes))
        self.params: Optional[ModelParams] = None
        self.members: list[ModelParams] = []
        self.swag_weights: list[ModelParams] = []
        self.posterior: Optional[SwagPosterior] = None
        self._rng: Optional[np.random.Generator] = None

    @property
    def kind(self) -> str:
        return self.config.kind

    def fit(self, data: TrainingSet, seed) -> "Estimator":
        train_seed, infer_seed = as_seed_sequence(seed).spawn(2)
        self._rng = np.random.default_rng(infer_seed)
        cfg = self.config
        if cfg.kind == "ensemble":
            seeds = train_seed.spawn(cfg.ensemble_members)

            def fit_member(s):
                return train(self.arch, data, s, options=self.options)

            if cfg.parallel_members:
                with ThreadPoolExecutor() as pool:
                    self.members = list(pool.map(fit_member, seeds))
            else:
                self.members = [fit_member(s) for s in seeds]
            self.params = self.members[0]
        elif cfg.kind == "swag":
            posterior = None

            def collect(epoch, params):
                nonlocal posterior
                if posterior is None:
                    posterior = SwagPosterior(params.size, cfg.swag_rank)
                posterior.observe(params.flatten())

            self.params = train(self.arch, data, train_seed, observer=collect, options=self.options)
            self.posterior = posterior
            self.swag_weights = swag_sample_weights(posterior, self.params, cfg.swag_samples, self._rng)
        else:
            self.params = train(self.arch, data, train_seed, options=self.options)
        return self

    def predict(self, x):
        if self.params is None:
            raise StateError("estimator has not been fitted")
        cfg = self.config
        if cfg.kind == "basic":
            return predict_basic(self.params, x)
        if cfg.kind == "mcd":
            return predict_mcd(self.params, x, cfg.mcd_passes, self._rng, self.arch.dropout_rate)
        if cfg.kind == "ensemble":
            return predict_ensemble(self.members, x)
        if cfg.kind == "swag":
            return predict_swag(self.swag_weights, x)
        return predict_ash(self.params, x, AshConfig(cfg.ash_percent, cfg.ash_layer))
