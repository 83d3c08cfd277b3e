"""Prequential stream experiments: baseline, entropy-driven ADWIN retraining,
and retraining at prescribed positions.

All three modes share one loop. The online part of the stream is predicted
in chunks of ``batch_size`` rows; the trigger then walks the chunk's
entropies sample by sample. When it fires at online index ``i``, sample
``i`` is still scored by the old model, the estimator is retrained on the
initial set plus the most recent labelled online samples ending at ``i``,
and prediction restarts at ``i + 1``. Chunking therefore never changes which
model scores which sample.
"""

from __future__ import annotations

import csv
import itertools
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .adwin import Adwin
from .errors import ConfigurationError, InputError
from .metrics import CalibrationBins, ConfusionMatrix, RunMetrics, SeedSummary, aggregate_seeds
from .nn import ArchitectureSpec, TrainingSet, TrainOptions
from .uncertainty import Estimator, EstimatorConfig

MODES = ("baseline", "detect", "fixed_positions")


@dataclass
class DatasetStream:
    name: str
    features: np.ndarray
    labels: np.ndarray
    num_classes: int
    label_names: Optional[list[str]] = None

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.features.ndim != 2 or self.features.shape[0] != self.labels.shape[0]:
            raise InputError("features must be (n, d) with one label per row")
        if not np.all(np.isfinite(self.features)):
            raise InputError("stream contains missing or non-finite values")
        if self.labels.size and (self.labels.min() < 0 or self.labels.max() >= self.num_classes):
            raise InputError(f"labels must lie in [0, {self.num_classes})")

    def __len__(self):
        return self.labels.shape[0]

    @property
    def num_features(self) -> int:
        return self.features.shape[1]


def load_stream(path, delimiter: str = ",", feature_scaling: bool = False,
                initial_fraction: float = 0.05, name: Optional[str] = None) -> DatasetStream:
    """Read a headerless CSV: numeric feature columns, label last.

    Labels are mapped to ``0..K-1`` in order of first appearance. With
    ``feature_scaling`` each feature is min-max scaled using only the initial
    fraction of rows; a feature constant there becomes 0 everywhere.
    """
    path = Path(path)
    rows, labels, label_index = [], [], {}
    width = None
    with path.open(newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh, delimiter=delimiter), start=1):
            if not row or all(not c.strip() for c in row):
                continue
            if width is None:
                width = len(row)
                if width < 2:
                    raise InputError(f"{path}:{lineno}: need at least one feature and a label")
            elif len(row) != width:
                raise InputError(f"{path}:{lineno}: expected {width} columns, found {len(row)}")
            try:
                rows.append([float(c) for c in row[:-1]])
            except ValueError as exc:
                raise InputError(f"{path}:{lineno}: non-numeric feature ({exc})") from None
            label = row[-1].strip()
            labels.append(label_index.setdefault(label, len(label_index)))
    if not rows:
        raise InputError(f"{path}: no data rows")
    x = np.array(rows, dtype=np.float64)
    if not np.all(np.isfinite(x)):
        raise InputError(f"{path}: missing or non-finite feature values")
    if feature_scaling:
        x = minmax_scale(x, max(1, math.floor(len(x) * initial_fraction)))
    return DatasetStream(name or path.stem, x, np.array(labels), max(2, len(label_index)),
                         list(label_index))


def minmax_scale(x: np.ndarray, fit_rows: int) -> np.ndarray:
    head = x[:fit_rows]
    lo, hi = head.min(axis=0), head.max(axis=0)
    span = hi - lo
    safe = np.where(span > 0, span, 1.0)
    return np.where(span > 0, (x - lo) / safe, 0.0)


def split_initial(stream: DatasetStream, initial_fraction: float = 0.05) -> tuple[TrainingSet, TrainingSet]:
    if not 0.0 < initial_fraction < 1.0:
        raise ConfigurationError(f"initial_fraction must lie in (0, 1), got {initial_fraction}")
    k = math.floor(len(stream) * initial_fraction)
    if k == 0 or k == len(stream):
        raise InputError(f"split of {len(stream)} rows at {initial_fraction} leaves an empty part")
    return (TrainingSet(stream.features[:k], stream.labels[:k]),
            TrainingSet(stream.features[k:], stream.labels[k:]))


@dataclass(frozen=True)
class ExperimentConfig:
    estimator: EstimatorConfig = EstimatorConfig()
    hidden_sizes: tuple[int, ...] = (32, 16, 8)
    dropout_rate: float = 0.1
    epochs: int = 50
    adwin_delta: float = 0.002
    initial_fraction: float = 0.05
    recency_fraction: float = 0.01
    seeds: tuple[int, ...] = (0, 1, 2, 3, 4)
    mode: str = "detect"
    batch_size: int = 256
    feature_scaling: bool = False
    train: TrainOptions = TrainOptions()
    num_bins: int = 10
    strategy: str = "equal"
    count: Optional[int] = None
    parallel_seeds: int = 1

    def __post_init__(self):
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))
        object.__setattr__(self, "hidden_sizes", tuple(int(h) for h in self.hidden_sizes))
        for name in ("initial_fraction", "recency_fraction"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise ConfigurationError(f"{name} must lie in (0, 1), got {v}")
        if not self.seeds:
            raise ConfigurationError("at least one seed is required")
        if self.mode not in MODES:
            raise ConfigurationError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.strategy not in ("equal", "random"):
            raise ConfigurationError(f"strategy must be 'equal' or 'random', got {self.strategy!r}")
        if self.batch_size < 1:
            raise ConfigurationError("batch_size must be >= 1")
        if not 0.0 < self.adwin_delta < 1.0:
            raise ConfigurationError(f"adwin_delta must lie in (0, 1), got {self.adwin_delta}")

    def architecture(self, stream: DatasetStream) -> ArchitectureSpec:
        return ArchitectureSpec(self.hidden_sizes, stream.num_features, stream.num_classes,
                                self.dropout_rate, self.epochs)

    def with_overrides(self, **changes) -> "ExperimentConfig":
        est = {k: changes.pop(k) for k in list(changes) if k in EstimatorConfig.__dataclass_fields__}
        cfg = replace(self, **changes)
        return replace(cfg, estimator=replace(cfg.estimator, **est)) if est else cfg


@dataclass(frozen=True)
class RetrainingEvent:
    trigger_index: int  # online-relative position of the sample that fired
    training_set_size: int
    duration: float


@dataclass
class RunResult(RunMetrics):
    seed: int = 0
    events: list[RetrainingEvent] = field(default_factory=list)
    confusion: Optional[ConfusionMatrix] = field(default=None, repr=False)
    calibration: Optional[CalibrationBins] = field(default=None, repr=False)
    online_length: int = 0


class _Never:
    def scan(self, entropies, start):
        return None

    def reset(self):
        pass


class _AdwinTrigger:
    def __init__(self, delta: float):
        self.detector = Adwin(delta)

    def scan(self, entropies, start):
        update = self.detector.update
        for j, h in enumerate(entropies.tolist()):
            if update(h):
                return j
        return None

    def reset(self):
        self.detector.reset()


class _PositionTrigger:
    def __init__(self, positions: Sequence[int]):
        self.pending = list(positions)
        self.cursor = 0

    def scan(self, entropies, start):
        if self.cursor < len(self.pending):
            j = self.pending[self.cursor] - start
            if j < len(entropies):
                self.cursor += 1
                return j
        return None

    def reset(self):
        pass


def _seed(seed: int, ordinal: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([int(seed), int(ordinal)])


def _run(stream: DatasetStream, config: ExperimentConfig, seed: int, trigger) -> RunResult:
    started = time.monotonic()
    arch = config.architecture(stream)
    initial, online = split_initial(stream, config.initial_fraction)
    recent = math.floor(len(stream) * config.recency_fraction)
    estimator = Estimator(arch, config.estimator, config.train)
    estimator.fit(initial, _seed(seed, 0))

    confusion = ConfusionMatrix(stream.num_classes)
    bins = CalibrationBins(config.num_bins)
    events: list[RetrainingEvent] = []
    n_online = len(online)
    pos = 0
    while pos < n_online:
        end = min(pos + config.batch_size, n_online)
        probs, entropy = estimator.predict(online.features[pos:end])
        fired = trigger.scan(entropy, pos)
        stop = end if fired is None else pos + fired + 1
        used = probs[:stop - pos]
        predicted = used.argmax(axis=1)
        truth = online.labels[pos:stop]
        confusion.update_many(truth, predicted)
        bins.update_many(np.clip(used.max(axis=1), 0.0, 1.0), predicted == truth)
        if fired is not None:
            i = stop - 1
            lo = max(0, i + 1 - recent)
            data = TrainingSet(np.vstack([initial.features, online.features[lo:i + 1]]),
                               np.concatenate([initial.labels, online.labels[lo:i + 1]]))
            t0 = time.monotonic()
            estimator.fit(data, _seed(seed, len(events) + 1))
            events.append(RetrainingEvent(i, len(data), time.monotonic() - t0))
            trigger.reset()
        pos = stop
    return RunResult(
        mcc=confusion.mcc(),
        ece=bins.ece(),
        retraining_positions=[e.trigger_index for e in events],
        wall_time=time.monotonic() - started,
        seed=seed,
        events=events,
        confusion=confusion,
        calibration=bins,
        online_length=n_online,
    )


def run_baseline(stream: DatasetStream, config: ExperimentConfig, seed: int) -> RunResult:
    return _run(stream, config, seed, _Never())


def run_detection(stream: DatasetStream, config: ExperimentConfig, seed: int) -> RunResult:
    return _run(stream, config, seed, _AdwinTrigger(config.adwin_delta))


def run_fixed_positions(stream: DatasetStream, config: ExperimentConfig, seed: int,
                        positions: Sequence[int]) -> RunResult:
    """Retrain exactly after the given online indices; ADWIN is not consulted."""
    _, online = split_initial(stream, config.initial_fraction)
    positions = [int(p) for p in positions]
    if any(b <= a for a, b in zip(positions, positions[1:])):
        raise InputError("positions must be strictly increasing")
    if positions and (positions[0] < 0 or positions[-1] >= len(online)):
        raise InputError(f"positions must lie in [0, {len(online)})")
    return _run(stream, config, seed, _PositionTrigger(positions))


def equal_positions(count: int, online_length: int) -> list[int]:
    if count < 1:
        raise InputError("count must be >= 1")
    return [k * online_length // (count + 1) for k in range(1, count + 1)]


def random_positions(count: int, online_length: int, seed: int) -> list[int]:
    if count > online_length:
        raise InputError(f"cannot draw {count} distinct positions from {online_length}")
    rng = np.random.default_rng([int(seed), 0x706F73])
    return sorted(int(i) for i in rng.choice(online_length, size=count, replace=False))


@dataclass
class ExperimentReport:
    dataset: str
    estimator: str
    mode: str
    runs: list[RunResult]
    mean: SeedSummary
    std: SeedSummary
    total_time: float


def _run_one(stream: DatasetStream, config: ExperimentConfig, seed: int) -> RunResult:
    if config.mode == "baseline":
        return run_baseline(stream, config, seed)
    if config.mode == "detect":
        return run_detection(stream, config, seed)
    _, online = split_initial(stream, config.initial_fraction)
    count = config.count
    if count is None:
        # replicate the number of retrainings the detector triggers for this seed
        count = run_detection(stream, config, seed).retraining_count
    if count == 0:
        positions: list[int] = []
    elif config.strategy == "equal":
        positions = equal_positions(count, len(online))
    else:
        positions = random_positions(count, len(online), seed)
    return run_fixed_positions(stream, config, seed, positions)


def _run_one_packed(args):
    return _run_one(*args)


def run_experiment(stream: DatasetStream, config: ExperimentConfig) -> ExperimentReport:
    """Run the configured mode once per seed and aggregate in seed order."""
    started = time.monotonic()
    jobs = [(stream, config, s) for s in config.seeds]
    if config.parallel_seeds > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=config.parallel_seeds) as pool:
            runs = list(pool.map(_run_one_packed, jobs))
    else:
        runs = [_run_one(*job) for job in jobs]
    mean, std = aggregate_seeds(runs)
    return ExperimentReport(stream.name, config.estimator.kind, config.mode, runs, mean, std,
                            time.monotonic() - started)


SWEEP_KEYS = {
    "T": "mcd_passes",
    "M": "ensemble_members",
    "S": "swag_samples",
    "R": "swag_rank",
    "rank": "swag_rank",
    "pruning": "ash_percent",
    "layer": "ash_layer",
    "delta": "adwin_delta",
    "mcd_passes": "mcd_passes",
    "ensemble_members": "ensemble_members",
    "swag_samples": "swag_samples",
    "swag_rank": "swag_rank",
    "ash_percent": "ash_percent",
    "ash_layer": "ash_layer",
    "adwin_delta": "adwin_delta",
}


@dataclass
class SweepRow:
    setting: dict
    mcc: float
    retraining_count: int
    time: float


def sweep(stream: DatasetStream, config: ExperimentConfig, grid: dict[str, Iterable]) -> list[SweepRow]:
    """Cartesian product over ``grid`` with the first configured seed."""
    unknown = [k for k in grid if k not in SWEEP_KEYS]
    if unknown:
        raise ConfigurationError(f"unknown sweep keys {unknown}; known: {sorted(SWEEP_KEYS)}")
    keys = list(grid)
    seed = config.seeds[0]
    rows = []
    for values in itertools.product(*(list(grid[k]) for k in keys)):
        setting = dict(zip(keys, values))
        cfg = config.with_overrides(**{SWEEP_KEYS[k]: v for k, v in setting.items()})
        run = _run_one(stream, cfg, seed)
        rows.append(SweepRow(setting, run.mcc, run.retraining_count, run.wall_time))
    return rows
