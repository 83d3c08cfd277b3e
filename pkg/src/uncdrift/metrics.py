"""Streaming MCC and ECE accumulators, reliability records, seed aggregation."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from typing import Optional, Sequence

import numpy as np

from .errors import InputError, StateError


class ConfusionMatrix:
    """``counts[t, p]`` = number of samples of true class t predicted as p."""

    def __init__(self, num_classes: int):
        if num_classes < 2:
            raise InputError("need at least two classes")
        self.counts = np.zeros((num_classes, num_classes), dtype=np.int64)

    @property
    def num_classes(self) -> int:
        return self.counts.shape[0]

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def update(self, true_label: int, predicted_label: int) -> "ConfusionMatrix":
        k = self.num_classes
        if not (0 <= true_label < k and 0 <= predicted_label < k):
            raise InputError(f"labels ({true_label}, {predicted_label}) outside [0, {k})")
        self.counts[true_label, predicted_label] += 1
        return self

    def update_many(self, true_labels, predicted_labels) -> "ConfusionMatrix":
        t = np.asarray(true_labels, dtype=np.int64)
        p = np.asarray(predicted_labels, dtype=np.int64)
        k = self.num_classes
        if t.size and (t.min() < 0 or t.max() >= k or p.min() < 0 or p.max() >= k):
            raise InputError(f"labels outside [0, {k})")
        np.add.at(self.counts, (t, p), 1)
        return self

    def merge(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        out = ConfusionMatrix(self.num_classes)
        out.counts = self.counts + other.counts
        return out

    def mcc(self) -> float:
        return mcc(self)


def confusion_update(matrix: ConfusionMatrix, true_label: int, predicted_label: int) -> ConfusionMatrix:
    return matrix.update(true_label, predicted_label)


def mcc(matrix) -> float:
    """Multiclass Matthews correlation (Gorodkin's R_K); 0 when undefined."""
    c = matrix.counts if isinstance(matrix, ConfusionMatrix) else np.asarray(matrix)
    c = c.astype(np.float64)
    s = c.sum()
    if s == 0:
        raise StateError("MCC of an empty confusion matrix is undefined")
    correct = np.trace(c)
    t = c.sum(axis=1)
    p = c.sum(axis=0)
    cov_tp = correct * s - float(p @ t)
    cov_pp = s * s - float(p @ p)
    cov_tt = s * s - float(t @ t)
    if cov_pp == 0.0 or cov_tt == 0.0:
        return 0.0
    return float(cov_tp / math.sqrt(cov_pp * cov_tt))


class CalibrationBins:
    """Equal-width confidence bins over [0, 1]."""

    def __init__(self, num_bins: int = 10):
        if num_bins < 1:
            raise InputError("need at least one bin")
        self.num_bins = num_bins
        self.counts = np.zeros(num_bins, dtype=np.int64)
        self.confidence_sums = np.zeros(num_bins)
        self.correct = np.zeros(num_bins, dtype=np.int64)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def bin_index(self, confidence):
        return np.minimum(np.floor(np.asarray(confidence) * self.num_bins).astype(np.int64), self.num_bins - 1)

    def update(self, confidence: float, correct: bool) -> "CalibrationBins":
        return self.update_many([confidence], [correct])

    def update_many(self, confidences, correct) -> "CalibrationBins":
        conf = np.asarray(confidences, dtype=np.float64).ravel()
        ok = np.asarray(correct, dtype=bool).ravel()
        if conf.size and (np.any(~np.isfinite(conf)) or conf.min() < 0.0 or conf.max() > 1.0):
            raise InputError("confidence must lie in [0, 1]")
        idx = self.bin_index(conf)
        np.add.at(self.counts, idx, 1)
        np.add.at(self.confidence_sums, idx, conf)
        np.add.at(self.correct, idx, ok.astype(np.int64))
        return self

    def merge(self, other: "CalibrationBins") -> "CalibrationBins":
        out = CalibrationBins(self.num_bins)
        out.counts = self.counts + other.counts
        out.confidence_sums = self.confidence_sums + other.confidence_sums
        out.correct = self.correct + other.correct
        return out

    def ece(self) -> float:
        return ece(self)

    def reliability(self) -> list[dict]:
        return reliability_export(self)


def calibration_update(bins: CalibrationBins, confidence: float, correct: bool) -> CalibrationBins:
    return bins.update(confidence, correct)


def ece(bins: CalibrationBins) -> float:
    n = bins.total
    if n == 0:
        raise StateError("ECE of empty bins is undefined")
    # n_b/N * |conf_b - acc_b| with the n_b cancelled, which keeps simple cases exact
    return math.fsum(abs(float(s) - float(c)) for s, c in zip(bins.confidence_sums, bins.correct)) / n


def reliability_export(bins: CalibrationBins) -> list[dict]:
    """One record per bin; empty bins carry ``None`` averages."""
    records = []
    b = bins.num_bins
    for i in range(b):
        n = int(bins.counts[i])
        if n:
            conf = float(bins.confidence_sums[i] / n)
            acc = float(bins.correct[i] / n)
            gap: Optional[float] = float((bins.confidence_sums[i] - bins.correct[i]) / n)
        else:
            conf = acc = gap = None
        records.append({
            "bin_low": i / b,
            "bin_high": (i + 1) / b,
            "count": n,
            "avg_confidence": conf,
            "accuracy": acc,
            "gap": gap,
        })
    return records


@dataclass
class RunMetrics:
    mcc: float
    ece: float
    retraining_positions: list[int] = field(default_factory=list)
    wall_time: float = 0.0

    @property
    def retraining_count(self) -> int:
        return len(self.retraining_positions)


@dataclass
class SeedSummary:
    """Mean or standard deviation of the numeric fields of several runs."""

    mcc: float
    ece: float
    retraining_count: float
    wall_time: float


def aggregate_seeds(per_seed: Sequence[RunMetrics]) -> tuple[SeedSummary, SeedSummary]:
    """Mean and population standard deviation across seeds."""
    if not per_seed:
        raise InputError("nothing to aggregate")
    cols = {f.name: np.array([float(getattr(r, f.name)) for r in per_seed]) for f in fields(SeedSummary)}
    mean = SeedSummary(**{k: _mean(v) for k, v in cols.items()})
    std = SeedSummary(**{k: _pstd(v) for k, v in cols.items()})
    return mean, std


def _mean(v: np.ndarray) -> float:
    # identical values stay exact instead of picking up summation rounding
    return float(v[0]) if np.all(v == v[0]) else float(v.mean())


def _pstd(v: np.ndarray) -> float:
    return 0.0 if np.all(v == v[0]) else float(v.std(ddof=0))
