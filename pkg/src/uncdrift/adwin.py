"""ADWIN change detector over an exponential histogram of buckets.

Row ``i`` of the histogram holds buckets that each summarise ``2**i``
consecutive values. New values enter row 0; whenever a row holds more than
``max_buckets`` buckets its two oldest merge into one bucket of the next
row. The oldest data therefore lives in the highest row.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConfigurationError, InputError

MAX_BUCKETS = 5
MIN_SUBWINDOW = 5


@dataclass(frozen=True)
class DriftVerdict:
    drift_detected: bool
    width_after: int
    mean_after: float


def cut_threshold(n0: int, n1: int, variance: float, log_term: float) -> float:
    """Variance-aware bound on ``|mean0 - mean1|`` for sub-windows of size n0, n1.

    ``log_term`` is ``ln(2 / delta')`` with ``delta' = delta / ln(n0 + n1)``.
    """
    m = 1.0 / (1.0 / n0 + 1.0 / n1)
    return math.sqrt((2.0 / m) * variance * log_term) + (2.0 / (3.0 * m)) * log_term


def log_term(delta: float, width: int) -> float:
    return math.log(2.0 * math.log(width) / delta)


class Adwin:
    """Adaptive windowing detector with sensitivity ``delta``.

    >>> det = Adwin(0.002)
    >>> det.insert(0.7).drift_detected
    False
    >>> det.width
    1
    """

    def __init__(self, delta: float = 0.002, max_buckets: int = MAX_BUCKETS,
                 min_subwindow: int = MIN_SUBWINDOW):
        if not 0.0 < delta < 1.0:
            raise ConfigurationError(f"delta must lie in (0, 1), got {delta}")
        if max_buckets < 2:
            raise ConfigurationError("max_buckets must be >= 2")
        self.delta = float(delta)
        self.max_buckets = max_buckets
        self.min_subwindow = max(1, min_subwindow)
        self.reset()

    def reset(self) -> None:
        # per row, oldest bucket first
        self._totals: list[list[float]] = [[]]
        self._variances: list[list[float]] = [[]]
        self.width = 0
        self.total_sum = 0.0
        self.total_variance = 0.0
        self._mean = 0.0
        self.detections = 0

    @property
    def mean(self) -> float:
        return self._mean if self.width else 0.0

    @property
    def variance(self) -> float:
        return self.total_variance / self.width if self.width else 0.0

    def stats(self) -> tuple[int, float, float]:
        return self.width, self.mean, self.variance

    @property
    def num_rows(self) -> int:
        return len(self._totals)

    def buckets(self) -> list[tuple[int, float, float]]:
        """``(capacity, total, variance_acc)`` for every bucket, oldest first."""
        out = []
        for row in range(len(self._totals) - 1, -1, -1):
            cap = 1 << row
            out.extend((cap, t, v) for t, v in zip(self._totals[row], self._variances[row]))
        return out

    def insert(self, value: float) -> DriftVerdict:
        x = float(value)
        if not math.isfinite(x):
            raise InputError(f"ADWIN accepts finite values only, got {value!r}")
        self._add(x)
        dropped = self._shrink()
        if dropped:
            self.detections += 1
        return DriftVerdict(dropped, self.width, self.mean)

    def update(self, value: float) -> bool:
        return self.insert(value).drift_detected

    def _add(self, x: float) -> None:
        n = self.width
        if n:
            diff = x - self._mean
            self.total_variance += n * diff * diff / (n + 1)
            self._mean += diff / (n + 1)
        else:
            self._mean = x
        self.width = n + 1
        self.total_sum += x
        self._totals[0].append(x)
        self._variances[0].append(0.0)
        self._compress()

    def _compress(self) -> None:
        row = 0
        totals, variances = self._totals, self._variances
        while len(totals[row]) > self.max_buckets:
            cap = float(1 << row)
            t1, t2 = totals[row].pop(0), totals[row].pop(0)
            v1, v2 = variances[row].pop(0), variances[row].pop(0)
            gap = (t1 - t2) / cap
            merged_var = v1 + v2 + cap * gap * gap / 2.0
            if row + 1 == len(totals):
                totals.append([])
                variances.append([])
            totals[row + 1].append(t1 + t2)
            variances[row + 1].append(merged_var)
            row += 1

    def _drop_oldest(self) -> None:
        top = len(self._totals) - 1
        cap = 1 << top
        t = self._totals[top].pop(0)
        v = self._variances[top].pop(0)
        if not self._totals[top] and top > 0:
            self._totals.pop()
            self._variances.pop()
        rest = self.width - cap
        bucket_mean = t / cap
        if rest:
            new_mean = self._mean + (self._mean - bucket_mean) * cap / rest
            gap = bucket_mean - new_mean
            self.total_variance = max(self.total_variance - v - cap * rest * gap * gap / self.width, 0.0)
            self._mean = new_mean
        else:
            self.total_variance = 0.0
            self._mean = 0.0
        self.width = rest
        self.total_sum -= t

    def _find_cut(self) -> bool:
        # |mean0 - mean1| >= eps  is rewritten as  |s0 - n0*mean| >= sqrt(c1*m) + c2,
        # with m = n0*n1/w, c1 = 2*var*ln(2/delta') and c2 = (2/3)*ln(2/delta')
        w = self.width
        lo = self.min_subwindow
        if w < 2 * lo:
            return False
        ln2 = log_term(self.delta, w)
        c1 = 2.0 * (self.total_variance / w) * ln2 / w
        c2 = 2.0 * ln2 / 3.0
        mean = self.total_sum / w
        hi = w - lo
        n0 = 0
        s0 = 0.0
        totals = self._totals
        for row in range(len(totals) - 1, -1, -1):
            cap = 1 << row
            for t in totals[row]:
                n0 += cap
                if n0 > hi:
                    return False
                s0 += t
                if n0 < lo:
                    continue
                d = abs(s0 - n0 * mean) - c2
                if d >= 0.0 and d * d >= c1 * n0 * (w - n0):
                    return True
        return False

    def _shrink(self) -> bool:
        dropped = False
        while self._find_cut():
            self._drop_oldest()
            dropped = True
        return dropped


def adwin_new(delta: float) -> Adwin:
    return Adwin(delta)


def adwin_insert(detector: Adwin, value: float) -> DriftVerdict:
    return detector.insert(value)


def adwin_reset(detector: Adwin) -> Adwin:
    detector.reset()
    return detector


def adwin_stats(detector: Adwin) -> tuple[int, float, float]:
    return detector.stats()
