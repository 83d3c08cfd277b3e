"""Brute-force ADWIN used as an oracle.

Keeps every window value in a list and recomputes means and variance from
scratch. Only the bucket *sizes* are simulated, to know which split points
the bucketed detector examines and how much it drops per cut.
"""

import math

import numpy as np


class ReferenceAdwin:
    def __init__(self, delta, max_buckets=5, min_subwindow=5):
        self.delta = delta
        self.max_buckets = max_buckets
        self.min_subwindow = min_subwindow
        self.values = []
        self.row_counts = [0]

    def _sizes_oldest_first(self):
        sizes = []
        for row in range(len(self.row_counts) - 1, -1, -1):
            sizes.extend([2 ** row] * self.row_counts[row])
        return sizes

    def _has_cut(self):
        w = len(self.values)
        arr = np.array(self.values)
        var = float(np.var(arr))
        delta_prime = self.delta / math.log(w)
        log_term = math.log(2.0 / delta_prime)
        n0 = 0
        for size in self._sizes_oldest_first()[:-1]:
            n0 += size
            n1 = w - n0
            if n0 < self.min_subwindow or n1 < self.min_subwindow:
                continue
            mu0 = math.fsum(self.values[:n0]) / n0
            mu1 = math.fsum(self.values[n0:]) / n1
            m = 1.0 / (1.0 / n0 + 1.0 / n1)
            eps = math.sqrt((2.0 / m) * var * log_term) + (2.0 / (3.0 * m)) * log_term
            if abs(mu0 - mu1) >= eps:
                return True
        return False

    def update(self, value):
        self.values.append(float(value))
        self.row_counts[0] += 1
        row = 0
        while self.row_counts[row] > self.max_buckets:
            self.row_counts[row] -= 2
            if row + 1 == len(self.row_counts):
                self.row_counts.append(0)
            self.row_counts[row + 1] += 1
            row += 1
        dropped = False
        while len(self.values) >= 2 * self.min_subwindow and self._has_cut():
            top = len(self.row_counts) - 1
            self.values = self.values[2 ** top:]
            self.row_counts[top] -= 1
            while len(self.row_counts) > 1 and self.row_counts[-1] == 0:
                self.row_counts.pop()
            dropped = True
        return dropped


def mixed_stream(rng, length=2000):
    """Concatenated constant, ramp, step and noisy segments."""
    out = []
    while len(out) < length:
        kind = rng.integers(4)
        size = int(rng.integers(50, 400))
        level = float(rng.uniform(0, 1))
        if kind == 0:
            seg = np.full(size, level)
        elif kind == 1:
            seg = np.linspace(level, float(rng.uniform(0, 1)), size)
        elif kind == 2:
            seg = np.where(np.arange(size) < size // 2, level, float(rng.uniform(0, 1)))
        else:
            seg = level + rng.normal(0, float(rng.uniform(0.01, 0.3)), size)
        out.extend(seg.tolist())
    return np.array(out[:length])
