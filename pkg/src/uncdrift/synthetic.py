"""Synthetic two-class streams for benchmarks and tests."""

from __future__ import annotations

import numpy as np

from .harness import DatasetStream


def concept_flip_stream(n: int = 10_000, flip_at: float = 0.5, seed: int = 0,
                        separation: float = 3.0, spread: float = 0.6,
                        nuisance: float = 2.0) -> DatasetStream:
    """Abrupt switch of the labelling rule halfway through the stream.

    Before the flip the class is the sign of feature 0; blobs sit at
    ``(+-separation, 0)`` with a wide irrelevant spread on feature 1. After
    the flip the class is the sign of feature 1 and the blobs move to
    ``(0, +-separation)``, where the old decision boundary passes straight
    through them. Both concepts together stay linearly separable, so a model
    retrained on a mix of old and new samples can fit both.
    """
    rng = np.random.default_rng(seed)
    cut = int(n * flip_at)
    labels = rng.integers(0, 2, size=n)
    sign = 2.0 * labels - 1.0
    x = np.empty((n, 2))
    x[:cut, 0] = sign[:cut] * separation + rng.normal(0.0, spread, cut)
    x[:cut, 1] = rng.normal(0.0, nuisance, cut)
    # after the flip class 1 lies at negative feature 1, keeping x0 - x1 a joint separator
    x[cut:, 0] = rng.normal(0.0, spread, n - cut)
    x[cut:, 1] = -sign[cut:] * separation + rng.normal(0.0, spread, n - cut)
    return DatasetStream("concept_flip", x, labels, 2)


def stationary_stream(n: int = 10_000, seed: int = 0, separation: float = 2.0,
                      spread: float = 1.0) -> DatasetStream:
    """Two overlapping Gaussian blobs with no change over time."""
    rng = np.random.default_rng(seed)
    labels = rng.integers(0, 2, size=n)
    x = rng.normal(0.0, spread, size=(n, 2))
    x[:, 0] += (2.0 * labels - 1.0) * separation / 2.0
    return DatasetStream("stationary", x, labels, 2)


def constant_stream(n: int = 2_000, num_features: int = 2, seed: int = 0) -> DatasetStream:
    """Every row identical, labels alternate; predictions never change."""
    x = np.ones((n, num_features))
    labels = np.arange(n) % 2
    return DatasetStream("constant", x, labels, 2)
