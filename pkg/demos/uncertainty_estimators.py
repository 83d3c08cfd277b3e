"""
Entropy from five uncertainty estimators
========================================

Each estimator turns a trained network into a predictive distribution and a
Shannon entropy in bits. Points far from the training data should look more
uncertain than points inside a class blob.
"""

import numpy as np

from uncdrift.nn import ArchitectureSpec, TrainingSet
from uncdrift.uncertainty import ESTIMATOR_KINDS, Estimator, EstimatorConfig

rng = np.random.default_rng(1)
labels = rng.integers(0, 2, 500)
features = rng.normal(0, 0.6, (500, 2)) + np.where(labels[:, None] == 1, 2.0, -2.0)
data = TrainingSet(features, labels)

###############################################################################
# Probe points: one inside each blob, one on the boundary between them and one
# off-diagonal point far from both.

probe = np.array([[-2.0, -2.0], [2.0, 2.0], [0.0, 0.0], [2.5, -2.5]])
arch = ArchitectureSpec((32, 16, 8), 2, 2, dropout_rate=0.1, epochs=30)

###############################################################################
# MC-Dropout averages 100 dropout-active passes, the ensemble averages 3
# independently seeded networks, SWAG samples 100 weight vectors from a
# Gaussian fitted to the epoch iterates, and ASH-p zeroes 60% of the
# penultimate hidden activations before a single pass.

for kind in ESTIMATOR_KINDS:
    est = Estimator(arch, EstimatorConfig(kind))
    est.fit(data, seed=0)
    probs, entropy = est.predict(probe)
    cells = "  ".join(f"{h:.3f}" for h in entropy)
    print(f"{kind:9s} entropy [bits]: {cells}   p(class 1) at origin {probs[2, 1]:.2f}")

###############################################################################
# The upper bound for two classes is one bit.
