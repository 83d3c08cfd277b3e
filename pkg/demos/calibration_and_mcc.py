"""
MCC, ECE and reliability bins
=============================

Both metrics are streaming accumulators: a confusion matrix and ten
equal-width confidence bins, updated one prediction at a time.
"""

import numpy as np

from uncdrift.metrics import CalibrationBins, ConfusionMatrix

rng = np.random.default_rng(4)
n = 5000
truth = rng.integers(0, 3, n)

###############################################################################
# An overconfident classifier: right 70% of the time, claiming 90%.

correct = rng.random(n) < 0.7
predicted = np.where(correct, truth, (truth + rng.integers(1, 3, n)) % 3)
confidence = np.clip(rng.normal(0.9, 0.05, n), 0.34, 1.0)

cm = ConfusionMatrix(3)
bins = CalibrationBins(10)
for t, p, c in zip(truth, predicted, confidence):
    cm.update(t, p)
    bins.update(c, t == p)

print(cm.counts)
print(f"MCC {cm.mcc():.3f}   ECE {bins.ece():.3f}")

###############################################################################
# The reliability records hold what a reliability diagram needs. A negative
# gap means confidence below accuracy.

for rec in bins.reliability():
    if rec["count"]:
        print(f"[{rec['bin_low']:.1f}, {rec['bin_high']:.1f})  n={rec['count']:5d}  "
              f"conf {rec['avg_confidence']:.3f}  acc {rec['accuracy']:.3f}  gap {rec['gap']:+.3f}")
