"""
ADWIN on a step change
======================

The detector keeps a variable-length window of recent values in an
exponential histogram and drops the oldest part when two sub-windows have
clearly different means.
"""

import numpy as np

from uncdrift.adwin import Adwin

rng = np.random.default_rng(3)
stream = np.concatenate([rng.random(5000) < 0.2, rng.random(5000) < 0.8]).astype(float)

det = Adwin(delta=0.002)
for i, value in enumerate(stream):
    verdict = det.insert(value)
    if verdict.drift_detected:
        print(f"drift at {i} ({i - 5000} after the step), window now {verdict.width_after}, "
              f"mean {verdict.mean_after:.3f}")
    if i in (4999, 9999):
        print(f"t={i}: width {det.width}, rows {det.num_rows}, buckets {len(det.buckets())}")

###############################################################################
# Memory stays logarithmic: each row holds at most five buckets and row i
# buckets summarise 2**i values.

print("bucket capacities, oldest first:", [cap for cap, _, _ in det.buckets()])

###############################################################################
# A fair coin gives no detections at this sensitivity.

det.reset()
fires = sum(det.update(v) for v in (rng.random(10_000) < 0.5).astype(float))
print("detections on a stationary coin:", fires)
