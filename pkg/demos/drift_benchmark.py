"""
Retraining on uncertainty drift
===============================

A 10,000-sample stream flips its labelling rule halfway. The model trains on
the first 5%, then predicts the rest in order. In detect mode every
prediction's entropy goes into ADWIN, and a detection retrains the model on
the initial 5% plus the latest 1% of labelled samples.
"""

from uncdrift.harness import ExperimentConfig, equal_positions, run_baseline, run_detection, run_fixed_positions
from uncdrift.synthetic import concept_flip_stream
from uncdrift.uncertainty import EstimatorConfig

stream = concept_flip_stream(10_000, seed=0)
cfg = ExperimentConfig(estimator=EstimatorConfig("mcd", mcd_passes=30), epochs=30)

base = run_baseline(stream, cfg, seed=0)
det = run_detection(stream, cfg, seed=0)
print(f"baseline: MCC {base.mcc:.3f}  ECE {base.ece:.3f}")
print(f"detect:   MCC {det.mcc:.3f}  ECE {det.ece:.3f}  retrainings at {det.retraining_positions}")

###############################################################################
# Online index 4500 is the flip. Each retraining set holds 500 initial plus
# 100 recent samples.

for e in det.events:
    print(f"  retrained after online sample {e.trigger_index} on {e.training_set_size} rows")

###############################################################################
# Position validation: the same number of retrainings spread evenly.

online = len(stream) - 500
even = run_fixed_positions(stream, cfg, 0, equal_positions(max(det.retraining_count, 1), online))
print(f"equal positions {even.retraining_positions}: MCC {even.mcc:.3f}")

###############################################################################
# Replaying the detector's own positions reproduces the detect run exactly.

replay = run_fixed_positions(stream, cfg, 0, det.retraining_positions)
print("replay identical:", (replay.confusion.counts == det.confusion.counts).all())
