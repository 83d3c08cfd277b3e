"""
Running experiments from the command line
=========================================

The ``uncdrift`` command wraps the harness. Here it runs in-process on a CSV
written to a temporary directory.
"""

import csv
import tempfile
from pathlib import Path

from uncdrift.cli import main
from uncdrift.synthetic import concept_flip_stream

work = Path(tempfile.mkdtemp())
data = work / "flip.csv"
stream = concept_flip_stream(4000, seed=2)
with data.open("w", newline="") as fh:
    csv.writer(fh).writerows([*row, label] for row, label in zip(stream.features.tolist(), stream.labels))

###############################################################################
# Baseline and detect runs over three seeds, then the equal-positions check
# with the detector's retraining count copied per seed.

quick = ["--set", "epochs=20", "--seeds", "0,1,2", "--out", str(work / "results")]
main(["baseline", "--dataset", str(data), *quick])
main(["run", "--dataset", str(data), *quick])
main(["validate-positions", "--dataset", str(data), "--strategy", "equal", *quick])

###############################################################################
# ``report`` merges every result file into a comparison table: one row per
# mode, one column per estimator, cells "MCC (retrainings)".

main(["report", "--out", str(work / "results")])
print((work / "results" / "comparison.csv").read_text())
