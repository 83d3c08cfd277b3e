"""Serialisation of runs and reports: JSON per experiment, CSV tables.

Result files carry no timings so that identical commands reproduce them
byte for byte; wall times go to a separate ``timing.log``.
"""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from pathlib import Path
from typing import Iterable

from .harness import ExperimentReport, RunResult, SweepRow
from .metrics import reliability_export

SUMMARY_FIELDS = ["dataset", "estimator", "mode", "seeds", "mcc_mean", "mcc_std", "ece_mean", "ece_std",
                  "retrainings_mean", "retrainings_std"]
RELIABILITY_FIELDS = ["seed", "bin_low", "bin_high", "count", "avg_confidence", "accuracy", "gap"]


def atomic_write_text(path, text: str) -> None:
    """Write to a temporary sibling, then rename over ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def run_record(run: RunResult) -> dict:
    return {
        "seed": run.seed,
        "mcc": run.mcc,
        "ece": run.ece,
        "retraining_count": run.retraining_count,
        "retraining_positions": list(run.retraining_positions),
        "events": [{"trigger_index": e.trigger_index, "training_set_size": e.training_set_size}
                   for e in run.events],
        "online_length": run.online_length,
        "confusion": run.confusion.counts.tolist() if run.confusion is not None else None,
    }


def report_record(report: ExperimentReport, label: str | None = None) -> dict:
    return {
        "dataset": report.dataset,
        "estimator": report.estimator,
        "mode": label or report.mode,
        "mean": {"mcc": report.mean.mcc, "ece": report.mean.ece,
                 "retraining_count": report.mean.retraining_count},
        "std": {"mcc": report.std.mcc, "ece": report.std.ece,
                "retraining_count": report.std.retraining_count},
        "runs": [run_record(r) for r in report.runs],
    }


def to_json(record: dict) -> str:
    return json.dumps(record, indent=2, sort_keys=True) + "\n"


def summary_row(record: dict) -> dict:
    return {
        "dataset": record["dataset"],
        "estimator": record["estimator"],
        "mode": record["mode"],
        "seeds": len(record["runs"]),
        "mcc_mean": _fmt(record["mean"]["mcc"]),
        "mcc_std": _fmt(record["std"]["mcc"]),
        "ece_mean": _fmt(record["mean"]["ece"]),
        "ece_std": _fmt(record["std"]["ece"]),
        "retrainings_mean": _fmt(record["mean"]["retraining_count"]),
        "retrainings_std": _fmt(record["std"]["retraining_count"]),
    }


def _fmt(x) -> str:
    return "" if x is None else repr(float(x))


def csv_text(fieldnames: list[str], rows: Iterable[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=fieldnames, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
    return buf.getvalue()


def reliability_rows(report: ExperimentReport) -> list[dict]:
    """Per-seed bins followed by the bins merged over all seeds (seed ``all``)."""
    rows = []
    merged = None
    for run in report.runs:
        if run.calibration is None:
            continue
        merged = run.calibration if merged is None else merged.merge(run.calibration)
        rows.extend({"seed": run.seed, **_blank_none(r)} for r in reliability_export(run.calibration))
    if merged is not None:
        rows.extend({"seed": "all", **_blank_none(r)} for r in reliability_export(merged))
    return rows


def _blank_none(record: dict) -> dict:
    return {k: ("" if v is None else v) for k, v in record.items()}


def sweep_text(rows: list[SweepRow]) -> str:
    keys = sorted({k for r in rows for k in r.setting})
    return csv_text(["setting", *keys, "mcc", "retraining_count"], (
        {"setting": "default" if not r.setting else ";".join(f"{k}={r.setting[k]}" for k in r.setting),
         **{k: r.setting.get(k, "") for k in keys},
         "mcc": repr(float(r.mcc)), "retraining_count": r.retraining_count}
        for r in rows))


MODE_ORDER = {"baseline": 0, "detect": 1, "fixed-equal": 2, "fixed-random": 3}
ESTIMATOR_ORDER = ["basic", "mcd", "ensemble", "swag", "ash"]


def comparison_table(records: list[dict]) -> str:
    """Datasets as row groups (one row per mode), estimators as columns.

    Cells read ``"<mean MCC> (<mean retrainings>)"``.
    """
    cells: dict[tuple[str, str], dict[str, str]] = {}
    estimators = set()
    for rec in records:
        estimators.add(rec["estimator"])
        cell = f"{rec['mean']['mcc']:.3f} ({rec['mean']['retraining_count']:g})"
        cells.setdefault((rec["dataset"], rec["mode"]), {})[rec["estimator"]] = cell
    cols = [e for e in ESTIMATOR_ORDER if e in estimators] + sorted(estimators - set(ESTIMATOR_ORDER))
    keys = sorted(cells, key=lambda k: (k[0], MODE_ORDER.get(k[1], 9), k[1]))
    return csv_text(["dataset", "mode", *cols],
                    ({"dataset": d, "mode": m, **{c: cells[(d, m)].get(c, "") for c in cols}} for d, m in keys))


def timing_line(report: ExperimentReport, label: str) -> str:
    per_run = " ".join(f"{r.wall_time:.3f}" for r in report.runs)
    return f"{report.dataset}\t{report.estimator}\t{label}\ttotal={report.total_time:.3f}s\truns={per_run}\n"
