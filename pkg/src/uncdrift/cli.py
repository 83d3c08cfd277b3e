"""Command-line entry point.

    uncdrift run --dataset gas.csv --estimator swag
    uncdrift baseline --dataset gas.csv
    uncdrift validate-positions --dataset gas.csv --strategy equal --count 52
    uncdrift sweep --dataset gas.csv --estimator mcd --grid T=25,50,75,100
    uncdrift report --out results/
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from . import report as rep
from .config import experiment_config, load_config
from .errors import ConfigurationError, InputError
from .harness import load_stream, run_experiment, sweep
from .uncertainty import ESTIMATOR_KINDS

VERBS = ("run", "baseline", "validate-positions", "sweep", "report")
OUT_ENV = "UNCDRIFT_OUT"


@dataclass
class Command:
    verb: str
    dataset: Optional[Path] = None
    config: Optional[Path] = None
    out: Path = Path("results")
    overrides: dict = field(default_factory=dict)
    grid: dict = field(default_factory=dict)
    delimiter: str = ","


def _value(text: str):
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    low = text.lower()
    if low in ("true", "false"):
        return low == "true"
    if "," in text:
        return [_value(t) for t in text.split(",") if t]
    return text


def _key_value(text: str) -> tuple[str, object]:
    if "=" not in text:
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    k, v = text.split("=", 1)
    return k.strip(), _value(v.strip())


def _seeds(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(s) for s in text.split(",") if s.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"seeds must be comma-separated integers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="uncdrift", description="Uncertainty-driven drift detection experiments.")
    sub = parser.add_subparsers(dest="verb", required=True)

    def common(p, dataset_required=True):
        p.add_argument("--dataset", type=Path, required=dataset_required, help="headerless CSV, label last")
        p.add_argument("--config", type=Path, help="YAML file merged over the bundled defaults")
        p.add_argument("--estimator", choices=ESTIMATOR_KINDS)
        p.add_argument("--mode", choices=("baseline", "detect", "fixed_positions"))
        p.add_argument("--delta", type=float, help="ADWIN sensitivity")
        p.add_argument("--seeds", type=_seeds, help="comma-separated, e.g. 0,1,2,3,4")
        p.add_argument("--batch-size", type=int, help="inference chunk size")
        p.add_argument("--delimiter", default=",")
        p.add_argument("--set", dest="overrides", action="append", type=_key_value, default=[],
                       metavar="KEY=VALUE", help="override any configuration key")
        p.add_argument("--parallel-seeds", type=int)
        p.add_argument("--out", type=Path)

    for verb in ("run", "baseline"):
        common(sub.add_parser(verb))
    vp = sub.add_parser("validate-positions")
    common(vp)
    vp.add_argument("--strategy", choices=("equal", "random"), default="equal")
    vp.add_argument("--count", type=int, help="number of retrainings; default copies the detector's count")
    sp = sub.add_parser("sweep")
    common(sp)
    sp.add_argument("--grid", action="append", type=_key_value, default=[], metavar="KEY=V1,V2,...")
    rp = sub.add_parser("report")
    rp.add_argument("--out", type=Path, help="results directory to merge")
    return parser


def parse_args(argv=None) -> Command:
    """Strict parsing; usage errors exit with status 2."""
    ns = build_parser().parse_args(argv)
    out = ns.out or Path(os.environ.get(OUT_ENV, "results"))
    if ns.verb == "report":
        return Command("report", out=out)
    overrides = dict(ns.overrides)
    defaults = {"run": "detect", "baseline": "baseline", "validate-positions": "fixed_positions", "sweep": "detect"}
    overrides.setdefault("mode", defaults[ns.verb])
    for flag, key in (("estimator", "estimator"), ("mode", "mode"), ("delta", "adwin_delta"),
                      ("seeds", "seeds"), ("batch_size", "batch_size"), ("parallel_seeds", "parallel_seeds")):
        value = getattr(ns, flag)
        if value is not None:
            overrides[key] = value
    if ns.verb == "validate-positions":
        overrides["mode"] = "fixed_positions"
        overrides["strategy"] = ns.strategy
        if ns.count is not None:
            overrides["count"] = ns.count
    grid = {}
    if ns.verb == "sweep":
        grid = {k: (v if isinstance(v, list) else [v]) for k, v in ns.grid}
    return Command(ns.verb, ns.dataset, ns.config, out, overrides, grid, ns.delimiter)


def _label(cfg) -> str:
    return f"fixed-{cfg.strategy}" if cfg.mode == "fixed_positions" else cfg.mode


def execute(command: Command) -> int:
    try:
        if command.verb == "report":
            return _report(command)
        if not command.dataset.is_file():
            raise InputError(f"dataset not found: {command.dataset}")
        cfg_dict = load_config(command.config)
        stream_name = command.dataset.stem
        cfg = experiment_config(cfg_dict, stream_name, command.overrides)
        stream = load_stream(command.dataset, command.delimiter, cfg.feature_scaling, cfg.initial_fraction)
        stem = f"{stream.name}_{cfg.estimator.kind}"
        if command.verb == "sweep":
            rows = sweep(stream, cfg, command.grid)
            rep.atomic_write_text(command.out / f"{stem}_sweep.csv", rep.sweep_text(rows))
            for r in rows:
                print(f"{stream.name} {cfg.estimator.kind} {r.setting or 'default'} mcc={r.mcc:.4f} "
                      f"retrainings={r.retraining_count} time={r.time:.1f}s")
            return 0
        result = run_experiment(stream, cfg)
        label = _label(cfg)
        record = rep.report_record(result, label)
        base = command.out / f"{stem}_{label}"
        rep.atomic_write_text(base.with_suffix(".json"), rep.to_json(record))
        rep.atomic_write_text(Path(f"{base}_summary.csv"), rep.csv_text(rep.SUMMARY_FIELDS, [rep.summary_row(record)]))
        rep.atomic_write_text(Path(f"{base}_reliability.csv"),
                              rep.csv_text(rep.RELIABILITY_FIELDS, rep.reliability_rows(result)))
        with open(command.out / "timing.log", "a") as fh:
            fh.write(rep.timing_line(result, label))
        print(f"{stream.name} {cfg.estimator.kind} {label}: mcc={result.mean.mcc:.4f} ece={result.mean.ece:.4f} "
              f"retrainings={result.mean.retraining_count:g} time={result.total_time:.1f}s")
        return 0
    except (InputError, ConfigurationError, OSError) as exc:
        print(f"uncdrift: error: {exc}", file=sys.stderr)
        return 1


def _report(command: Command) -> int:
    import json

    directory = command.out
    if not directory.is_dir():
        raise InputError(f"results directory not found: {directory}")
    records = []
    for path in sorted(directory.glob("*.json")):
        with path.open() as fh:
            rec = json.load(fh)
        if {"dataset", "estimator", "mode", "mean", "runs"} <= set(rec):
            records.append(rec)
    if not records:
        raise InputError(f"no result files in {directory}")
    rep.atomic_write_text(directory / "comparison.csv", rep.comparison_table(records))
    rep.atomic_write_text(directory / "summary.csv",
                          rep.csv_text(rep.SUMMARY_FIELDS, [rep.summary_row(r) for r in records]))
    print(f"merged {len(records)} result files into {directory / 'comparison.csv'}")
    return 0


def main(argv=None) -> int:
    return execute(parse_args(argv))


if __name__ == "__main__":
    sys.exit(main())
