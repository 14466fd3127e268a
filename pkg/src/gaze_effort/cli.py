"""Command-line interface: ``gaze-effort <subcommand> ...``."""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from .config import Config, ConfigError, load_config
from .io import ParseError, fixations_csv, metrics_csv, parse_trial, read_metrics_csv
from .model import GazeEffortError, validate_trial
from .pipeline import analyze_trial, parallel_map, run_pipeline, write_outputs
from .stats import InsufficientDataError, correlation_table
from .synth import PRESETS, make_corpus


def _inputs(paths: Sequence[str]) -> list[Path]:
    out: list[Path] = []
    for p in map(Path, paths):
        out += sorted(p.glob("*.jsonl")) if p.is_dir() else [p]
    return out


def _config(args) -> Config:
    cfg = load_config(args.config)
    return cfg.updated(**{
        "grid.n_g": args.n_g,
        "grid.half_angle_deg": args.half_angle,
        "detector.dispersion_deg": args.dispersion_deg,
        "detector.min_fix_ms": args.min_fix_ms,
        "detector.max_gap": args.max_gap,
        "measures.check_set": args.check_set,
        "modes.pg_mode": args.pg_mode,
        "modes.arc_mode": args.arc_mode,
        "modes.support": args.support,
    })


def _emit(text: str, out: Optional[str]):
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_simulate(args) -> int:
    paths = make_corpus(args.preset, args.n_trials, args.seed, args.out, args.jitter_deg)
    print(f"wrote {len(paths)} trials and ledger to {args.out}")
    return 0


def cmd_validate(args) -> int:
    bad = 0
    for path in _inputs(args.inputs):
        try:
            problems = validate_trial(parse_trial(path))
        except (ParseError, OSError) as exc:
            problems = [str(exc)]
        for msg in problems:
            print(f"{path}: {msg}")
        bad += bool(problems)
    print(f"{bad} file(s) with violations", file=sys.stderr)
    return 1 if bad else 0


def cmd_detect(args) -> int:
    cfg = _config(args)
    trials = parallel_map(lambda p: analyze_trial(parse_trial(p), cfg), _inputs(args.inputs), args.threads)
    _emit(fixations_csv(trials), args.out)
    return 0


def cmd_measures(args) -> int:
    cfg = _config(args)
    res = run_pipeline(_inputs(args.inputs), cfg, strict=args.strict, workers=args.threads)
    _emit(metrics_csv(res.rows), args.out)
    for name, err in res.failures:
        print(f"{name}: {err}", file=sys.stderr)
    return 1 if res.failures else 0


def cmd_correlate(args) -> int:
    cfg = load_config(args.config)
    rows = read_metrics_csv(args.metrics)
    try:
        report = correlation_table(rows, alpha_levels=cfg.alpha_levels)
    except InsufficientDataError as exc:
        print(f"correlation: {exc}", file=sys.stderr)
        return 1
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "correlation.csv").write_text(report.to_csv())
    (out / "correlation.md").write_text(report.to_markdown())
    sys.stdout.write(report.to_markdown())
    return 0


def cmd_report(args) -> int:
    cfg = _config(args)
    res = run_pipeline(_inputs(args.inputs), cfg, strict=args.strict, workers=args.threads)
    write_outputs(res, args.out_dir)
    for name, err in res.failures:
        print(f"{name}: {err}", file=sys.stderr)
    if res.report is None:
        print(f"correlation: insufficient data ({res.report_error})", file=sys.stderr)
    else:
        sys.stdout.write(res.report.to_markdown())
    return 1 if res.failures else 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gaze-effort", description=__doc__)
    p.add_argument("--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def pipeline_flags(sp):
        sp.add_argument("inputs", nargs="+", help="gaze logs (.jsonl) or directories of them")
        sp.add_argument("--config", help="flat key = value config file")
        sp.add_argument("--dispersion-deg", type=float, help="I-DT dispersion threshold (deg)")
        sp.add_argument("--min-fix-ms", type=float, help="minimum fixation duration (ms)")
        sp.add_argument("--max-gap", type=int, help="unusable samples tolerated inside a fixation")
        sp.add_argument("--arc-mode", choices=("path", "endpoint"))
        sp.add_argument("--pg-mode", choices=("cell", "value-binned"))
        sp.add_argument("--support", choices=("auto", "aoi", "grid"))
        sp.add_argument("--n-g", type=int, help="grid cells per axis")
        sp.add_argument("--half-angle", type=float, help="grid half field of view (deg)")
        sp.add_argument("--check-set", help="comma-separated AOI labels counted by the check rate")
        sp.add_argument("--threads", type=int, help="worker threads (default: GAZE_EFFORT_THREADS or CPU count)")

    sp = sub.add_parser("simulate", help="write a synthetic corpus and its ledger")
    sp.add_argument("--preset", choices=PRESETS, default="mixed")
    sp.add_argument("--n-trials", type=int, default=56)
    sp.add_argument("--seed", type=int, default=7)
    sp.add_argument("--jitter-deg", type=float, default=0.1)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("validate", help="check gaze logs against the data invariants")
    sp.add_argument("inputs", nargs="+")
    sp.set_defaults(func=cmd_validate)

    sp = sub.add_parser("detect", help="detect fixations, write a fixation table")
    pipeline_flags(sp)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_detect)

    sp = sub.add_parser("measures", help="compute per-trial metrics CSV")
    pipeline_flags(sp)
    sp.add_argument("--out")
    sp.add_argument("--strict", action="store_true")
    sp.set_defaults(func=cmd_measures)

    sp = sub.add_parser("correlate", help="correlation report from a metrics CSV")
    sp.add_argument("metrics")
    sp.add_argument("--config")
    sp.add_argument("--out-dir", required=True)
    sp.set_defaults(func=cmd_correlate)

    sp = sub.add_parser("report", help="full pipeline: metrics, fixations and correlation report")
    pipeline_flags(sp)
    sp.add_argument("--out-dir", required=True)
    sp.add_argument("--strict", action="store_true")
    sp.set_defaults(func=cmd_report)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except GazeEffortError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
