"""End-to-end processing: gaze logs -> fixations -> metrics -> correlation report."""
from __future__ import annotations

import dataclasses
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Optional, Sequence, TypeVar

from .config import Config
from .fixation import detect_fixations
from .io import fixations_csv, metrics_csv, parse_trial
from .measures import MetricsRow, metrics_row
from .model import GazeEffortError, Trial
from .retinal import annotate
from .stats import CorrelationReport, InsufficientDataError, correlation_table

log = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def worker_count() -> int:
    cap = os.environ.get("GAZE_EFFORT_THREADS")
    n = os.cpu_count() or 1
    if cap:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError:
            log.warning("ignoring non-integer GAZE_EFFORT_THREADS=%r", cap)
    return n


def parallel_map(fn: Callable[[T], R], items: Sequence[T], workers: Optional[int] = None) -> list[R]:
    """Order-preserving map over a bounded thread pool."""
    workers = workers or worker_count()
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def analyze_trial(trial: Trial, config: Config = Config()) -> Trial:
    """Detect fixations and attach their retinal-flow geometry."""
    fixes = detect_fixations(trial, config.detector)
    return annotate(dataclasses.replace(trial, fixations=tuple(fixes)), config.grid, config.arc_mode)


@dataclass
class PipelineResult:
    trials: list[Trial] = field(default_factory=list)
    rows: list[MetricsRow] = field(default_factory=list)
    report: Optional[CorrelationReport] = None
    failures: list[tuple[str, str]] = field(default_factory=list)
    report_error: Optional[str] = None


def _process(path_or_trial, config: Config):
    name = str(path_or_trial) if not isinstance(path_or_trial, Trial) else path_or_trial.trial_id
    try:
        trial = parse_trial(path_or_trial) if not isinstance(path_or_trial, Trial) else path_or_trial
        trial = analyze_trial(trial, config)
        return name, trial, metrics_row(trial, config), None
    except (GazeEffortError, OSError) as exc:
        return name, None, None, f"{type(exc).__name__}: {exc}"


def run_pipeline(inputs: Iterable, config: Config = Config(), strict: bool = False,
                 workers: Optional[int] = None) -> PipelineResult:
    """Process trial files (or in-memory trials) and correlate the results.

    Failing trials are collected in ``failures`` and skipped, unless
    ``strict`` is set, in which case the first failure is raised.
    """
    items = list(inputs)
    res = PipelineResult()
    for name, trial, row, err in parallel_map(lambda x: _process(x, config), items, workers):
        if err is not None:
            if strict:
                raise GazeEffortError(f"{name}: {err}")
            log.warning("skipping %s: %s", name, err)
            res.failures.append((name, err))
            continue
        res.trials.append(trial)
        res.rows.append(row)
    try:
        res.report = correlation_table([r.values() for r in res.rows], alpha_levels=config.alpha_levels)
    except InsufficientDataError as exc:
        res.report_error = str(exc)
    return res


def write_outputs(res: PipelineResult, out_dir: str | Path) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = [out / "metrics.csv", out / "fixations.csv"]
    written[0].write_text(metrics_csv(res.rows))
    written[1].write_text(fixations_csv(res.trials))
    if res.report is not None:
        (out / "correlation.csv").write_text(res.report.to_csv())
        (out / "correlation.md").write_text(res.report.to_markdown())
        written += [out / "correlation.csv", out / "correlation.md"]
    return written
