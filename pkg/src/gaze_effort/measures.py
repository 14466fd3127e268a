"""Per-trial cognitive-effort measures, baselines and ground-truth proxies."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from typing import Callable, Iterable, Optional

import numpy as np

from . import distributions as dist
from .config import Config
from .fixation import fixation_rate
from .infotheory import entropy_rate as _entropy_rate
from .infotheory import shannon_entropy, srjsd
from .model import DegenerateError, GazeEffortError, GridSpec, Trial

SRJSD_EPS = 1e-12


class MissingChannelError(GazeEffortError):
    """The trial lacks a channel a measure needs (AOI labels, speed, pupil)."""


@dataclass(frozen=True)
class MetricsRow:
    """One trial's measures. ``None`` marks a value that could not be computed;
    the reason is kept in ``diagnostics`` under the field name."""

    trial_id: str
    cem_vi: Optional[float] = None
    cem_iq: Optional[float] = None
    sge: Optional[float] = None
    entropy_rate: Optional[float] = None
    check_rate: Optional[float] = None
    fixation_rate: Optional[float] = None
    pupil_size_change: Optional[float] = None
    driving_performance: Optional[float] = None
    srjsd_f: Optional[float] = None
    srjsd_fs: Optional[float] = None
    diagnostics: dict[str, str] = field(default_factory=dict, compare=False)

    @classmethod
    def value_fields(cls) -> tuple[str, ...]:
        return tuple(f.name for f in fields(cls) if f.name not in ("trial_id", "diagnostics"))

    def values(self) -> dict[str, Optional[float]]:
        return {k: getattr(self, k) for k in self.value_fields()}


def _cells(trial: Trial, grid: GridSpec) -> list[int]:
    return [dist.grid_cell(f.centroid_dir, grid) for f in trial.fixations]


def cem_vi(trial: Trial, grid: GridSpec = GridSpec(), pg_mode: str = "cell") -> float:
    """Entropy (bits) of the grid view-importance distribution."""
    return shannon_entropy(dist.view_importance_distribution(trial.fixations, grid, pg_mode))


def information_quantity(s: float) -> float:
    """``-log2`` of a divergence read as a probability, clamped to [eps, 1]."""
    return -math.log2(min(1.0, max(SRJSD_EPS, s)))


def cem_iq_from_srjsd(srjsd_f: float, srjsd_fs: float) -> float:
    den = information_quantity(srjsd_fs)
    if den == 0.0:
        raise DegenerateError("transition-level information quantity is zero (SRJSD = 1)")
    return information_quantity(srjsd_f) / den


def scanning_efficiencies(trial: Trial, support: str = "auto") -> tuple[float, float]:
    """SRJSD between location and flow distributions, for fixations and transitions."""
    fx = trial.fixations
    s_f = srjsd(dist.fixation_distribution(fx, support), dist.retinal_flow_distribution(fx, support))
    p_fs, p_rs = dist.transition_distributions(fx, support)
    return s_f, srjsd(p_fs, p_rs)


def cem_iq(trial: Trial, support: str = "auto") -> float:
    return cem_iq_from_srjsd(*scanning_efficiencies(trial, support))


def sge(trial: Trial, grid: GridSpec = GridSpec()) -> float:
    """Stationary gaze entropy over grid cells."""
    if not trial.fixations:
        raise dist.EmptyFixationsError("no fixations")
    cells = np.array(_cells(trial, grid))
    counts = np.bincount(cells, minlength=grid.n_cells)
    return shannon_entropy(counts / counts.sum())


def entropy_rate(trial: Trial, grid: GridSpec = GridSpec()) -> float:
    return _entropy_rate(_cells(trial, grid))


def check_rate(trial: Trial, check_set: Iterable[str]) -> float:
    """Fixations on check AOIs (mirrors, instruments, periphery) per minute."""
    if not any(s.aoi is not None for s in trial.samples):
        raise MissingChannelError("trial has no AOI labels")
    minutes = trial.duration / 60.0
    if not minutes > 0:
        raise DegenerateError("trial spans no time")
    wanted = set(check_set)
    return sum(f.aoi in wanted for f in trial.fixations) / minutes


def pupil_size_change(trial: Trial) -> float:
    """Population standard deviation of usable pupil samples (mm)."""
    p = trial.arrays["pupil"][trial.arrays["usable"]]
    p = p[np.isfinite(p)]
    if p.size == 0:
        raise MissingChannelError("no valid pupil samples")
    return float(np.std(p))


def _slopes(t: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Derivative at each sample: one-sided at the ends, and inside the
    spacing-weighted mean of the two adjacent slopes (second-order central
    difference on a non-uniform grid). Written over slopes so that a constant
    signal differentiates to exactly zero."""
    s = np.diff(v) / np.diff(t)
    h = np.diff(t)
    out = np.empty_like(v)
    out[0], out[-1] = s[0], s[-1]
    out[1:-1] = (h[1:] * s[:-1] + h[:-1] * s[1:]) / (h[:-1] + h[1:])
    return out


def driving_performance(trial: Trial) -> float:
    """Inverse mean absolute vehicle acceleration (s^2/m); ``inf`` at constant speed."""
    t, v = trial.arrays["t"], trial.arrays["speed"]
    keep = np.isfinite(v)
    if keep.sum() < 2:
        raise MissingChannelError("speed channel missing")
    accel = _slopes(t[keep], v[keep])
    mean_abs = float(np.mean(np.abs(accel)))
    return math.inf if mean_abs == 0.0 else 1.0 / mean_abs


def metrics_row(trial: Trial, config: Config = Config()) -> MetricsRow:
    """Compute every metric for an analyzed trial (fixations detected and annotated).

    A metric that fails leaves ``None`` in the row and a reason in
    ``diagnostics``; other metrics are unaffected.
    """
    values: dict[str, Optional[float]] = {}
    diag: dict[str, str] = {}

    def attempt(name: str, fn: Callable[[], float]):
        try:
            values[name] = fn()
        except GazeEffortError as exc:
            values[name] = None
            diag[name] = f"{type(exc).__name__}: {exc}"

    attempt("cem_vi", lambda: cem_vi(trial, config.grid, config.pg_mode))
    attempt("srjsd_f", lambda: srjsd(dist.fixation_distribution(trial.fixations, config.support),
                                     dist.retinal_flow_distribution(trial.fixations, config.support)))
    attempt("srjsd_fs", lambda: srjsd(*dist.transition_distributions(trial.fixations, config.support)))
    if values["srjsd_f"] is not None and values["srjsd_fs"] is not None:
        attempt("cem_iq", lambda: cem_iq_from_srjsd(values["srjsd_f"], values["srjsd_fs"]))
    else:
        values["cem_iq"] = None
        diag["cem_iq"] = "scanning efficiency unavailable"
    attempt("sge", lambda: sge(trial, config.grid))
    attempt("entropy_rate", lambda: entropy_rate(trial, config.grid))
    attempt("check_rate", lambda: check_rate(trial, config.check_set))
    attempt("fixation_rate", lambda: fixation_rate(trial))
    attempt("pupil_size_change", lambda: pupil_size_change(trial))
    attempt("driving_performance", lambda: driving_performance(trial))
    if values["driving_performance"] == math.inf:
        diag["driving_performance"] = "constant speed: infinite performance"
    return MetricsRow(trial.trial_id, diagnostics=diag, **values)
