"""Dispersion-threshold (I-DT) fixation identification and fixation rate."""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .model import DegenerateError, EmptyInputError, Fixation, GazeSample, Trial

_TIME_EPS = 1e-9


@dataclass(frozen=True)
class DetectorParams:
    dispersion_threshold: float = 1.0  # degrees, max pairwise angle
    min_duration: float = 0.1  # seconds
    max_gap: int = 3  # consecutive unusable samples tolerated inside a fixation

    def __post_init__(self):
        if not self.dispersion_threshold > 0:
            raise ValueError("dispersion_threshold must be > 0")
        if not self.min_duration > 0:
            raise ValueError("min_duration must be > 0")
        if self.max_gap < 0:
            raise ValueError("max_gap must be >= 0")


def modal_label(labels: Sequence[Optional[str]]) -> Optional[str]:
    """Most frequent non-empty label; ties go to the label seen first."""
    counts = Counter(x for x in labels if x is not None)
    if not counts:
        return None
    best = max(counts.values())
    # Counter preserves first-insertion order
    return next(lab for lab, c in counts.items() if c == best)


def max_pairwise_angle(dirs: np.ndarray) -> float:
    """Largest angle (degrees) between any two rows of ``dirs``."""
    if len(dirs) < 2:
        return 0.0
    d = dirs / np.linalg.norm(dirs, axis=1, keepdims=True)
    worst = 0.0
    for k in range(len(d) - 1):
        cross = np.linalg.norm(np.cross(d[k], d[k + 1:]), axis=1)
        dot = d[k + 1:] @ d[k]
        worst = max(worst, float(np.max(np.arctan2(cross, dot))))
    return math.degrees(worst)


def detect_fixations(samples: Sequence[GazeSample], params: DetectorParams = DetectorParams()) -> list[Fixation]:
    """Identify fixations with a dispersion-threshold sweep.

    A candidate window starts at a usable sample and grows until it spans
    ``min_duration``. If every pair of member gaze directions lies within
    ``dispersion_threshold`` degrees, the window is extended sample by sample
    while that holds; otherwise the start advances by one sample. Unusable
    samples are skipped, and more than ``max_gap`` of them in a row end the
    window.
    """
    trial = samples if isinstance(samples, Trial) else Trial("", 0, tuple(samples))
    cols = trial.arrays
    t, dirs, depth = cols["t"], cols["dir"], cols["depth"]
    idx = np.flatnonzero(cols["usable"])
    if idx.size == 0:
        raise EmptyInputError("no usable gaze samples")
    unit = dirs / np.linalg.norm(dirs, axis=1, keepdims=True)
    cos_thr = math.cos(math.radians(params.dispersion_threshold))
    n = idx.size

    def joined(a: int, b: int) -> bool:
        return idx[b] - idx[a] - 1 <= params.max_gap

    out: list[Fixation] = []
    p = 0
    while p < n:
        q = p
        while t[idx[q]] - t[idx[p]] < params.min_duration - _TIME_EPS:
            if q + 1 >= n or not joined(q, q + 1):
                break
            q += 1
        if t[idx[q]] - t[idx[p]] < params.min_duration - _TIME_EPS:
            p += 1
            continue
        w = unit[idx[p:q + 1]]
        if np.min(w @ w.T) < cos_thr:
            p += 1
            continue
        members = list(idx[p:q + 1])
        while q + 1 < n and joined(q, q + 1):
            nxt = unit[idx[q + 1]]
            if np.min(unit[members] @ nxt) < cos_thr:
                break
            q += 1
            members.append(idx[q])
        out.append(_make_fixation(len(out), trial, np.asarray(members), unit, t, depth))
        p = q + 1
    return out


def _make_fixation(index, trial, members, unit, t, depth) -> Fixation:
    c = unit[members].mean(axis=0)
    c = c / np.linalg.norm(c)
    return Fixation(
        index=index,
        start=float(t[members[0]]),
        end=float(t[members[-1]]),
        first=int(members[0]),
        last=int(members[-1]),
        centroid_dir=tuple(float(x) for x in c),
        rho=float(np.mean(depth[members])),
        aoi=modal_label([trial.samples[i].aoi for i in members]),
    )


def fixation_rate(trial: Trial) -> float:
    """Fixations per second over the whole trial span."""
    span = trial.duration
    if not span > 0:
        raise DegenerateError("trial spans no time")
    return len(trial.fixations) / span
