"""Domain types shared by the whole pipeline, plus trial validation."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Hashable, Optional, Sequence

import numpy as np

Vec3 = tuple[float, float, float]

UNIT_TOL = 1e-6
MASS_TOL = 1e-9


class GazeEffortError(Exception):
    """Base class for all errors raised by this package."""


class EmptyInputError(GazeEffortError):
    pass


class DegenerateError(GazeEffortError):
    """A quantity is undefined for this input (zero duration, zero flow, ...)."""


class SupportMismatchError(GazeEffortError):
    pass


def _vec(v: Sequence[float]) -> Vec3:
    x, y, z = v
    return (float(x), float(y), float(z))


@dataclass(frozen=True)
class GazeSample:
    """One eye-tracker frame, expressed in the observer frame.

    ``dir`` is the unit gaze direction and ``hit`` the fixated point relative
    to the observer, in meters. ``depth`` falls back to ``|hit|`` when the log
    does not carry it.
    """

    t: float
    dir: Vec3
    hit: Vec3
    depth: Optional[float] = None
    pupil: Optional[float] = None
    aoi: Optional[str] = None
    speed: Optional[float] = None
    valid: bool = True

    def __post_init__(self):
        object.__setattr__(self, "dir", _vec(self.dir))
        object.__setattr__(self, "hit", _vec(self.hit))
        if self.depth is None:
            object.__setattr__(self, "depth", math.hypot(*self.hit))

    @property
    def usable(self) -> bool:
        # blinks / dropouts: kept in the stream, skipped by detection and pupil stats
        return self.valid and (self.pupil is None or self.pupil > 0)


@dataclass(frozen=True)
class Fixation:
    """A detected fixation and the geometry derived from it.

    ``first``/``last`` index the trial's sample list (inclusive) and bound the
    member samples. ``m`` is the arc length swept by the fixated point around
    the observer, ``I = m / rho`` the retinal flow and ``J = I / u_mag`` the
    observation importance.
    """

    index: int
    start: float
    end: float
    first: int
    last: int
    centroid_dir: Vec3
    rho: float
    aoi: Optional[str] = None
    cell: Optional[int] = None
    u: Vec3 = (0.0, 0.0, 0.0)
    u_mag: float = 0.0
    m: float = 0.0
    I: float = 0.0
    J: float = 0.0

    @property
    def tau(self) -> float:
        return self.end - self.start


@dataclass(frozen=True)
class Trial:
    participant_id: str
    session_index: int
    samples: tuple[GazeSample, ...]
    fixations: tuple[Fixation, ...] = ()
    metadata: dict[str, Any] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "samples", tuple(self.samples))
        object.__setattr__(self, "fixations", tuple(self.fixations))

    @property
    def trial_id(self) -> str:
        return f"{self.participant_id}-s{self.session_index}"

    @property
    def duration(self) -> float:
        if len(self.samples) < 2:
            return 0.0
        return self.samples[-1].t - self.samples[0].t

    @cached_property
    def arrays(self) -> dict[str, np.ndarray]:
        """Column view of the sample stream (computed once, read-only)."""
        s = self.samples
        cols = {
            "t": np.array([x.t for x in s], dtype=float),
            "dir": np.array([x.dir for x in s], dtype=float).reshape(-1, 3),
            "hit": np.array([x.hit for x in s], dtype=float).reshape(-1, 3),
            "depth": np.array([x.depth for x in s], dtype=float),
            "pupil": np.array([np.nan if x.pupil is None else x.pupil for x in s]),
            "speed": np.array([np.nan if x.speed is None else x.speed for x in s]),
            "usable": np.array([x.usable for x in s], dtype=bool),
        }
        for a in cols.values():
            a.flags.writeable = False
        return cols

    def members(self, fix: Fixation) -> list[GazeSample]:
        """Usable samples belonging to ``fix``."""
        return [s for s in self.samples[fix.first:fix.last + 1] if s.usable]


@dataclass(frozen=True)
class GridSpec:
    n_g: int = 5
    half_angle: float = 50.0

    def __post_init__(self):
        if self.n_g < 2:
            raise ValueError(f"n_g must be >= 2, got {self.n_g}")
        if not 0 < self.half_angle < 90:
            raise ValueError(f"half_angle must be in (0, 90), got {self.half_angle}")

    @property
    def n_cells(self) -> int:
        return self.n_g * self.n_g


@dataclass(frozen=True)
class Distribution:
    """Finite probability mass function over an ordered, labeled support."""

    support: tuple[Hashable, ...]
    mass: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "support", tuple(self.support))
        object.__setattr__(self, "mass", tuple(float(m) for m in self.mass))
        if len(self.support) != len(self.mass):
            raise ValueError("support and mass differ in length")
        if len(set(self.support)) != len(self.support):
            raise ValueError("support labels must be distinct")
        if any(m < 0 or not math.isfinite(m) for m in self.mass):
            raise ValueError("masses must be finite and nonnegative")
        if abs(math.fsum(self.mass) - 1.0) > MASS_TOL:
            raise ValueError(f"masses sum to {math.fsum(self.mass)!r}, not 1")

    @classmethod
    def from_weights(cls, support: Sequence[Hashable], weights: Sequence[float]) -> "Distribution":
        w = np.asarray(weights, dtype=float)
        total = math.fsum(w)
        if not total > 0:
            raise DegenerateError("weights sum to zero")
        return cls(tuple(support), tuple(w / total))

    @property
    def p(self) -> np.ndarray:
        return np.array(self.mass, dtype=float)

    def as_dict(self) -> dict[Hashable, float]:
        return dict(zip(self.support, self.mass))

    def __len__(self) -> int:
        return len(self.support)


def validate_trial(trial: Trial) -> list[str]:
    """Check every type invariant; return one message per violation (empty if clean)."""
    out: list[str] = []
    prev_t = None
    for i, s in enumerate(trial.samples):
        norm = math.sqrt(sum(c * c for c in s.dir))
        if abs(norm - 1.0) > UNIT_TOL:
            out.append(f"sample {i}: |dir| = {norm:.9g}, expected unit length")
        if not (s.depth >= 0):
            out.append(f"sample {i}: negative depth {s.depth!r}")
        if not math.isfinite(s.t):
            out.append(f"sample {i}: non-finite time")
        elif prev_t is not None and not s.t > prev_t:
            out.append(f"sample {i}: time {s.t!r} not after previous {prev_t!r}")
        if math.isfinite(s.t):
            prev_t = s.t

    if trial.samples:
        t0, t1 = trial.samples[0].t, trial.samples[-1].t
    prev_end = None
    for f in trial.fixations:
        tag = f"fixation {f.index}"
        if not f.tau > 0:
            out.append(f"{tag}: non-positive duration {f.tau!r}")
        if not f.rho > 0:
            out.append(f"{tag}: non-positive depth {f.rho!r}")
        for name in ("I", "J", "m", "u_mag"):
            if getattr(f, name) < 0:
                out.append(f"{tag}: negative {name}")
        if f.rho > 0 and not math.isclose(f.I, f.m / f.rho, rel_tol=1e-12, abs_tol=0.0):
            out.append(f"{tag}: I != m / rho")
        if prev_end is not None and f.start <= prev_end:
            out.append(f"{tag}: overlaps or precedes previous fixation")
        if trial.samples and (f.start < t0 or f.end > t1):
            out.append(f"{tag}: outside sample time range")
        prev_end = f.end
    return out
