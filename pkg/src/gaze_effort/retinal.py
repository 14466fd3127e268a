"""Fixation-induced retinal flow and observation importance.

The fixated point ``hit`` moves relative to the observer during a fixation.
Its angular travel around the observer, scaled by the fixation depth, is the
arc length ``m``; dividing back by depth gives the retinal flow ``I`` in
radians. ``J = I / |u|`` relates that flow to the point's displacement.
"""
from __future__ import annotations

import dataclasses
import math
from typing import Sequence

import numpy as np

from .distributions import grid_cell
from .model import DegenerateError, Fixation, GazeEffortError, GazeSample, GridSpec, Trial

U_EPS = 1e-6  # meters; below this a stimulus counts as static
ANGLE_EPS = 1e-12  # radians; steps below this are rounding noise between parallel rays
ARC_MODES = ("path", "endpoint")


class InsufficientSamplesError(GazeEffortError):
    pass


def _usable(members: Sequence[GazeSample]) -> list[GazeSample]:
    mem = [s for s in members if s.usable]
    if len(mem) < 2:
        raise InsufficientSamplesError(f"need >= 2 usable member samples, got {len(mem)}")
    return mem


def angle_between(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Angle in radians between row vectors; stable for tiny angles."""
    cross = np.linalg.norm(np.cross(a, b), axis=-1)
    return np.arctan2(cross, np.sum(a * b, axis=-1))


def _point_directions(members: Sequence[GazeSample]) -> np.ndarray:
    hit = np.array([s.hit for s in members], dtype=float)
    gaze = np.array([s.dir for s in members], dtype=float)
    norm = np.linalg.norm(hit, axis=1)
    # a hit at the origin has no direction; fall back to the gaze ray
    return np.where(norm[:, None] > 0, hit, gaze)


def angular_travel(members: Sequence[GazeSample], arc_mode: str = "path") -> float:
    """Total angle (radians) swept by the fixated point around the observer."""
    d = _point_directions(_usable(members))
    if arc_mode == "path":
        steps = angle_between(d[:-1], d[1:])
        return float(math.fsum(steps[steps > ANGLE_EPS]))
    if arc_mode == "endpoint":
        a = float(angle_between(d[0], d[-1]))
        return a if a > ANGLE_EPS else 0.0
    raise ValueError(f"unknown arc mode {arc_mode!r}")


def displacement(fix: Fixation, members: Sequence[GazeSample]) -> tuple[tuple[float, float, float], float]:
    mem = _usable(members)
    u = np.subtract(mem[-1].hit, mem[0].hit)
    return tuple(float(x) for x in u), float(np.linalg.norm(u))


def retinal_flow(fix: Fixation, members: Sequence[GazeSample], arc_mode: str = "path") -> tuple[float, float]:
    """Return ``(m, I)``: arc length in meters and retinal flow in radians."""
    if not fix.rho > 0:
        raise DegenerateError(f"fixation {fix.index} has non-positive depth {fix.rho!r}")
    m = angular_travel(members, arc_mode) * fix.rho
    return m, m / fix.rho


def observation_importance(fix: Fixation) -> float:
    if fix.u_mag < U_EPS:
        return 0.0
    return fix.I / fix.u_mag


def annotate(trial: Trial, grid: GridSpec = GridSpec(), arc_mode: str = "path") -> Trial:
    """Fill u, m, I, J and grid cell on every fixation of ``trial``."""
    fixes = []
    for f in trial.fixations:
        members = trial.members(f)
        u, u_mag = displacement(f, members)
        m, flow = retinal_flow(f, members, arc_mode)
        f = dataclasses.replace(f, u=u, u_mag=u_mag, m=m, I=flow,
                                cell=grid_cell(f.centroid_dir, grid))
        fixes.append(dataclasses.replace(f, J=observation_importance(f)))
    return dataclasses.replace(trial, fixations=tuple(fixes))
