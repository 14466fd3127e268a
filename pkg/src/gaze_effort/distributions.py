"""Location, flow, transition and grid-importance distributions.

Observer frame convention: +x right, +y up, +z straight ahead. Yaw is
``atan2(x, z)``, pitch ``atan2(y, hypot(x, z))``. Grid rows follow pitch
(row 0 at the bottom) and columns follow yaw (column 0 on the left); cells
are numbered row-major.
"""
from __future__ import annotations

import math
from collections import Counter, defaultdict
from typing import Hashable, Iterable, Sequence

import numpy as np

from .model import DegenerateError, Distribution, Fixation, GazeEffortError, GridSpec

SUPPORT_MODES = ("auto", "aoi", "grid")
PG_MODES = ("cell", "value-binned")


class MissingAOIError(GazeEffortError):
    pass


class EmptyFixationsError(GazeEffortError):
    pass


def grid_cell(direction: Sequence[float], grid: GridSpec = GridSpec()) -> int:
    x, y, z = direction
    yaw = math.degrees(math.atan2(x, z))
    pitch = math.degrees(math.atan2(y, math.hypot(x, z)))
    width = 2.0 * grid.half_angle / grid.n_g

    def bin_of(angle: float) -> int:
        b = math.floor((angle + grid.half_angle) / width)
        return min(max(b, 0), grid.n_g - 1)

    return bin_of(pitch) * grid.n_g + bin_of(yaw)


def grid_cells(directions: np.ndarray, grid: GridSpec = GridSpec()) -> np.ndarray:
    """Vectorized :func:`grid_cell` over an ``(n, 3)`` array."""
    d = np.asarray(directions, dtype=float)
    yaw = np.degrees(np.arctan2(d[:, 0], d[:, 2]))
    pitch = np.degrees(np.arctan2(d[:, 1], np.hypot(d[:, 0], d[:, 2])))
    width = 2.0 * grid.half_angle / grid.n_g
    col = np.clip(np.floor((yaw + grid.half_angle) / width), 0, grid.n_g - 1)
    row = np.clip(np.floor((pitch + grid.half_angle) / width), 0, grid.n_g - 1)
    return (row * grid.n_g + col).astype(int)


def resolve_support(fixations: Sequence[Fixation], support: str = "auto") -> str:
    if support not in SUPPORT_MODES:
        raise ValueError(f"unknown support mode {support!r}")
    if support == "auto":
        return "aoi" if fixations and all(f.aoi is not None for f in fixations) else "grid"
    return support


def locations(fixations: Sequence[Fixation], support: str = "auto") -> list[Hashable]:
    """Location label of each fixation (AOI name or grid cell)."""
    mode = resolve_support(fixations, support)
    if mode == "aoi":
        if any(f.aoi is None for f in fixations):
            raise MissingAOIError("some fixations carry no AOI label")
        return [f.aoi for f in fixations]
    if any(f.cell is None for f in fixations):
        raise GazeEffortError("fixations have no grid cell; annotate them first")
    return [f.cell for f in fixations]


def _weighted(labels: Iterable[Hashable], weights: Iterable[float]) -> Distribution:
    acc: dict[Hashable, list[float]] = defaultdict(list)
    for lab, w in zip(labels, weights):
        acc[lab].append(w)
    support = sorted(acc)
    totals = [math.fsum(acc[lab]) for lab in support]
    if not math.fsum(totals) > 0:
        raise DegenerateError("zero total weight")
    return Distribution.from_weights(support, totals)


def fixation_distribution(fixations: Sequence[Fixation], support: str = "auto") -> Distribution:
    if not fixations:
        raise EmptyFixationsError("no fixations")
    labels = locations(fixations, support)
    counts = Counter(labels)
    keys = sorted(counts)
    return Distribution.from_weights(keys, [counts[k] for k in keys])


def retinal_flow_distribution(fixations: Sequence[Fixation], support: str = "auto") -> Distribution:
    if not fixations:
        raise EmptyFixationsError("no fixations")
    labels = locations(fixations, support)
    try:
        return _weighted(labels, [f.I for f in fixations])
    except DegenerateError:
        raise DegenerateError("zero total retinal flow") from None


def transition_distributions(fixations: Sequence[Fixation], support: str = "auto") -> tuple[Distribution, Distribution]:
    """Distributions over consecutive location pairs.

    The first counts each observed pair; the second weights every occurrence
    by the retinal flow of the fixation the transition leaves from.
    """
    if len(fixations) < 2:
        raise EmptyFixationsError("need at least two fixations for transitions")
    labels = locations(fixations, support)
    pairs = list(zip(labels[:-1], labels[1:]))
    p_fs = _weighted(pairs, [1.0] * len(pairs))
    try:
        p_rs = _weighted(pairs, [f.I for f in fixations[:-1]])
    except DegenerateError:
        raise DegenerateError("zero total retinal flow over transitions") from None
    # identical support by construction, but keep it explicit
    p_rs = Distribution(p_fs.support, [p_rs.as_dict()[k] for k in p_fs.support])
    return p_fs, p_rs


def cell_importance(fixations: Sequence[Fixation], grid: GridSpec = GridSpec()) -> np.ndarray:
    """Summed observation importance per grid cell (length ``n_g**2``)."""
    acc: list[list[float]] = [[] for _ in range(grid.n_cells)]
    for f in fixations:
        acc[grid_cell(f.centroid_dir, grid)].append(f.J)
    return np.array([math.fsum(a) for a in acc])


def view_importance_distribution(fixations: Sequence[Fixation], grid: GridSpec = GridSpec(),
                                 mode: str = "cell") -> Distribution:
    """Grid view-importance distribution.

    ``cell`` mode normalizes the per-cell importance over cells with nonzero
    importance. ``value-binned`` mode histograms the ``n_g**2`` per-cell values
    into ``n_g`` equal-width bins and normalizes the bin counts.
    """
    v = cell_importance(fixations, grid)
    if not math.fsum(v) > 0:
        raise DegenerateError("zero total observation importance")
    if mode == "cell":
        keep = np.flatnonzero(v > 0)
        return Distribution.from_weights([int(k) for k in keep], v[keep])
    if mode == "value-binned":
        lo, hi = float(v.min()), float(v.max())
        if hi == lo:
            bins = np.zeros(v.size, dtype=int)
        else:
            bins = np.minimum(((v - lo) / (hi - lo) * grid.n_g).astype(int), grid.n_g - 1)
        counts = np.bincount(bins, minlength=grid.n_g)
        keep = np.flatnonzero(counts)
        return Distribution.from_weights([int(k) for k in keep], counts[keep])
    raise ValueError(f"unknown pg mode {mode!r}")
