"""Scripted driving sessions with an analytic ledger of every derived quantity.

Each scheduled fixation tracks a point stimulus that starts at a given
yaw/pitch and depth and moves in a straight line: ``lateral`` m/s along the
horizontal tangent and ``radial`` m/s along the initial line of sight.
Fixations are separated by short saccades. Gaze-direction jitter, when
enabled, perturbs only the ``dir`` channel; hit points stay on the stimulus.

The ledger is computed from the schedule in closed form (swept angle between
the first and last stimulus positions, displacement = speed x duration,
sine-wave pupil statistics, piecewise-linear acceleration) and uses scipy
for entropies and divergences, so it shares no code with the pipeline.
"""
from __future__ import annotations

import csv
import io
import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from scipy.spatial.distance import jensenshannon
from scipy.stats import entropy as scipy_entropy

from .model import GazeEffortError, GazeSample, Trial

PRESETS = ("balanced", "concentrated", "mixed")
CHECK_AOIS = ("mirror", "instrument", "periphery")
EGO_SPEED = 40 / 3.6  # m/s
MAX_SWEEP_DEG = 0.45
MIN_SACCADE_DEG = 8.0
OFFSETS = ((-6.0, -6.0), (-6.0, 6.0), (6.0, -6.0), (6.0, 6.0))
GRID_N, GRID_HALF = 5, 50.0
CELL_WIDTH = 2 * GRID_HALF / GRID_N


class InfeasibleScheduleError(GazeEffortError):
    pass


@dataclass(frozen=True)
class Kinematics:
    depth: float  # m, at fixation onset
    lateral: float = 0.0  # m/s, horizontal, perpendicular to the initial line of sight
    radial: float = 0.0  # m/s, along the initial line of sight (negative approaches)

    @property
    def speed(self) -> float:
        return math.hypot(self.lateral, self.radial)


@dataclass(frozen=True)
class ScheduledFixation:
    yaw: float  # deg
    pitch: float  # deg
    duration: float  # s
    kinematics: Kinematics
    aoi: Optional[str] = None


@dataclass(frozen=True)
class PupilModel:
    mean: float = 3.5  # mm
    amplitude: float = 0.0  # mm
    cycles: int = 0  # whole sine periods over the trial; 0 = constant


@dataclass(frozen=True)
class Scenario:
    participant: str
    session: int
    seed: int
    schedule: tuple[ScheduledFixation, ...]
    pupil: PupilModel = PupilModel()
    speed_knots: tuple[tuple[float, float], ...] = ((0.0, EGO_SPEED), (1.0, EGO_SPEED))
    rate: float = 90.0
    saccade_samples: int = 2
    jitter_deg: float = 0.0

    @property
    def trial_id(self) -> str:
        return f"{self.participant}-s{self.session}"

    @property
    def n_samples(self) -> int:
        n = sum(round(f.duration * self.rate) + 1 for f in self.schedule)
        return n + self.saccade_samples * max(0, len(self.schedule) - 1)

    @property
    def duration(self) -> float:
        return (self.n_samples - 1) / self.rate


@dataclass(frozen=True)
class FixationEntry:
    index: int
    first: int
    last: int
    tau: float
    rho: float
    cell: int
    aoi: Optional[str]
    u_mag: float
    I: float
    J: float


@dataclass
class Ledger:
    trial_id: str
    fixations: tuple[FixationEntry, ...]
    distributions: dict[str, dict] = field(default_factory=dict)
    metrics: dict[str, Optional[float]] = field(default_factory=dict)


# --- geometry helpers (independent of the pipeline) -------------------------

def direction(yaw_deg: float, pitch_deg: float) -> np.ndarray:
    y, p = math.radians(yaw_deg), math.radians(pitch_deg)
    return np.array([math.cos(p) * math.sin(y), math.sin(p), math.cos(p) * math.cos(y)])


def _tangent(yaw_deg: float) -> np.ndarray:
    y = math.radians(yaw_deg)
    return np.array([math.cos(y), 0.0, -math.sin(y)])


def scripted_cell(yaw: float, pitch: float) -> int:
    def b(a):
        return min(GRID_N - 1, max(0, int((a + GRID_HALF) // CELL_WIDTH)))
    return b(pitch) * GRID_N + b(yaw)


def cell_center(cell: int) -> tuple[float, float]:
    row, col = divmod(cell, GRID_N)
    return (-GRID_HALF + (col + 0.5) * CELL_WIDTH, -GRID_HALF + (row + 0.5) * CELL_WIDTH)


def swept_angle(k: Kinematics, tau: float) -> float:
    """Closed-form angle (rad) between stimulus positions at onset and after ``tau``."""
    # in the (line of sight, tangent) plane the point moves from (d, 0)
    # to (d + radial*tau, lateral*tau)
    along = k.depth + k.radial * tau
    across = k.lateral * tau
    return math.atan2(abs(across), along)


def _angle(a: np.ndarray, b: np.ndarray) -> float:
    return math.atan2(float(np.linalg.norm(np.cross(a, b))), float(np.dot(a, b)))


# --- simulation ---------------------------------------------------------------

def _check(scn: Scenario):
    if not scn.rate > 0:
        raise InfeasibleScheduleError("sample rate must be positive")
    if scn.saccade_samples < 0:
        raise InfeasibleScheduleError("saccade_samples must be >= 0")
    for i, f in enumerate(scn.schedule):
        if not f.duration > 0 or round(f.duration * scn.rate) < 1:
            raise InfeasibleScheduleError(f"fixation {i}: duration too short")
        k = f.kinematics
        if not k.depth > 0:
            raise InfeasibleScheduleError(f"fixation {i}: depth must be positive")
        tau = round(f.duration * scn.rate) / scn.rate
        if k.radial < 0 and k.depth + k.radial * tau <= 0:
            raise InfeasibleScheduleError(f"fixation {i}: stimulus reaches the observer")
    knots = scn.speed_knots
    if len(knots) < 2 or knots[0][0] != 0.0 or knots[-1][0] != 1.0:
        raise InfeasibleScheduleError("speed knots must span fractions 0..1")
    if any(b[0] <= a[0] for a, b in zip(knots[:-1], knots[1:])):
        raise InfeasibleScheduleError("speed knot fractions must increase")


def _knot_indices(scn: Scenario) -> np.ndarray:
    n = scn.n_samples
    idx = np.array([round(fr * (n - 1)) for fr, _ in scn.speed_knots])
    if np.any(np.diff(idx) <= 0):
        raise InfeasibleScheduleError("speed knots collapse onto the same sample")
    return idx


def simulate_trial(scn: Scenario) -> tuple[Trial, Ledger]:
    _check(scn)
    n = scn.n_samples
    rate = scn.rate
    rng = np.random.default_rng(scn.seed)
    times = np.arange(n) / rate

    hits = np.zeros((n, 3))
    aois: list[Optional[str]] = [None] * n
    ranges = []
    g = 0
    prev_end: Optional[np.ndarray] = None
    for i, f in enumerate(scn.schedule):
        k_int = round(f.duration * rate)
        e0 = direction(f.yaw, f.pitch)
        vel = f.kinematics.lateral * _tangent(f.yaw) + f.kinematics.radial * e0
        start = g + (scn.saccade_samples if i else 0)
        seg = times[start:start + k_int + 1] - times[start]
        pts = f.kinematics.depth * e0 + seg[:, None] * vel
        if prev_end is not None:
            hits[g:start] = _saccade(prev_end, pts[0], scn.saccade_samples)
        hits[start:start + k_int + 1] = pts
        aois[start:start + k_int + 1] = [f.aoi] * (k_int + 1)
        ranges.append((start, start + k_int))
        prev_end = pts[-1]
        g = start + k_int + 1

    dirs = hits / np.linalg.norm(hits, axis=1, keepdims=True)
    if scn.jitter_deg > 0:
        dirs = _jitter(dirs, math.radians(scn.jitter_deg), rng)

    pupil = np.full(n, scn.pupil.mean)
    if scn.pupil.cycles:
        pupil = pupil + scn.pupil.amplitude * np.sin(2 * np.pi * scn.pupil.cycles * np.arange(n) / n)
    knots = _knot_indices(scn)
    speed = np.interp(np.arange(n), knots, [v for _, v in scn.speed_knots])

    samples = tuple(
        GazeSample(float(times[i]), tuple(dirs[i]), tuple(hits[i]), float(np.linalg.norm(hits[i])),
                   float(pupil[i]), aois[i], float(speed[i]), True)
        for i in range(n)
    )
    trial = Trial(scn.participant, scn.session, samples)
    return trial, _ledger(scn, trial, ranges, knots)


def _saccade(a: np.ndarray, b: np.ndarray, n: int) -> np.ndarray:
    """``n`` points evenly spaced in angle (and depth) strictly between a and b."""
    da, db = np.linalg.norm(a), np.linalg.norm(b)
    ua, ub = a / da, b / db
    omega = _angle(ua, ub)
    out = np.zeros((n, 3))
    for j in range(1, n + 1):
        w = j / (n + 1)
        u = (math.sin((1 - w) * omega) * ua + math.sin(w * omega) * ub) / math.sin(omega)
        out[j - 1] = ((1 - w) * da + w * db) * u
    return out


def _jitter(dirs: np.ndarray, sigma: float, rng: np.random.Generator) -> np.ndarray:
    ref = np.where(np.abs(dirs[:, 1:2]) < 0.9, [[0.0, 1.0, 0.0]], [[1.0, 0.0, 0.0]])
    e1 = np.cross(ref, dirs)
    e1 /= np.linalg.norm(e1, axis=1, keepdims=True)
    e2 = np.cross(dirs, e1)
    noise = rng.normal(0.0, sigma, size=(len(dirs), 2))
    out = dirs + noise[:, :1] * e1 + noise[:, 1:] * e2
    return out / np.linalg.norm(out, axis=1, keepdims=True)


def _ledger(scn: Scenario, trial: Trial, ranges, knots) -> Ledger:
    rate = scn.rate
    entries = []
    for i, (f, (a, b)) in enumerate(zip(scn.schedule, ranges)):
        k = f.kinematics
        tau = (b - a) / rate
        s = np.arange(b - a + 1) / rate
        # exact distance of the moving point at each sample
        along = k.depth + k.radial * s
        rho = float(np.mean(np.hypot(along, k.lateral * s)))
        flow = swept_angle(k, tau)
        u_mag = k.speed * tau
        entries.append(FixationEntry(i, a, b, tau, rho, scripted_cell(f.yaw, f.pitch), f.aoi,
                                     u_mag, flow, flow / u_mag if u_mag >= 1e-6 else 0.0))
    led = Ledger(scn.trial_id, tuple(entries))
    _ledger_distributions(led)
    _ledger_metrics(led, scn, knots)
    return led


def _norm(d: dict) -> dict:
    total = math.fsum(d.values())
    return {k: d[k] / total for k in sorted(d)} if total > 0 else {}


def _ledger_distributions(led: Ledger):
    fx = led.fixations
    labels = [f.aoi if all(e.aoi is not None for e in fx) else f.cell for f in fx]
    pf, pr = Counter(labels), defaultdict(float)
    for lab, f in zip(labels, fx):
        pr[lab] += f.I
    pairs = list(zip(labels[:-1], labels[1:]))
    pfs, prs = Counter(pairs), defaultdict(float)
    for pair, f in zip(pairs, fx[:-1]):
        prs[pair] += f.I
    v = defaultdict(float)
    for f in fx:
        v[f.cell] += f.J
    led.distributions = {
        "P_f": _norm(dict(pf)), "P_r": _norm(dict(pr)),
        "P_fs": _norm(dict(pfs)), "P_rs": _norm(dict(prs)),
        "P_g": _norm({c: x for c, x in v.items() if x > 0}),
    }


def _ledger_metrics(led: Ledger, scn: Scenario, knots: np.ndarray):
    d = led.distributions
    fx = led.fixations
    n = scn.n_samples
    span = (n - 1) / scn.rate
    m: dict[str, Optional[float]] = {}

    def jsdist(p, q):
        keys = sorted(p)
        return float(jensenshannon([p[k] for k in keys], [q.get(k, 0.0) for k in keys], base=2))

    m["cem_vi"] = float(scipy_entropy(list(d["P_g"].values()), base=2)) if d["P_g"] else None
    m["srjsd_f"] = jsdist(d["P_f"], d["P_r"]) if d["P_r"] else None
    m["srjsd_fs"] = jsdist(d["P_fs"], d["P_rs"]) if d["P_rs"] else None
    if m["srjsd_f"] is not None and m["srjsd_fs"] is not None:
        iq = [-math.log2(min(1.0, max(1e-12, s))) for s in (m["srjsd_f"], m["srjsd_fs"])]
        m["cem_iq"] = iq[0] / iq[1] if iq[1] > 0 else None
    else:
        m["cem_iq"] = None

    cells = [f.cell for f in fx]
    m["sge"] = float(scipy_entropy(list(Counter(cells).values()), base=2))
    rows: dict[int, Counter] = defaultdict(Counter)
    for a, b in zip(cells[:-1], cells[1:]):
        rows[a][b] += 1
    m["entropy_rate"] = math.fsum(
        sum(c.values()) / (len(cells) - 1) * float(scipy_entropy(list(c.values()), base=2))
        for c in rows.values()) if len(cells) > 1 else None
    m["check_rate"] = sum(f.aoi in CHECK_AOIS for f in fx) / (span / 60.0)
    m["fixation_rate"] = len(fx) / span
    m["pupil_size_change"] = scn.pupil.amplitude / math.sqrt(2) if scn.pupil.cycles else 0.0

    # per-sample derivative of a piecewise-linear profile: the piece slope
    # inside a piece, the mean of both slopes at an interior knot
    speeds = [v for _, v in scn.speed_knots]
    slopes = [(speeds[i + 1] - speeds[i]) / ((knots[i + 1] - knots[i]) / scn.rate) for i in range(len(knots) - 1)]
    total = abs(slopes[0]) + abs(slopes[-1])
    for i, s in enumerate(slopes):
        total += abs(s) * (knots[i + 1] - knots[i] - 1)
        if i > 0:
            total += abs(slopes[i - 1] + s) / 2
    mean_abs = total / n
    m["driving_performance"] = math.inf if mean_abs == 0 else 1.0 / mean_abs
    led.metrics = m


# --- scenario presets --------------------------------------------------------

def _moving_kinematics(rng: np.random.Generator, aoi: str, duration: float, rate: float) -> Kinematics:
    tau = round(duration * rate) / rate
    if aoi == "vehicle":
        k = Kinematics(rng.uniform(12, 40), rng.uniform(0.3, 1.5), rng.uniform(-4, 4))
    elif aoi == "sign":
        k = Kinematics(rng.uniform(15, 45), rng.uniform(0.2, 1.0), -EGO_SPEED)
    else:  # road surface features, periphery
        k = Kinematics(rng.uniform(10, 35), rng.uniform(0.1, 0.8), -EGO_SPEED * rng.uniform(0.8, 1.0))
    k = Kinematics(k.depth, k.lateral * rng.choice([-1.0, 1.0]), k.radial)
    while math.degrees(swept_angle(k, tau)) > MAX_SWEEP_DEG:
        k = Kinematics(k.depth, k.lateral * 0.7, k.radial)
    return k


def _static(rng: np.random.Generator) -> tuple[str, int, Kinematics]:
    aoi = str(rng.choice(["mirror", "instrument"]))
    cell = int(rng.choice([10, 14, 15, 19])) if aoi == "mirror" else int(rng.choice([1, 2, 3, 7]))
    return aoi, cell, Kinematics(float(rng.uniform(0.5, 1.2)))


def _place(rng: np.random.Generator, items, rate: float) -> tuple[ScheduledFixation, ...]:
    """Shuffle (cell, duration, kinematics, aoi) items and pick offsets so
    consecutive fixations are at least MIN_SACCADE_DEG apart."""
    order = rng.permutation(len(items))
    out = []
    prev = None
    for i in order:
        cell, dur, kin, aoi = items[i]
        cy, cp = cell_center(cell)
        cands = [OFFSETS[j] for j in rng.permutation(len(OFFSETS))]
        chosen = None
        for oy, op in cands:
            yaw, pitch = cy + oy, cp + op
            if prev is None or math.degrees(_angle(prev, direction(yaw, pitch))) >= MIN_SACCADE_DEG + 1.0:
                chosen = (yaw, pitch)
                break
        if chosen is None:
            raise InfeasibleScheduleError("cannot separate consecutive fixations")
        f = ScheduledFixation(chosen[0], chosen[1], dur, kin, aoi)
        tau = round(dur * rate) / rate
        e0 = direction(f.yaw, f.pitch)
        vel = kin.lateral * _tangent(f.yaw) + kin.radial * e0
        prev = kin.depth * e0 + tau * vel
        out.append(f)
    return tuple(out)


def make_scenario(preset: str, rng: np.random.Generator, participant: str = "P01", session: int = 1,
                  jitter_deg: float = 0.0, rate: float = 90.0) -> Scenario:
    """Random scenario of the given preset.

    ``balanced`` gives every grid cell the same set of moving fixations, so
    the view-importance distribution is uniform over all 25 cells.
    ``concentrated`` puts every moving fixation in the center cell.
    ``mixed`` draws a latent effort level that sets how many cells are
    scanned, how short fixations are and how strongly the pupil oscillates.
    """
    if preset not in PRESETS:
        raise ValueError(f"unknown preset {preset!r}; choose from {PRESETS}")
    effort = float(rng.uniform(0, 1))
    moving_aois = ["road", "vehicle", "sign", "periphery"]

    def dur(short: float = 0.0):
        return float(rng.uniform(0.18, 0.5 - 0.25 * short))

    items = []
    if preset == "balanced":
        template = [(dur(), str(rng.choice(moving_aois))) for _ in range(int(rng.integers(1, 3)))]
        template = [(d, _moving_kinematics(rng, a, d, rate), a) for d, a in template]
        for cell in range(GRID_N * GRID_N):
            items += [(cell, d, k, a) for d, k, a in template]
    elif preset == "concentrated":
        for _ in range(int(rng.integers(15, 40))):
            a, d = str(rng.choice(moving_aois)), dur()
            items.append((12, d, _moving_kinematics(rng, a, d, rate), a))
    else:
        n_cells = int(np.clip(round(1 + 24 * (0.7 * effort + 0.3 * rng.uniform())), 1, 25))
        cells = rng.choice(25, size=n_cells, replace=False)
        n_moving = max(n_cells, int(rng.integers(20, 45)))
        picks = list(cells) + list(rng.choice(cells, size=n_moving - n_cells))
        for c in picks:
            a, d = str(rng.choice(moving_aois)), dur(effort)
            items.append((int(c), d, _moving_kinematics(rng, a, d, rate), a))
    for _ in range(int(rng.integers(2, 12))):
        a, c, k = _static(rng)
        items.append((c, dur(), k, a))

    schedule = _place(rng, items, rate)
    amp = 0.05 + 0.5 * effort + abs(float(rng.normal(0, 0.05))) if preset == "mixed" else float(rng.uniform(0.05, 0.5))
    pupil = PupilModel(float(rng.uniform(3.0, 4.5)), amp, int(rng.integers(1, 6)))
    inner = np.sort(rng.uniform(0.05, 0.95, size=3))
    fracs = [0.0, *[float(x) for x in inner], 1.0]
    speeds = EGO_SPEED + rng.normal(0.0, 0.6 + 1.2 * rng.uniform(), size=len(fracs))
    return Scenario(participant, session, int(rng.integers(2**63)), schedule, pupil,
                    tuple(zip(fracs, (float(v) for v in speeds))), rate=rate, jitter_deg=jitter_deg)


def trial_ident(i: int) -> tuple[str, int]:
    """Participant / session of the i-th trial: four sessions per participant."""
    return f"P{i // 4 + 1:02d}", i % 4 + 1


def generate_corpus(preset: str, n_trials: int = 56, seed: int = 7,
                    jitter_deg: float = 0.0) -> list[tuple[Trial, Ledger]]:
    children = np.random.SeedSequence(seed).spawn(n_trials)
    out = []
    for i, ss in enumerate(children):
        pid, sess = trial_ident(i)
        scn = make_scenario(preset, np.random.default_rng(ss), pid, sess, jitter_deg)
        out.append(simulate_trial(scn))
    return out


# --- ledger files ------------------------------------------------------------

LEDGER_METRICS = ("cem_vi", "cem_iq", "sge", "entropy_rate", "check_rate", "fixation_rate",
                  "pupil_size_change", "driving_performance", "srjsd_f", "srjsd_fs")


def _f(v) -> str:
    return "" if v is None else f"{v:.9g}"


def ledger_tables(ledgers: Sequence[Ledger]) -> dict[str, str]:
    """CSV text of the three ledger tables, all keyed by trial id."""
    def table(header, rows):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
        return buf.getvalue()

    metrics = table(("trial_id",) + LEDGER_METRICS,
                    ([L.trial_id] + [_f(L.metrics.get(k)) for k in LEDGER_METRICS] for L in ledgers))
    fixes = table(("trial_id", "index", "first", "last", "tau", "rho", "cell", "aoi", "u_mag", "I", "J"),
                  ((L.trial_id, e.index, e.first, e.last, _f(e.tau), _f(e.rho), e.cell, e.aoi or "",
                    _f(e.u_mag), _f(e.I), _f(e.J)) for L in ledgers for e in L.fixations))
    dists = table(("trial_id", "distribution", "label", "mass"),
                  ((L.trial_id, name, "->".join(map(str, lab)) if isinstance(lab, tuple) else lab, _f(p))
                   for L in ledgers for name, d in L.distributions.items() for lab, p in d.items()))
    return {"ledger.csv": metrics, "ledger_fixations.csv": fixes, "ledger_distributions.csv": dists}


def make_corpus(preset: str, n_trials: int, seed: int, out_dir: str | Path,
                jitter_deg: float = 0.1) -> list[Path]:
    """Write ``n_trials`` gaze logs plus the ledger tables into ``out_dir``."""
    from .io import write_trial

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    corpus = generate_corpus(preset, n_trials, seed, jitter_deg)
    paths = [write_trial(t, out / f"trial_{t.trial_id}.jsonl") for t, _ in corpus]
    for name, text in ledger_tables([L for _, L in corpus]).items():
        (out / name).write_text(text)
    return paths
