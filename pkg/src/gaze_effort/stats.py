"""Correlation coefficients with two-sided p-values, and the correlation table."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from .model import GazeEffortError

FAMILIES = ("pearson", "kendall", "spearman")
MEASURES = (
    ("cem_vi", "CEM_VI"),
    ("cem_iq", "CEM_IQ"),
    ("check_rate", "Check Rate"),
    ("sge", "SGE"),
    ("entropy_rate", "Entropy Rate"),
)
GROUND_TRUTHS = (
    ("pupil_size_change", "Pupil Size Change"),
    ("fixation_rate", "Fixation Rate"),
)


class StatsError(GazeEffortError):
    pass


class ZeroVarianceError(StatsError):
    pass


class InsufficientDataError(StatsError):
    pass


# --- special functions -------------------------------------------------------

def _betacf(a: float, b: float, x: float, max_iter: int = 500, eps: float = 1e-16) -> float:
    # modified Lentz evaluation of the incomplete-beta continued fraction
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c, d = 1.0, 1.0 - qab * x / qap
    d = 1.0 / (d if abs(d) > tiny else tiny)
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = 1.0 / (d if abs(d) > tiny else tiny)
        c = 1.0 + aa / c
        c = c if abs(c) > tiny else tiny
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = 1.0 / (d if abs(d) > tiny else tiny)
        c = 1.0 + aa / c
        c = c if abs(c) > tiny else tiny
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < eps:
            return h
    raise StatsError("incomplete beta continued fraction did not converge")


def betainc(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta function I_x(a, b)."""
    if not (a > 0 and b > 0):
        raise ValueError("a and b must be positive")
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    log_front = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                 + a * math.log(x) + b * math.log1p(-x))
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def t_two_sided_p(t: float, df: float) -> float:
    """Two-sided tail probability of Student's t with ``df`` degrees of freedom."""
    if math.isinf(t):
        return 0.0
    return min(1.0, betainc(0.5 * df, 0.5, df / (df + t * t)))


def normal_two_sided_p(z: float) -> float:
    return math.erfc(abs(z) / math.sqrt(2.0))


def r_to_p(r: float, n: int) -> float:
    """Two-sided p of a Pearson-type coefficient via the t statistic."""
    if n < 3:
        raise InsufficientDataError("need n >= 3")
    if abs(r) >= 1.0:
        return 0.0
    t = r * math.sqrt((n - 2) / (1.0 - r * r))
    return t_two_sided_p(t, n - 2)


def kendall_tau_to_p(tau: float, n: int) -> float:
    """Two-sided p of a tie-free Kendall tau under the normal approximation."""
    if n < 3:
        raise InsufficientDataError("need n >= 3")
    s = tau * n * (n - 1) / 2.0
    var = n * (n - 1) * (2 * n + 5) / 18.0
    return normal_two_sided_p(s / math.sqrt(var))


# --- coefficients ------------------------------------------------------------

def _prepare(x, y) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise StatsError(f"length mismatch: {x.shape} vs {y.shape}")
    if x.size < 3:
        raise InsufficientDataError(f"need n >= 3, got {x.size}")
    if np.all(x == x[0]) or np.all(y == y[0]):
        raise ZeroVarianceError("input has zero variance")
    return x, y


def _pearson_r(x: np.ndarray, y: np.ndarray) -> float:
    xc = x - x.mean()
    yc = y - y.mean()
    r = float(np.dot(xc, yc) / math.sqrt(np.dot(xc, xc) * np.dot(yc, yc)))
    return max(-1.0, min(1.0, r))


def pearson(x, y) -> tuple[float, float]:
    x, y = _prepare(x, y)
    r = _pearson_r(x, y)
    return r, r_to_p(r, x.size)


def midranks(a) -> np.ndarray:
    """1-based ranks, ties sharing the average of their positions."""
    a = np.asarray(a, dtype=float)
    order = np.argsort(a, kind="mergesort")
    sa = a[order]
    ranks = np.empty(a.size)
    i = 0
    while i < a.size:
        j = i
        while j + 1 < a.size and sa[j + 1] == sa[i]:
            j += 1
        ranks[order[i:j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def spearman(x, y) -> tuple[float, float]:
    x, y = _prepare(x, y)
    rho = _pearson_r(midranks(x), midranks(y))
    return rho, r_to_p(rho, x.size)


def _tie_groups(sorted_vals: np.ndarray) -> np.ndarray:
    """Sizes of runs of equal values in an already sorted array."""
    if sorted_vals.size == 0:
        return np.array([], dtype=np.int64)
    edges = np.flatnonzero(np.diff(sorted_vals) != 0) + 1
    bounds = np.concatenate([[0], edges, [sorted_vals.size]])
    return np.diff(bounds).astype(np.int64)


def _count_swaps(a: list) -> int:
    """Number of inversions in ``a`` (merge sort, sorts ``a`` in place)."""
    n = len(a)
    if n < 2:
        return 0
    mid = n // 2
    left, right = a[:mid], a[mid:]
    swaps = _count_swaps(left) + _count_swaps(right)
    i = j = k = 0
    while i < len(left) and j < len(right):
        if right[j] < left[i]:
            a[k] = right[j]
            j += 1
            swaps += len(left) - i
        else:
            a[k] = left[i]
            i += 1
        k += 1
    a[k:] = left[i:] + right[j:]
    return swaps


def kendall(x, y) -> tuple[float, float]:
    """Kendall tau-b (Knight's O(n log n) algorithm) and asymptotic p-value.

    The p-value uses the normal approximation of S = concordant - discordant
    with the tie-corrected variance.
    """
    x, y = _prepare(x, y)
    n = x.size
    order = np.lexsort((y, x))
    xs, ys = x[order], y[order]

    def tied_pairs(groups):
        return int(np.sum(groups * (groups - 1) // 2))

    n0 = n * (n - 1) // 2
    tx = _tie_groups(xs)
    n1 = tied_pairs(tx)
    # pairs tied in both x and y (ys is sorted within each x-run)
    bounds = np.concatenate([[0], np.cumsum(tx)])
    n3 = sum(tied_pairs(_tie_groups(ys[a:b])) for a, b in zip(bounds[:-1], bounds[1:]))
    swaps = _count_swaps(list(ys))
    ty = _tie_groups(np.sort(y))
    n2 = tied_pairs(ty)

    s = n0 - n1 - n2 + n3 - 2 * swaps
    tau = s / math.sqrt((n0 - n1) * (n0 - n2))

    v0 = n * (n - 1) * (2 * n + 5)
    vt = float(np.sum(tx * (tx - 1) * (2 * tx + 5)))
    vu = float(np.sum(ty * (ty - 1) * (2 * ty + 5)))
    v1 = float(np.sum(tx * (tx - 1))) * float(np.sum(ty * (ty - 1)))
    v2 = float(np.sum(tx * (tx - 1) * (tx - 2))) * float(np.sum(ty * (ty - 1) * (ty - 2)))
    var_s = (v0 - vt - vu) / 18.0 + v1 / (2.0 * n * (n - 1)) + v2 / (9.0 * n * (n - 1) * (n - 2))
    p = normal_two_sided_p(s / math.sqrt(var_s)) if var_s > 0 else 1.0
    return max(-1.0, min(1.0, tau)), p


COEFFICIENTS = {"pearson": pearson, "kendall": kendall, "spearman": spearman}


# --- report ------------------------------------------------------------------

@dataclass(frozen=True)
class Cell:
    cc: Optional[float]
    p: Optional[float]
    n: int
    error: Optional[str] = None


@dataclass
class CorrelationReport:
    """Measures x ground truths x coefficient families, Table-1 style."""

    rows: tuple[str, ...]
    columns: tuple[str, ...]
    cells: dict[tuple[str, str, str], Cell] = field(default_factory=dict)
    alpha_levels: tuple[float, ...] = (0.05, 0.01, 0.001)

    @property
    def n(self) -> int:
        return max((c.n for c in self.cells.values()), default=0)

    def stars(self, p: Optional[float]) -> str:
        if p is None:
            return ""
        return "*" * sum(p < a for a in self.alpha_levels)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["measure", "ground_truth", "family", "cc", "p_value", "n", "stars", "error"])
        for (r, c, fam), cell in self.cells.items():
            w.writerow([r, c, fam, _fmt(cell.cc), _fmt(cell.p), cell.n, self.stars(cell.p), cell.error or ""])
        return buf.getvalue()

    def to_markdown(self) -> str:
        labels = dict(MEASURES) | dict(GROUND_TRUTHS)
        head = ["Correlation"]
        for c in self.columns:
            for fam in FAMILIES:
                head += [f"{labels.get(c, c)} / {fam.title()} CC", "p-value"]
        lines = ["| " + " | ".join(head) + " |", "|" + "---|" * len(head)]
        for r in self.rows:
            out = [labels.get(r, r)]
            for c in self.columns:
                for fam in FAMILIES:
                    cell = self.cells[(r, c, fam)]
                    if cell.error:
                        out += ["n/a", cell.error]
                    else:
                        out += [f"{cell.cc:.2f}", f"{cell.p:.3g}{self.stars(cell.p)}"]
            lines.append("| " + " | ".join(out) + " |")
        levels = ", ".join(f"{'*' * (i + 1)}: p<{a:g}" for i, a in enumerate(self.alpha_levels))
        lines += ["", f"n = {self.n}; {levels}"]
        return "\n".join(lines) + "\n"


def _fmt(v: Optional[float]) -> str:
    return "" if v is None else f"{v:.9g}"


def correlation_table(rows: Sequence[Mapping[str, Optional[float]]],
                      measures: Sequence[str] = tuple(k for k, _ in MEASURES),
                      ground_truths: Sequence[str] = tuple(k for k, _ in GROUND_TRUTHS),
                      alpha_levels: Sequence[float] = (0.05, 0.01, 0.001)) -> CorrelationReport:
    """Correlate every measure with every ground truth under all three families.

    Rows whose value is missing or non-finite for either variable are dropped
    for that cell only. Per-cell failures (zero variance, too few rows) are
    recorded in the cell instead of aborting the table.
    """
    if len(rows) < 3:
        raise InsufficientDataError(f"need >= 3 metric rows, got {len(rows)}")
    report = CorrelationReport(tuple(measures), tuple(ground_truths), alpha_levels=tuple(alpha_levels))
    for m in measures:
        for g in ground_truths:
            pairs = [(r.get(m), r.get(g)) for r in rows]
            pairs = [(a, b) for a, b in pairs
                     if a is not None and b is not None and math.isfinite(a) and math.isfinite(b)]
            x = [a for a, _ in pairs]
            y = [b for _, b in pairs]
            for fam in FAMILIES:
                try:
                    cc, p = COEFFICIENTS[fam](x, y)
                    report.cells[(m, g, fam)] = Cell(cc, p, len(pairs))
                except StatsError as exc:
                    report.cells[(m, g, fam)] = Cell(None, None, len(pairs), _reason(exc))
    return report


def _reason(exc: StatsError) -> str:
    if isinstance(exc, ZeroVarianceError):
        return "zero-variance"
    if isinstance(exc, InsufficientDataError):
        return "insufficient-data"
    return str(exc)
