"""Entropy, Jensen-Shannon divergence and empirical Markov entropy rate (bits)."""
from __future__ import annotations

import math
from collections import Counter, defaultdict
from typing import Hashable, Sequence, Union

import numpy as np

from .model import Distribution, GazeEffortError, SupportMismatchError

PMF = Union[Distribution, Sequence[float], np.ndarray]

LN2 = math.log(2.0)


class TooShortError(GazeEffortError):
    pass


def _mass(P: PMF) -> np.ndarray:
    return P.p if isinstance(P, Distribution) else np.asarray(P, dtype=float)


def shannon_entropy(P: PMF) -> float:
    p = _mass(P)
    p = p[p > 0]
    return max(0.0, -math.fsum(p * np.log2(p)))


def jsd(P: PMF, Q: PMF) -> float:
    """Equal-weight Jensen-Shannon divergence in bits, in [0, 1].

    Each term is written as ``p * log1p((p - q) / (p + q))`` so that nearly
    equal inputs give a divergence of order ``(p - q)**2`` instead of rounding
    noise.
    """
    if isinstance(P, Distribution) and isinstance(Q, Distribution) and P.support != Q.support:
        raise SupportMismatchError(f"supports differ: {P.support} vs {Q.support}")
    p, q = _mass(P), _mass(Q)
    if p.shape != q.shape:
        raise SupportMismatchError(f"support sizes differ: {p.size} vs {q.size}")
    s = p + q
    live = s > 0
    p, q, s = p[live], q[live], s[live]
    d = (p - q) / s
    with np.errstate(divide="ignore", invalid="ignore"):
        # log1p is only the accurate form near d = 0; near d = -1 it can round
        # to log(0) even though p > 0
        lp = np.where(np.abs(d) < 0.5, np.log1p(d), np.log(2 * p / s))
        lq = np.where(np.abs(d) < 0.5, np.log1p(-d), np.log(2 * q / s))
        tp = np.where(p > 0, p * lp, 0.0)
        tq = np.where(q > 0, q * lq, 0.0)
    val = 0.5 * math.fsum(np.concatenate([tp, tq])) / LN2
    return min(1.0, max(0.0, val))


def srjsd(P: PMF, Q: PMF) -> float:
    """Square root of :func:`jsd`, a metric on distributions."""
    return math.sqrt(jsd(P, Q))


def entropy_rate(sequence: Sequence[Hashable]) -> float:
    """Entropy rate (bits per transition) of the empirical first-order chain.

    Transition rows are normalized counts; the stationary weights are the
    relative frequencies of each state as a transition source, so the result
    is the empirical conditional entropy of the next location given the
    current one.
    """
    if len(sequence) < 2:
        raise TooShortError("entropy rate needs at least two observations")
    rows: dict[Hashable, Counter] = defaultdict(Counter)
    for a, b in zip(sequence[:-1], sequence[1:]):
        rows[a][b] += 1
    n = len(sequence) - 1
    terms = []
    for counts in rows.values():
        c = np.array(list(counts.values()), dtype=float)
        row_total = c.sum()
        terms.append(row_total / n * shannon_entropy(c / row_total))
    return math.fsum(terms)
