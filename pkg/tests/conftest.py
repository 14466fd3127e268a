import math

import numpy as np
import pytest

from gaze_effort.model import GazeSample, Trial
from gaze_effort.synth import generate_corpus

RATE = 90.0

_acceptance_lines: list[str] = []


def record(criterion: str, ok: bool, detail: str = "") -> None:
    """Log one acceptance line; the summary is printed at the end of the run."""
    _acceptance_lines.append(f"[{'PASS' if ok else 'FAIL'}] {criterion}" + (f" -- {detail}" if detail else ""))


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)


def unit(yaw_deg: float, pitch_deg: float = 0.0) -> tuple:
    y, p = math.radians(yaw_deg), math.radians(pitch_deg)
    return (math.cos(p) * math.sin(y), math.sin(p), math.cos(p) * math.cos(y))


def samples_from(dirs, depth=2.0, t0=0.0, rate=RATE, **kw):
    """Samples looking along ``dirs``, hit points at ``depth`` along each ray."""
    out = []
    for i, d in enumerate(dirs):
        d = np.asarray(d, dtype=float)
        d = d / np.linalg.norm(d)
        out.append(GazeSample(t0 + i / rate, tuple(d), tuple(depth * d), **kw))
    return out


def trial_of(samples, fixations=(), pid="T", session=1):
    return Trial(pid, session, tuple(samples), tuple(fixations))


@pytest.fixture(scope="session")
def exact_corpus():
    """Jitter-free 56-trial mixed corpus with its ledgers."""
    return generate_corpus("mixed", 56, 7, 0.0)
