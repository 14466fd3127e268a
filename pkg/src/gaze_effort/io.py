"""Gaze-log (JSON lines) and CSV serialization.

A gaze log starts with a header object and continues with one sample per
line::

    {"schema":"gaze/1","participant":"P01","session":1}
    {"t":0.0,"dir":[0,0,1],"hit":[0,0,2],"depth":2.0,"pupil":3.1,"aoi":"road","speed":11.1,"valid":true}

``depth``, ``pupil``, ``aoi`` and ``speed`` may be omitted; unknown keys are
ignored.
"""
from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Any, Iterable, Optional, Sequence

from .model import Fixation, GazeEffortError, GazeSample, Trial, UNIT_TOL

SCHEMA = "gaze/1"
_META_KEYS = ("schema", "participant", "session")


class ParseError(GazeEffortError):
    def __init__(self, path, line: int, column: int, reason: str):
        self.path, self.line, self.column, self.reason = str(path), line, column, reason
        super().__init__(f"{path}:{line}:{column}: {reason}")


class SchemaError(ParseError):
    pass


def fmt(v: Optional[float]) -> str:
    """Nine significant digits; empty for missing."""
    if v is None:
        return ""
    return f"{v:.9g}"


def _col(text: str, key: str) -> int:
    i = text.find(f'"{key}"')
    return i + 1 if i >= 0 else 1


def _number(obj: dict, key: str, text: str, where, optional: bool = False) -> Optional[float]:
    if key not in obj or obj[key] is None:
        if optional:
            return None
        raise ParseError(*where, _col(text, key), f"missing field {key!r}")
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ParseError(*where, _col(text, key), f"field {key!r} must be a finite number")
    return float(v)


def _vector(obj: dict, key: str, text: str, where) -> tuple[float, float, float]:
    v = obj.get(key)
    if (not isinstance(v, list) or len(v) != 3
            or not all(isinstance(c, (int, float)) and not isinstance(c, bool) and math.isfinite(c) for c in v)):
        raise ParseError(*where, _col(text, key), f"field {key!r} must be a list of 3 finite numbers")
    return (float(v[0]), float(v[1]), float(v[2]))


def parse_sample(text: str, path: str = "<string>", line: int = 1) -> GazeSample:
    where = (path, line)
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(path, line, exc.colno, f"invalid JSON: {exc.msg}") from None
    if not isinstance(obj, dict):
        raise ParseError(path, line, 1, "expected a JSON object")
    t = _number(obj, "t", text, where)
    d = _vector(obj, "dir", text, where)
    norm = math.sqrt(sum(c * c for c in d))
    if abs(norm - 1.0) > UNIT_TOL:
        raise ParseError(path, line, _col(text, "dir"), f"'dir' is not a unit vector (|dir| = {norm:.6g})")
    hit = _vector(obj, "hit", text, where)
    depth = _number(obj, "depth", text, where, optional=True)
    if depth is not None and depth < 0:
        raise ParseError(path, line, _col(text, "depth"), "'depth' must be >= 0")
    pupil = _number(obj, "pupil", text, where, optional=True)
    speed = _number(obj, "speed", text, where, optional=True)
    aoi = obj.get("aoi")
    if aoi is not None and not isinstance(aoi, str):
        raise ParseError(path, line, _col(text, "aoi"), "'aoi' must be a string")
    valid = obj.get("valid")
    if not isinstance(valid, bool):
        raise ParseError(path, line, _col(text, "valid"), "'valid' must be true or false")
    return GazeSample(t, d, hit, depth, pupil, aoi, speed, valid)


def loads_trial(text: str, path: str = "<string>") -> Trial:
    lines = text.splitlines()
    header = None
    samples = []
    for lineno, raw in enumerate(lines, 1):
        if not raw.strip():
            continue
        if header is None:
            try:
                header = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise ParseError(path, lineno, exc.colno, f"invalid header: {exc.msg}") from None
            if not isinstance(header, dict) or header.get("schema") != SCHEMA:
                found = header.get("schema") if isinstance(header, dict) else None
                raise SchemaError(path, lineno, 1, f"expected schema {SCHEMA!r}, found {found!r}")
            continue
        samples.append(parse_sample(raw, path, lineno))
    if header is None:
        raise SchemaError(path, 1, 1, "empty file: missing header")
    meta = {k: v for k, v in header.items() if k not in _META_KEYS}
    try:
        session = int(header.get("session", 0))
    except (TypeError, ValueError):
        raise SchemaError(path, 1, _col(lines[0], "session"), "'session' must be an integer") from None
    return Trial(str(header.get("participant", Path(path).stem)), session, tuple(samples), metadata=meta)


def parse_trial(path: str | Path) -> Trial:
    path = Path(path)
    return loads_trial(path.read_text(), str(path))


def dumps_trial(trial: Trial) -> str:
    head = {"schema": SCHEMA, "participant": trial.participant_id, "session": trial.session_index}
    head.update(trial.metadata)
    out = [json.dumps(head, separators=(",", ":"))]
    for s in trial.samples:
        obj: dict[str, Any] = {"t": s.t, "dir": list(s.dir), "hit": list(s.hit), "depth": s.depth}
        for key in ("pupil", "aoi", "speed"):
            if getattr(s, key) is not None:
                obj[key] = getattr(s, key)
        obj["valid"] = s.valid
        out.append(json.dumps(obj, separators=(",", ":")))
    return "\n".join(out) + "\n"


def write_trial(trial: Trial, path: str | Path) -> Path:
    path = Path(path)
    path.write_text(dumps_trial(trial))
    return path


# --- CSV tables --------------------------------------------------------------

def _csv(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def metrics_csv(rows) -> str:
    from .measures import MetricsRow

    names = MetricsRow.value_fields()
    return _csv(
        ("trial_id",) + names + ("diagnostics",),
        ([r.trial_id] + [fmt(getattr(r, k)) for k in names]
         + ["; ".join(f"{k}: {v}" for k, v in sorted(r.diagnostics.items()))] for r in rows),
    )


def read_metrics_csv(path: str | Path) -> list[dict[str, Any]]:
    """Rows as dicts; metric values are floats or ``None``."""
    out = []
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            row: dict[str, Any] = {}
            for k, v in rec.items():
                if k in ("trial_id", "diagnostics"):
                    row[k] = v
                else:
                    row[k] = float(v) if v != "" else None
            out.append(row)
    return out


def fixations_csv(trials: Iterable[Trial]) -> str:
    header = ("trial_id", "index", "start", "end", "tau", "first", "last", "aoi", "cell",
              "rho", "u_mag", "m", "I", "J")

    def row(t: Trial, f: Fixation):
        return (t.trial_id, f.index, fmt(f.start), fmt(f.end), fmt(f.tau), f.first, f.last,
                f.aoi or "", "" if f.cell is None else f.cell, fmt(f.rho), fmt(f.u_mag),
                fmt(f.m), fmt(f.I), fmt(f.J))

    return _csv(header, (row(t, f) for t in trials for f in t.fixations))
