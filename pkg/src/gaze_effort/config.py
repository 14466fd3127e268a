"""Pipeline configuration and its flat ``key = value`` file format.

Example::

    # comments start with '#'
    grid.n_g = 5
    grid.half_angle_deg = 50
    detector.dispersion_deg = 1.0
    detector.min_fix_ms = 100
    detector.max_gap = 3
    measures.check_set = ["mirror", "instrument", "periphery"]
    modes.pg_mode = cell
    modes.arc_mode = path
    modes.support = auto
    stats.alpha_levels = [0.05, 0.01, 0.001]

Values are Python literals; bare words are read as strings.
"""
from __future__ import annotations

import ast
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .distributions import PG_MODES, SUPPORT_MODES
from .fixation import DetectorParams
from .model import GazeEffortError, GridSpec
from .retinal import ARC_MODES

DEFAULT_CHECK_SET = ("mirror", "instrument", "periphery")


class ConfigError(GazeEffortError):
    pass


@dataclass(frozen=True)
class Config:
    grid: GridSpec = field(default_factory=GridSpec)
    detector: DetectorParams = field(default_factory=DetectorParams)
    check_set: tuple[str, ...] = DEFAULT_CHECK_SET
    pg_mode: str = "cell"
    arc_mode: str = "path"
    support: str = "auto"
    alpha_levels: tuple[float, ...] = (0.05, 0.01, 0.001)

    def __post_init__(self):
        if self.pg_mode not in PG_MODES:
            raise ConfigError(f"pg_mode must be one of {PG_MODES}")
        if self.arc_mode not in ARC_MODES:
            raise ConfigError(f"arc_mode must be one of {ARC_MODES}")
        if self.support not in SUPPORT_MODES:
            raise ConfigError(f"support must be one of {SUPPORT_MODES}")
        object.__setattr__(self, "check_set", tuple(self.check_set))
        object.__setattr__(self, "alpha_levels", tuple(sorted(self.alpha_levels, reverse=True)))

    def to_text(self) -> str:
        return "\n".join(f"{k} = {v!r}" for k, v in self.flat().items()) + "\n"

    def flat(self) -> dict[str, Any]:
        return {
            "grid.n_g": self.grid.n_g,
            "grid.half_angle_deg": self.grid.half_angle,
            "detector.dispersion_deg": self.detector.dispersion_threshold,
            "detector.min_fix_ms": self.detector.min_duration * 1000.0,
            "detector.max_gap": self.detector.max_gap,
            "measures.check_set": list(self.check_set),
            "modes.pg_mode": self.pg_mode,
            "modes.arc_mode": self.arc_mode,
            "modes.support": self.support,
            "stats.alpha_levels": list(self.alpha_levels),
        }

    def updated(self, **flat: Any) -> "Config":
        """Copy with flat keys (``"grid.n_g"`` style) overridden; ``None`` values are ignored."""
        cur = self.flat()
        for k, v in flat.items():
            if k not in cur:
                raise ConfigError(f"unknown config key {k!r}")
            if v is not None:
                cur[k] = v
        try:
            return Config(
                grid=GridSpec(int(cur["grid.n_g"]), float(cur["grid.half_angle_deg"])),
                detector=DetectorParams(float(cur["detector.dispersion_deg"]),
                                        float(cur["detector.min_fix_ms"]) / 1000.0,
                                        int(cur["detector.max_gap"])),
                check_set=tuple(_as_list(cur["measures.check_set"])),
                pg_mode=str(cur["modes.pg_mode"]),
                arc_mode=str(cur["modes.arc_mode"]),
                support=str(cur["modes.support"]),
                alpha_levels=tuple(float(a) for a in _as_list(cur["stats.alpha_levels"])),
            )
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc


def _as_list(v: Any) -> list:
    if isinstance(v, str):
        return [s.strip() for s in v.split(",") if s.strip()]
    return list(v)


def _literal(text: str) -> Any:
    try:
        return ast.literal_eval(text)
    except (ValueError, SyntaxError):
        return text


def parse_config(text: str, base: Config = Config()) -> Config:
    values: dict[str, Any] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, val = (s.strip() for s in line.split("=", 1))
        values[key] = _literal(val)
    try:
        return base.updated(**values)
    except ConfigError as exc:
        raise ConfigError(f"config: {exc}") from None


def load_config(path: str | Path | None) -> Config:
    if path is None:
        return Config()
    return parse_config(Path(path).read_text())
