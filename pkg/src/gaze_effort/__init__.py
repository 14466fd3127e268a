"""Information-theoretic cognitive-effort measures from eye-tracking logs."""
from .config import Config, load_config, parse_config
from .model import Distribution, Fixation, GazeEffortError, GazeSample, GridSpec, Trial, validate_trial

__version__ = "0.1.0"

__all__ = [
    "Config", "Distribution", "Fixation", "GazeEffortError", "GazeSample", "GridSpec", "Trial",
    "load_config", "parse_config", "validate_trial",
]
