"""Real-time session engine, confidence metric, and condition matrix."""

from .clock import Clock, SimulatedClock, WallClock
from .conditions import BioCondition, VisCondition, apply_conditions, swap_level
from .confidence import ConfidenceTracker, confidence_metric
from .scripted import ScriptedMelody, ScriptedQsc
from .session import SessionConfig, SessionResult, run_session

__all__ = [
    "Clock",
    "SimulatedClock",
    "WallClock",
    "BioCondition",
    "VisCondition",
    "apply_conditions",
    "swap_level",
    "ConfidenceTracker",
    "confidence_metric",
    "ScriptedMelody",
    "ScriptedQsc",
    "SessionConfig",
    "SessionResult",
    "run_session",
]
