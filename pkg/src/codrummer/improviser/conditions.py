"""The experiment's condition matrix: what the display shows and what the
model is told about the player's skin conductance."""

from __future__ import annotations

from enum import Enum

from ..biometric import QscLevel


class VisCondition(Enum):
    TRUTHFUL = "truthful"
    DECEPTIVE = "deceptive"
    ABSENT = "absent"


class BioCondition(Enum):
    TRUTHFUL = "truthful"
    DECEPTIVE = "deceptive"


def swap_level(level: QscLevel) -> QscLevel:
    """High and Low trade places; Med is its own image (an involution)."""
    if level is QscLevel.HIGH:
        return QscLevel.LOW
    if level is QscLevel.LOW:
        return QscLevel.HIGH
    return QscLevel.MED


def apply_conditions(
    c_raw: float,
    qsc: QscLevel,
    vis: VisCondition,
    bio: BioCondition,
) -> tuple[float, QscLevel, bool]:
    """Map the truthful signals through the session's conditions.

    Returns (c_display, qsc_effective, featureless). Absent keeps the raw
    confidence on the wire but flags the frame featureless so the display
    renders nothing expression-like.
    """
    if vis is VisCondition.DECEPTIVE:
        c_display = 1.0 - c_raw
    else:
        c_display = c_raw
    featureless = vis is VisCondition.ABSENT
    qsc_effective = swap_level(qsc) if bio is BioCondition.DECEPTIVE else qsc
    return c_display, qsc_effective, featureless
