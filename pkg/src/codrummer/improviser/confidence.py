"""Confidence proxy derived from the probabilities the model assigned to
its own sampled tokens."""

from __future__ import annotations

import math
from typing import Sequence

from ..errors import DataError
from ..model.training import Calibration

EMA_ALPHA = 0.5
INITIAL_CONFIDENCE = 0.5


def _normalized(chosen_probs: Sequence[float], calibration: Calibration) -> float:
    if len(chosen_probs) == 0:
        raise DataError("confidence needs at least one probability")
    if any(not 0.0 < p <= 1.0 for p in chosen_probs):
        raise DataError("chosen probabilities must lie in (0, 1]")
    log_g = sum(math.log(p) for p in chosen_probs) / len(chosen_probs)
    lo = math.log(calibration.g_lo)
    hi = math.log(calibration.g_hi)
    c = (log_g - lo) / (hi - lo)
    return min(1.0, max(0.0, c))


def confidence_metric(
    chosen_probs: Sequence[float],
    calibration: Calibration,
    prev: float | None = None,
    alpha: float = EMA_ALPHA,
) -> float:
    """Geometric mean of the chosen probabilities, placed on the calibrated
    [0,1] scale; optionally one smoothing step away from `prev`."""
    c = _normalized(chosen_probs, calibration)
    if prev is None:
        return c
    return alpha * c + (1.0 - alpha) * prev


class ConfidenceTracker:
    """Holds the smoothed confidence between display frames.

    A new measure sets the target; every 0.5 s frame moves the smoothed
    value halfway toward it.
    """

    def __init__(self, calibration: Calibration, alpha: float = EMA_ALPHA,
                 initial: float = INITIAL_CONFIDENCE) -> None:
        self._calibration = calibration
        self._alpha = alpha
        self._target = initial
        self.value = initial

    def set_target(self, chosen_probs: Sequence[float]) -> float:
        self._target = _normalized(chosen_probs, self._calibration)
        return self._target

    def tick(self) -> float:
        self.value = self._alpha * self._target + (1.0 - self._alpha) * self.value
        return self.value
