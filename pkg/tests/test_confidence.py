from __future__ import annotations

import math

import pytest

from codrummer.errors import DataError
from codrummer.improviser.confidence import (
    EMA_ALPHA,
    INITIAL_CONFIDENCE,
    ConfidenceTracker,
    confidence_metric,
)
from codrummer.model.training import Calibration

CAL = Calibration(g_lo=0.05, g_hi=0.8)


def test_calibration_endpoints_map_to_zero_and_one():
    assert confidence_metric([CAL.g_lo] * 4, CAL) == pytest.approx(0.0, abs=1e-12)
    assert confidence_metric([CAL.g_hi] * 4, CAL) == pytest.approx(1.0, abs=1e-12)


def test_metric_is_linear_in_log_geometric_mean():
    probs = [0.2, 0.8, 0.4]
    log_g = sum(math.log(p) for p in probs) / len(probs)
    expected = (log_g - math.log(CAL.g_lo)) / (math.log(CAL.g_hi) - math.log(CAL.g_lo))
    assert confidence_metric(probs, CAL) == pytest.approx(expected, rel=1e-12)


def test_metric_clamps_outside_the_calibrated_range():
    assert confidence_metric([CAL.g_lo / 2] * 3, CAL) == 0.0
    assert confidence_metric([0.95] * 3, CAL) == 1.0


def test_metric_only_depends_on_geometric_mean():
    a = confidence_metric([0.1, 0.4], CAL)
    b = confidence_metric([0.2, 0.2], CAL)
    assert a == pytest.approx(b, rel=1e-12)


def test_smoothing_step():
    c = confidence_metric([0.4] * 2, CAL)
    smoothed = confidence_metric([0.4] * 2, CAL, prev=0.0)
    assert smoothed == pytest.approx(EMA_ALPHA * c, rel=1e-12)
    assert confidence_metric([0.4] * 2, CAL, prev=c) == pytest.approx(c, rel=1e-12)


def test_bad_probabilities_rejected():
    with pytest.raises(DataError):
        confidence_metric([], CAL)
    with pytest.raises(DataError):
        confidence_metric([0.5, 0.0], CAL)
    with pytest.raises(DataError):
        confidence_metric([1.5], CAL)
    with pytest.raises(DataError):
        confidence_metric([-0.1], CAL)


def test_tracker_halves_distance_each_tick():
    tracker = ConfidenceTracker(CAL)
    assert tracker.value == INITIAL_CONFIDENCE
    target = tracker.set_target([CAL.g_hi] * 3)
    assert target == pytest.approx(1.0)
    distances = []
    for _ in range(6):
        tracker.tick()
        distances.append(1.0 - tracker.value)
    for before, after in zip(distances, distances[1:]):
        assert after == pytest.approx(before * (1.0 - EMA_ALPHA), rel=1e-9)
    assert tracker.value == pytest.approx(1.0, abs=0.02)


def test_tracker_follows_new_targets():
    tracker = ConfidenceTracker(CAL)
    tracker.set_target([CAL.g_hi] * 2)
    for _ in range(8):
        tracker.tick()
    high = tracker.value
    tracker.set_target([CAL.g_lo] * 2)
    tracker.tick()
    assert tracker.value < high
