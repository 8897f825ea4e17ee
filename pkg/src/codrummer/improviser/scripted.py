"""Deterministic stand-ins for the live player and the sensor."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from ..biometric import QscLevel
from ..corpus.events import NoteEvent, Source
from ..corpus.grid import MeasureGrid, measure_duration_s, quantize_events
from ..netio.osc import QSC_TIMEOUT_S


class ScriptedMelody:
    """Seeded per-measure melody so headless sessions have a human part.

    Onsets land on eighth-note positions with random velocity and short
    sustains; each measure depends only on (seed, measure index).
    """

    def __init__(self, seed: int = 0, tempo_bpm: float = 120.0,
                 density: float = 0.4) -> None:
        self.seed = seed
        self.tempo_bpm = tempo_bpm
        self.density = density

    def measure(self, n: int) -> MeasureGrid:
        rng = np.random.default_rng(np.random.SeedSequence((self.seed, 31, n)))
        measure_s = measure_duration_s(self.tempo_bpm)
        events = []
        for eighth in range(8):
            if rng.random() > self.density:
                continue
            onset = eighth / 8.0 * measure_s
            velocity = int(rng.integers(35, 110))
            duration = float(rng.uniform(0.05, 0.45))
            events.append(
                NoteEvent(source=Source.MELODY, onset_s=onset,
                          velocity=velocity, duration_s=duration)
            )
        return quantize_events(events, self.tempo_bpm, n_measures=1)[0]


class ScriptedQsc:
    """Fixed level sequence, one query at a time; repeats the last level."""

    def __init__(self, levels: Sequence[QscLevel] = (QscLevel.MED,)) -> None:
        if not levels:
            levels = (QscLevel.MED,)
        self._levels = tuple(levels)
        self._index = 0

    def query(self, timeout_s: float = QSC_TIMEOUT_S) -> QscLevel:
        level = self._levels[min(self._index, len(self._levels) - 1)]
        self._index += 1
        return level

    def close(self) -> None:
        pass
