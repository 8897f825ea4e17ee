"""The beat grid: 4 beats x 12 steps per beat, one composite cell per step."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from ..errors import DataError
from .events import NoteEvent, Source, VelocityBand, band_of_velocity

BEATS_PER_MEASURE = 4
STEPS_PER_BEAT = 12
STEPS_PER_MEASURE = BEATS_PER_MEASURE * STEPS_PER_BEAT  # 48

# (pitch, band) for one drum voice in one cell
DrumHit = tuple[int, VelocityBand]


@dataclass(frozen=True)
class MelodyOnset:
    band: VelocityBand


@dataclass(frozen=True)
class MelodySustain:
    pass


SUSTAIN = MelodySustain()


@dataclass(frozen=True)
class GridCell:
    """What sounded in one grid step: at most one melody element plus drum hits.

    `drums` is kept sorted by pitch and unique per pitch so that cells compare
    and hash structurally.
    """

    melody: MelodyOnset | MelodySustain | None = None
    drums: tuple[DrumHit, ...] = ()

    def __post_init__(self) -> None:
        pitches = [p for p, _ in self.drums]
        if len(set(pitches)) != len(pitches):
            raise DataError(f"duplicate drum pitch in cell: {pitches}")
        if list(pitches) != sorted(pitches):
            object.__setattr__(self, "drums", tuple(sorted(self.drums)))

    @property
    def is_empty(self) -> bool:
        return self.melody is None and not self.drums


EMPTY_CELL = GridCell()


@dataclass(frozen=True)
class MeasureGrid:
    """Exactly 48 cells, one per grid step of a 4/4 measure."""

    cells: tuple[GridCell, ...]

    def __post_init__(self) -> None:
        if len(self.cells) != STEPS_PER_MEASURE:
            raise DataError(f"measure needs {STEPS_PER_MEASURE} cells, got {len(self.cells)}")

    @classmethod
    def empty(cls) -> "MeasureGrid":
        return cls(cells=(EMPTY_CELL,) * STEPS_PER_MEASURE)

    def with_cell(self, step: int, cell: GridCell) -> "MeasureGrid":
        cells = list(self.cells)
        cells[step] = cell
        return MeasureGrid(cells=tuple(cells))


def step_duration_s(tempo_bpm: float, steps_per_beat: int = STEPS_PER_BEAT) -> float:
    if tempo_bpm <= 0:
        raise DataError(f"tempo must be positive, got {tempo_bpm}")
    return 60.0 / tempo_bpm / steps_per_beat


def measure_duration_s(tempo_bpm: float) -> float:
    return step_duration_s(tempo_bpm) * STEPS_PER_MEASURE


def _snap(x: float) -> int:
    # Nearest step, exact midpoints toward the earlier step.
    return max(0, math.ceil(x - 0.5))


class _CellBuilder:
    __slots__ = ("melody", "drums")

    def __init__(self) -> None:
        self.melody: MelodyOnset | MelodySustain | None = None
        self.drums: dict[int, VelocityBand] = {}

    def add_drum(self, pitch: int, band: VelocityBand) -> None:
        prev = self.drums.get(pitch)
        if prev is None or band > prev:
            self.drums[pitch] = band

    def add_onset(self, band: VelocityBand) -> None:
        if isinstance(self.melody, MelodyOnset):
            if band > self.melody.band:
                self.melody = MelodyOnset(band)
        else:
            self.melody = MelodyOnset(band)

    def add_sustain(self) -> None:
        if self.melody is None:
            self.melody = SUSTAIN

    def build(self) -> GridCell:
        return GridCell(
            melody=self.melody,
            drums=tuple(sorted(self.drums.items())),
        )


def quantize_events(
    events: Sequence[NoteEvent],
    tempo_bpm: float,
    steps_per_beat: int = STEPS_PER_BEAT,
    n_measures: int | None = None,
) -> list[MeasureGrid]:
    """Snap events to the grid and fold them into per-measure cell arrays.

    Each event lands on its nearest step (midpoints round down). A melody
    note writes an onset at its snapped step and sustains into every later
    step its duration covers. Two hits of the same drum in one cell keep the
    louder band; an onset outranks a sustain landing in the same cell.

    An empty event list yields one all-silent measure; `n_measures` pads the
    tail with silence when more measures are requested than the events need.
    """
    if steps_per_beat <= 0:
        raise DataError(f"steps_per_beat must be positive, got {steps_per_beat}")
    step_s = step_duration_s(tempo_bpm, steps_per_beat)
    steps_per_measure = BEATS_PER_MEASURE * steps_per_beat
    if steps_per_measure != STEPS_PER_MEASURE:
        raise DataError("grid is fixed at 4 beats x 12 steps; other resolutions are not supported")

    builders: dict[int, _CellBuilder] = {}

    def builder(step: int) -> _CellBuilder:
        b = builders.get(step)
        if b is None:
            b = builders[step] = _CellBuilder()
        return b

    last_step = -1
    for ev in sorted(events, key=lambda e: e.onset_s):
        if ev.onset_s < 0:
            raise DataError(f"negative onset {ev.onset_s}")
        onset_step = _snap(ev.onset_s / step_s)
        last_step = max(last_step, onset_step)
        if ev.source is Source.DRUM:
            assert ev.pitch is not None
            builder(onset_step).add_drum(ev.pitch, band_of_velocity(ev.velocity))
        else:
            builder(onset_step).add_onset(band_of_velocity(ev.velocity))
            if ev.duration_s > 0:
                end_step = math.ceil((ev.onset_s + ev.duration_s) / step_s) - 1
                for s in range(onset_step + 1, end_step + 1):
                    builder(s).add_sustain()
                last_step = max(last_step, end_step)

    needed = max(1, math.ceil((last_step + 1) / steps_per_measure)) if last_step >= 0 else 1
    total = max(needed, n_measures or 0)

    measures: list[MeasureGrid] = []
    for m in range(total):
        cells = []
        for s in range(steps_per_measure):
            b = builders.get(m * steps_per_measure + s)
            cells.append(b.build() if b is not None else EMPTY_CELL)
        measures.append(MeasureGrid(cells=tuple(cells)))
    return measures


def merge_grids(a: MeasureGrid, b: MeasureGrid) -> MeasureGrid:
    """Overlay two measures (e.g. the melody part and the drum part).

    Drum hits union per pitch keeping the louder band; an onset beats a
    sustain when both claim the same cell.
    """
    cells = []
    for ca, cb in zip(a.cells, b.cells):
        builder = _CellBuilder()
        for cell in (ca, cb):
            if isinstance(cell.melody, MelodyOnset):
                builder.add_onset(cell.melody.band)
            elif isinstance(cell.melody, MelodySustain):
                builder.add_sustain()
            for pitch, band in cell.drums:
                builder.add_drum(pitch, band)
        cells.append(builder.build())
    return MeasureGrid(cells=tuple(cells))
