"""Raw duet events and the four-band loudness quantization."""

from __future__ import annotations

import enum
from dataclasses import dataclass

from ..errors import DataError


class Source(enum.Enum):
    DRUM = "drum"
    MELODY = "melody"


class VelocityBand(enum.IntEnum):
    """p < mp < mf < f, over equal 32-wide MIDI velocity bins."""

    P = 0
    MP = 1
    MF = 2
    F = 3

    @property
    def suffix(self) -> str:
        return ("p", "mp", "mf", "f")[self]


# Representative MIDI velocity when a band is turned back into an event.
_BAND_VELOCITY = {
    VelocityBand.P: 24,
    VelocityBand.MP: 51,
    VelocityBand.MF: 80,
    VelocityBand.F: 110,
}

_SUFFIX_TO_BAND = {b.suffix: b for b in VelocityBand}


def band_of_velocity(velocity: int) -> VelocityBand:
    if not 1 <= velocity <= 127:
        raise DataError(f"MIDI velocity out of range: {velocity}")
    if velocity <= 31:
        return VelocityBand.P
    if velocity <= 63:
        return VelocityBand.MP
    if velocity <= 95:
        return VelocityBand.MF
    return VelocityBand.F


def band_velocity(band: VelocityBand) -> int:
    return _BAND_VELOCITY[band]


def band_from_suffix(text: str) -> VelocityBand | None:
    return _SUFFIX_TO_BAND.get(text)


@dataclass(frozen=True)
class NoteEvent:
    """A timestamped duet event before grid quantization.

    Drums are instantaneous hits carrying a MIDI drum pitch; melody notes
    carry a duration but deliberately no pitch (the grid only ever records
    that the melody started or sustained).
    """

    source: Source
    onset_s: float
    velocity: int
    pitch: int | None = None
    duration_s: float = 0.0

    def __post_init__(self) -> None:
        if self.onset_s < 0:
            raise DataError(f"negative onset {self.onset_s}")
        if self.duration_s < 0:
            raise DataError(f"negative duration {self.duration_s}")
        if not 1 <= self.velocity <= 127:
            raise DataError(f"velocity out of range: {self.velocity}")
        if self.source is Source.DRUM:
            if self.pitch is None:
                raise DataError("drum event needs a pitch")
            if not 0 <= self.pitch <= 127:
                raise DataError(f"pitch out of range: {self.pitch}")
        elif self.pitch is not None:
            raise DataError("melody events do not carry a pitch")
