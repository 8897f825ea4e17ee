"""MIDI event sinks for the session engine.

The engine schedules drum hits as note-on messages on channel 10 (index 9)
with General MIDI drum pitches. Real device output is out of scope for the
headless environment; sinks either collect events for inspection or drop
them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Protocol

from ..errors import DataError

NOTE_ON = "note_on"
NOTE_OFF = "note_off"
DRUM_CHANNEL = 9


@dataclass(frozen=True)
class MidiEvent:
    t_ms: float
    status: str
    channel: int
    pitch: int
    velocity: int

    def __post_init__(self) -> None:
        if self.status not in (NOTE_ON, NOTE_OFF):
            raise DataError(f"unknown status {self.status!r}")
        if not 0 <= self.channel <= 15:
            raise DataError(f"channel {self.channel} out of range")
        if not 0 <= self.pitch <= 127:
            raise DataError(f"pitch {self.pitch} out of range")
        if not 0 <= self.velocity <= 127:
            raise DataError(f"velocity {self.velocity} out of range")


class MidiSink(Protocol):
    def send(self, event: MidiEvent) -> None: ...

    def close(self) -> None: ...


@dataclass
class CollectorSink:
    """Keeps every event; what the tests assert scheduling accuracy on."""

    events: list[MidiEvent] = field(default_factory=list)

    def send(self, event: MidiEvent) -> None:
        self.events.append(event)

    def close(self) -> None:
        pass


class NullSink:
    def send(self, event: MidiEvent) -> None:
        pass

    def close(self) -> None:
        pass
