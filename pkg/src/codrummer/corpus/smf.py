"""Minimal Standard MIDI File reader/writer for offline corpus ingestion.

Covers format 0/1 files with tick-per-quarter timing: note on/off, tempo
meta events, and enough of the rest of the grammar (running status, sysex,
other meta/channel messages) to skip what we do not use. Drum hits live on
MIDI channel 10 (index 9) per General MIDI.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from ..errors import DataError
from .events import NoteEvent, Source

DRUM_CHANNEL = 9
DEFAULT_TEMPO_US = 500_000  # microseconds per quarter note = 120 bpm
_MELODY_WRITE_PITCH = 72


@dataclass(frozen=True)
class TimedNote:
    """A note-on resolved against its note-off, in absolute ticks."""

    channel: int
    pitch: int
    velocity: int
    on_tick: int
    off_tick: int


def _read_varint(data: bytes, pos: int) -> tuple[int, int]:
    value = 0
    for _ in range(4):
        if pos >= len(data):
            raise DataError("truncated variable-length quantity")
        byte = data[pos]
        pos += 1
        value = (value << 7) | (byte & 0x7F)
        if not byte & 0x80:
            return value, pos
    raise DataError("variable-length quantity longer than 4 bytes")


def _write_varint(value: int) -> bytes:
    if value < 0:
        raise DataError(f"negative delta time {value}")
    out = [value & 0x7F]
    value >>= 7
    while value:
        out.append((value & 0x7F) | 0x80)
        value >>= 7
    return bytes(reversed(out))


_DATA_BYTES = {0x80: 2, 0x90: 2, 0xA0: 2, 0xB0: 2, 0xC0: 1, 0xD0: 1, 0xE0: 2}


def _parse_track(data: bytes) -> tuple[list[TimedNote], list[tuple[int, int]]]:
    """One MTrk payload -> (closed notes, tempo changes as (tick, us/qn))."""
    notes: list[TimedNote] = []
    tempos: list[tuple[int, int]] = []
    open_notes: dict[tuple[int, int], list[tuple[int, int]]] = {}
    pos = 0
    tick = 0
    running_status: int | None = None

    def close(channel: int, pitch: int, off_tick: int) -> None:
        stack = open_notes.get((channel, pitch))
        if stack:
            on_tick, velocity = stack.pop(0)
            notes.append(TimedNote(channel, pitch, velocity, on_tick, off_tick))

    while pos < len(data):
        delta, pos = _read_varint(data, pos)
        tick += delta
        if pos >= len(data):
            raise DataError("truncated track event")
        byte = data[pos]
        if byte & 0x80:
            status = byte
            pos += 1
            if status < 0xF0:
                running_status = status
        else:
            if running_status is None:
                raise DataError("data byte with no running status")
            status = running_status

        if status == 0xFF:
            if pos >= len(data):
                raise DataError("truncated meta event")
            meta_type = data[pos]
            length, pos = _read_varint(data, pos + 1)
            payload = data[pos:pos + length]
            if len(payload) != length:
                raise DataError("truncated meta payload")
            pos += length
            if meta_type == 0x51 and length == 3:
                tempos.append((tick, int.from_bytes(payload, "big")))
            elif meta_type == 0x2F:
                break
        elif status in (0xF0, 0xF7):
            length, pos = _read_varint(data, pos)
            pos += length
            if pos > len(data):
                raise DataError("truncated sysex payload")
        else:
            kind = status & 0xF0
            n = _DATA_BYTES.get(kind)
            if n is None:
                raise DataError(f"unsupported status byte 0x{status:02x}")
            if pos + n > len(data):
                raise DataError("truncated channel message")
            d = data[pos:pos + n]
            pos += n
            channel = status & 0x0F
            if kind == 0x90 and d[1] > 0:
                open_notes.setdefault((channel, d[0]), []).append((tick, d[1]))
            elif kind == 0x80 or (kind == 0x90 and d[1] == 0):
                close(channel, d[0], tick)

    for (channel, pitch), stack in open_notes.items():
        for on_tick, velocity in stack:
            notes.append(TimedNote(channel, pitch, velocity, on_tick, max(tick, on_tick)))
    return notes, tempos


@dataclass(frozen=True)
class MidiFile:
    ticks_per_quarter: int
    notes: tuple[TimedNote, ...]
    tempos: tuple[tuple[int, int], ...]  # (tick, microseconds per quarter)


def read_midi_file(path: str | Path) -> MidiFile:
    try:
        data = Path(path).read_bytes()
    except FileNotFoundError:
        raise DataError(f"{path}: MIDI file not found") from None
    pos = 0
    if len(data) < 14 or data[:4] != b"MThd":
        raise DataError(f"{path}: not a Standard MIDI File")
    header_len, fmt, ntrks, division = struct.unpack(">LHHH", data[4:14])
    if header_len != 6:
        raise DataError(f"{path}: unexpected MThd length {header_len}")
    if division & 0x8000:
        raise DataError(f"{path}: SMPTE time division is not supported")
    pos = 14
    notes: list[TimedNote] = []
    tempos: list[tuple[int, int]] = []
    tracks_seen = 0
    while pos + 8 <= len(data) and tracks_seen < ntrks:
        chunk_type = data[pos:pos + 4]
        (length,) = struct.unpack(">L", data[pos + 4:pos + 8])
        body = data[pos + 8:pos + 8 + length]
        if len(body) != length:
            raise DataError(f"{path}: truncated chunk {chunk_type!r}")
        pos += 8 + length
        if chunk_type != b"MTrk":
            continue
        tracks_seen += 1
        track_notes, track_tempos = _parse_track(body)
        notes.extend(track_notes)
        tempos.extend(track_tempos)
    if tracks_seen == 0:
        raise DataError(f"{path}: no MTrk chunks")
    tempos.sort()
    return MidiFile(
        ticks_per_quarter=division,
        notes=tuple(sorted(notes, key=lambda n: (n.on_tick, n.channel, n.pitch))),
        tempos=tuple(tempos),
    )


def _tick_clock(midi: MidiFile):
    """Return tick -> seconds under the file's tempo map."""
    changes = [(0, DEFAULT_TEMPO_US)]
    for tick, us in midi.tempos:
        if tick == 0:
            changes[0] = (0, us)
        else:
            changes.append((tick, us))
    spans: list[tuple[int, float, int]] = []  # (start_tick, start_s, us/qn)
    t = 0.0
    for i, (tick, us) in enumerate(changes):
        if i > 0:
            prev_tick, prev_s, prev_us = spans[-1]
            t = prev_s + (tick - prev_tick) * prev_us * 1e-6 / midi.ticks_per_quarter
        spans.append((tick, t, us))

    def to_seconds(tick: int) -> float:
        start_tick, start_s, us = spans[0]
        for span in spans:
            if span[0] > tick:
                break
            start_tick, start_s, us = span
        return start_s + (tick - start_tick) * us * 1e-6 / midi.ticks_per_quarter

    return to_seconds


def midi_to_events(
    midi: MidiFile,
    drum_channel: int = DRUM_CHANNEL,
) -> list[NoteEvent]:
    """Resolve a parsed file into the event model.

    Notes on `drum_channel` become instantaneous drum hits; every other
    channel is treated as the melody line (pitch discarded downstream,
    duration kept for sustain coverage).
    """
    to_seconds = _tick_clock(midi)
    events: list[NoteEvent] = []
    for note in midi.notes:
        onset = to_seconds(note.on_tick)
        velocity = max(1, note.velocity)
        if note.channel == drum_channel:
            events.append(
                NoteEvent(source=Source.DRUM, onset_s=onset, velocity=velocity,
                          pitch=note.pitch)
            )
        else:
            duration = max(0.0, to_seconds(note.off_tick) - onset)
            events.append(
                NoteEvent(source=Source.MELODY, onset_s=onset, velocity=velocity,
                          duration_s=duration)
            )
    events.sort(key=lambda e: e.onset_s)
    return events


def write_midi_file(
    path: str | Path,
    events: Sequence[NoteEvent],
    tempo_bpm: float = 120.0,
    ticks_per_quarter: int = 480,
) -> None:
    """Write events as a format-0 file (drums on channel 10, melody on 1)."""
    if tempo_bpm <= 0:
        raise DataError(f"tempo must be positive, got {tempo_bpm}")
    tempo_us = round(60e6 / tempo_bpm)
    tick_per_s = ticks_per_quarter * 1e6 / tempo_us

    # (tick, order, status, pitch, velocity): offs sort before ons at a tick
    raw: list[tuple[int, int, int, int, int]] = []
    for ev in events:
        on_tick = round(ev.onset_s * tick_per_s)
        if ev.source is Source.DRUM:
            assert ev.pitch is not None
            raw.append((on_tick, 1, 0x90 | DRUM_CHANNEL, ev.pitch, ev.velocity))
            raw.append((on_tick + 1, 0, 0x80 | DRUM_CHANNEL, ev.pitch, 0))
        else:
            off_tick = max(on_tick + 1, round((ev.onset_s + ev.duration_s) * tick_per_s))
            raw.append((on_tick, 1, 0x90, _MELODY_WRITE_PITCH, ev.velocity))
            raw.append((off_tick, 0, 0x80, _MELODY_WRITE_PITCH, 0))
    raw.sort()

    body = bytearray()
    body += _write_varint(0) + bytes([0xFF, 0x51, 0x03]) + tempo_us.to_bytes(3, "big")
    last_tick = 0
    for tick, _, status, pitch, velocity in raw:
        body += _write_varint(tick - last_tick) + bytes([status, pitch, velocity])
        last_tick = tick
    body += _write_varint(0) + bytes([0xFF, 0x2F, 0x00])

    out = bytearray()
    out += b"MThd" + struct.pack(">LHHH", 6, 0, 1, ticks_per_quarter)
    out += b"MTrk" + struct.pack(">L", len(body)) + body
    Path(path).write_bytes(bytes(out))
