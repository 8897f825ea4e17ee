"""Confidence frames and their fan-out to visualizer clients.

Wire format is one JSON text frame per update with fixed field order:

    {"t_ms":int, "c":float, "mode":"truthful"|"deceptive"|"absent",
     "tempo":float, "beat_phase":float}

`c` is the display value after condition mapping; the raw value never
leaves the engine except in the session log.
"""

from __future__ import annotations

import json
import threading
from collections import deque
from dataclasses import dataclass
from typing import Deque

from ..errors import DataError

WIRE_MODES = ("truthful", "deceptive", "absent")
CLIENT_BUFFER_FRAMES = 16


@dataclass(frozen=True)
class ConfidenceFrame:
    t_ms: int
    c_raw: float
    c_display: float
    mode: str
    tempo_bpm: float
    beat_phase: float

    def __post_init__(self) -> None:
        if self.t_ms < 0:
            raise DataError(f"t_ms={self.t_ms} is negative")
        if self.mode not in WIRE_MODES:
            raise DataError(f"unknown mode {self.mode!r}")
        for name in ("c_raw", "c_display"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise DataError(f"{name}={v} outside [0,1]")
        if not 0.0 <= self.beat_phase < 1.0:
            raise DataError(f"beat_phase={self.beat_phase} outside [0,1)")

    def wire_json(self) -> str:
        return json.dumps(
            {
                "t_ms": self.t_ms,
                "c": self.c_display,
                "mode": self.mode,
                "tempo": self.tempo_bpm,
                "beat_phase": self.beat_phase,
            },
            separators=(",", ":"),
        )


def frame_from_wire(text: str) -> dict:
    """Parse and validate one wire frame (client-side view of the schema)."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DataError(f"bad frame JSON: {exc}") from None
    if not isinstance(data, dict):
        raise DataError("frame must be a JSON object")
    for key, kinds in (
        ("t_ms", (int,)),
        ("c", (int, float)),
        ("mode", (str,)),
        ("tempo", (int, float)),
        ("beat_phase", (int, float)),
    ):
        if key not in data:
            raise DataError(f"frame missing {key!r}")
        if not isinstance(data[key], kinds) or isinstance(data[key], bool):
            raise DataError(f"frame field {key!r} has wrong type")
    if data["mode"] not in WIRE_MODES:
        raise DataError(f"unknown mode {data['mode']!r}")
    if not 0.0 <= data["c"] <= 1.0:
        raise DataError(f"frame c={data['c']} outside [0,1]")
    if not 0.0 <= data["beat_phase"] < 1.0:
        raise DataError(f"frame beat_phase={data['beat_phase']} outside [0,1)")
    return data


class BroadcastHub:
    """Per-client bounded buffers; slow consumers lose old frames, never
    stall the publisher."""

    def __init__(self, buffer_frames: int = CLIENT_BUFFER_FRAMES) -> None:
        self._buffer_frames = buffer_frames
        self._clients: dict[int, Deque[str]] = {}
        self._next_id = 0
        self._lock = threading.Lock()
        self.published = 0

    def register(self) -> int:
        with self._lock:
            client_id = self._next_id
            self._next_id += 1
            self._clients[client_id] = deque(maxlen=self._buffer_frames)
            return client_id

    def unregister(self, client_id: int) -> None:
        with self._lock:
            self._clients.pop(client_id, None)

    def publish(self, frame: ConfidenceFrame) -> None:
        payload = frame.wire_json()
        with self._lock:
            self.published += 1
            for buf in self._clients.values():
                buf.append(payload)

    def drain(self, client_id: int) -> list[str]:
        with self._lock:
            buf = self._clients.get(client_id)
            if buf is None:
                return []
            out = list(buf)
            buf.clear()
            return out

    @property
    def client_count(self) -> int:
        with self._lock:
            return len(self._clients)
