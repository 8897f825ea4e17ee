"""Open Sound Control 1.0 codec plus the skin-conductance query exchange.

Wire grammar: padded address string, ","-prefixed padded type-tag string,
then the arguments. Supported tags: i (int32), f (float32), s (string).
Everything is big-endian and 4-byte aligned.

The biometric exchange is one request/response pair:
    /sc/query  (i: request id)
    /sc/value  (i: request id, s: "High"|"Med"|"Low")
A reply that does not arrive within QSC_TIMEOUT_S degrades to Med so the
clock never waits on the sensor.
"""

from __future__ import annotations

import socket
import struct
import threading
import time
from dataclasses import dataclass
from typing import Callable

from ..biometric import QscLevel
from ..errors import DataError

QSC_QUERY_ADDRESS = "/sc/query"
QSC_VALUE_ADDRESS = "/sc/value"
QSC_TIMEOUT_S = 0.020

OscArg = int | float | str


class OscError(DataError):
    """Malformed OSC packet or unsupported content."""


@dataclass(frozen=True)
class OscMessage:
    address: str
    args: tuple[OscArg, ...] = ()

    def __post_init__(self) -> None:
        if not self.address.startswith("/"):
            raise OscError(f"OSC address must start with '/': {self.address!r}")


def _pad_string(text: str) -> bytes:
    raw = text.encode("utf-8") + b"\x00"
    return raw + b"\x00" * (-len(raw) % 4)


def _read_string(data: bytes, pos: int) -> tuple[str, int]:
    end = data.find(b"\x00", pos)
    if end < 0:
        raise OscError("unterminated string")
    text = data[pos:end].decode("utf-8")
    next_pos = end + 1
    next_pos += -(next_pos - pos) % 4
    if data[end + 1:next_pos].strip(b"\x00"):
        raise OscError("nonzero string padding")
    return text, next_pos


def osc_encode(msg: OscMessage) -> bytes:
    tags = ","
    body = b""
    for arg in msg.args:
        if isinstance(arg, bool):
            raise OscError("booleans are not supported")
        if isinstance(arg, int):
            if not -(2**31) <= arg < 2**31:
                raise OscError(f"int32 out of range: {arg}")
            tags += "i"
            body += struct.pack(">i", arg)
        elif isinstance(arg, float):
            tags += "f"
            body += struct.pack(">f", arg)
        elif isinstance(arg, str):
            tags += "s"
            body += _pad_string(arg)
        else:
            raise OscError(f"unsupported argument type {type(arg).__name__}")
    return _pad_string(msg.address) + _pad_string(tags) + body


def osc_decode(data: bytes) -> OscMessage:
    if len(data) % 4:
        raise OscError(f"packet length {len(data)} not 4-byte aligned")
    address, pos = _read_string(data, 0)
    if not address.startswith("/"):
        raise OscError(f"bad address {address!r}")
    tags, pos = _read_string(data, pos)
    if not tags.startswith(","):
        raise OscError(f"type tag string must start with ',': {tags!r}")
    args: list[OscArg] = []
    for tag in tags[1:]:
        if tag == "i":
            if pos + 4 > len(data):
                raise OscError("truncated int32")
            args.append(struct.unpack(">i", data[pos:pos + 4])[0])
            pos += 4
        elif tag == "f":
            if pos + 4 > len(data):
                raise OscError("truncated float32")
            args.append(struct.unpack(">f", data[pos:pos + 4])[0])
            pos += 4
        elif tag == "s":
            text, pos = _read_string(data, pos)
            args.append(text)
        else:
            raise OscError(f"unsupported type tag {tag!r}")
    if pos != len(data):
        raise OscError(f"{len(data) - pos} trailing bytes after arguments")
    return OscMessage(address=address, args=tuple(args))


class QscResponder:
    """Sensor-side handler: answers level queries from a callable."""

    def __init__(self, level_source: Callable[[], QscLevel]) -> None:
        self._level_source = level_source

    def handle(self, packet: bytes) -> bytes | None:
        try:
            msg = osc_decode(packet)
        except OscError:
            return None
        if msg.address != QSC_QUERY_ADDRESS or len(msg.args) != 1:
            return None
        if not isinstance(msg.args[0], int):
            return None
        level = self._level_source()
        reply = OscMessage(QSC_VALUE_ADDRESS, (msg.args[0], level.wire_name))
        return osc_encode(reply)


def _parse_value_reply(packet: bytes, request_id: int) -> QscLevel | None:
    try:
        msg = osc_decode(packet)
    except OscError:
        return None
    if msg.address != QSC_VALUE_ADDRESS or len(msg.args) != 2:
        return None
    reply_id, name = msg.args
    if reply_id != request_id or not isinstance(name, str):
        return None
    try:
        return QscLevel.from_name(name)
    except DataError:
        return None


class LoopbackQscTransport:
    """In-process exchange that still runs the full codec both ways."""

    def __init__(self, responder: QscResponder) -> None:
        self._responder = responder
        self._next_id = 0

    def query(self, timeout_s: float = QSC_TIMEOUT_S) -> QscLevel:
        self._next_id += 1
        request = osc_encode(OscMessage(QSC_QUERY_ADDRESS, (self._next_id,)))
        reply = self._responder.handle(request)
        if reply is None:
            return QscLevel.MED
        level = _parse_value_reply(reply, self._next_id)
        return QscLevel.MED if level is None else level

    def close(self) -> None:
        pass


class FixedQscTransport:
    """Constant level; the no-sensor fallback."""

    def __init__(self, level: QscLevel = QscLevel.MED) -> None:
        self.level = level

    def query(self, timeout_s: float = QSC_TIMEOUT_S) -> QscLevel:
        return self.level

    def close(self) -> None:
        pass


class UdpQscServer:
    """Answers /sc/query datagrams on a background thread."""

    def __init__(self, responder: QscResponder, host: str = "127.0.0.1",
                 port: int = 0) -> None:
        self._responder = responder
        self._sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
        self._sock.bind((host, port))
        self._sock.settimeout(0.1)
        self.address = self._sock.getsockname()
        self._stop = threading.Event()
        self._thread = threading.Thread(target=self._serve, daemon=True)
        self._thread.start()

    def _serve(self) -> None:
        while not self._stop.is_set():
            try:
                packet, peer = self._sock.recvfrom(4096)
            except socket.timeout:
                continue
            except OSError:
                break
            reply = self._responder.handle(packet)
            if reply is not None:
                try:
                    self._sock.sendto(reply, peer)
                except OSError:
                    pass

    def close(self) -> None:
        self._stop.set()
        self._thread.join(timeout=1.0)
        self._sock.close()


class UdpQscTransport:
    """Engine-side UDP client with the Med timeout fallback."""

    def __init__(self, host: str, port: int) -> None:
        self._peer = (host, port)
        self._sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
        self._next_id = 0

    def query(self, timeout_s: float = QSC_TIMEOUT_S) -> QscLevel:
        self._next_id += 1
        request = osc_encode(OscMessage(QSC_QUERY_ADDRESS, (self._next_id,)))
        deadline = time.perf_counter() + timeout_s
        try:
            self._sock.sendto(request, self._peer)
            while True:
                remaining = deadline - time.perf_counter()
                if remaining <= 0:
                    return QscLevel.MED
                self._sock.settimeout(remaining)
                packet, _ = self._sock.recvfrom(4096)
                level = _parse_value_reply(packet, self._next_id)
                if level is not None:
                    return level
        except (socket.timeout, OSError):
            return QscLevel.MED

    def close(self) -> None:
        self._sock.close()
