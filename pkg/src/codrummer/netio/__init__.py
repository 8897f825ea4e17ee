"""Transports: OSC over UDP, MIDI sinks, and the visualizer frame hub."""

from .frames import ConfidenceFrame, BroadcastHub, frame_from_wire
from .midi import MidiEvent, MidiSink, CollectorSink, NullSink
from .osc import (
    OscError,
    OscMessage,
    osc_encode,
    osc_decode,
    QscResponder,
    LoopbackQscTransport,
    UdpQscServer,
    UdpQscTransport,
    FixedQscTransport,
    QSC_QUERY_ADDRESS,
    QSC_VALUE_ADDRESS,
    QSC_TIMEOUT_S,
)

__all__ = [
    "ConfidenceFrame",
    "BroadcastHub",
    "frame_from_wire",
    "MidiEvent",
    "MidiSink",
    "CollectorSink",
    "NullSink",
    "OscError",
    "OscMessage",
    "osc_encode",
    "osc_decode",
    "QscResponder",
    "LoopbackQscTransport",
    "UdpQscServer",
    "UdpQscTransport",
    "FixedQscTransport",
    "QSC_QUERY_ADDRESS",
    "QSC_VALUE_ADDRESS",
    "QSC_TIMEOUT_S",
]
