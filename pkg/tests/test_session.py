from __future__ import annotations

import json
import time

import pytest

from codrummer.biometric import QscLevel
from codrummer.corpus.grid import GridCell, MeasureGrid
from codrummer.corpus.tokens import decode_measure, encode_measure
from codrummer.errors import DataError, RuntimeAbort
from codrummer.improviser.clock import SimulatedClock
from codrummer.improviser.conditions import BioCondition, VisCondition
from codrummer.improviser.scripted import ScriptedQsc
from codrummer.improviser.session import (
    FRAME_INTERVAL_S,
    SessionConfig,
    run_session,
)
from codrummer.model.config import tiny_config
from codrummer.netio.frames import BroadcastHub, frame_from_wire
from codrummer.netio.midi import DRUM_CHANNEL, NOTE_ON, CollectorSink

STEP_MS = 2000.0 / 48.0


def run(tiny_trained, demo_vocab, sink=None, hub=None, **config_kw):
    model_config, result, _ = tiny_trained
    config = SessionConfig(**{"measures": 4, "seed": 7, **config_kw})
    return run_session(
        config,
        result.params,
        model_config,
        demo_vocab,
        result.calibration,
        midi_sink=sink,
        hub=hub,
        clock=SimulatedClock(),
    )


def records(result, kind):
    return [json.loads(line) for line in result.log_lines
            if json.loads(line)["type"] == kind]


def test_log_is_byte_identical_across_runs(tiny_trained, demo_vocab):
    a = run(tiny_trained, demo_vocab)
    b = run(tiny_trained, demo_vocab)
    assert a.log_text() == b.log_text()
    assert a.machine_tokens == b.machine_tokens
    c = run(tiny_trained, demo_vocab, seed=8)
    assert c.log_text() != a.log_text()


def test_session_log_structure(tiny_trained, demo_vocab):
    result = run(tiny_trained, demo_vocab)
    start = records(result, "session_start")
    end = records(result, "session_end")
    assert len(start) == len(end) == 1
    assert start[0]["measures"] == 4
    assert start[0]["vocab_hash"] == demo_vocab.vocab_hash
    assert end[0]["deadline_misses"] == 0
    assert end[0]["measures_generated"] == 4


def test_triggers_fire_one_step_before_each_barline(tiny_trained, demo_vocab):
    result = run(tiny_trained, demo_vocab)
    triggers = records(result, "trigger")
    assert [t["measure"] for t in triggers] == [1, 2, 3, 4]
    for t in triggers:
        expected = (t["measure"] - 1) * 2000.0 + 47 * STEP_MS
        assert abs(t["t_ms"] - expected) <= 0.5  # record rounds to ms
        assert t["deadline_met"] is True


def test_frame_cadence_is_half_second(tiny_trained, demo_vocab):
    result = run(tiny_trained, demo_vocab)
    frames = records(result, "frame")
    # 4 human measures + the trailing machine measure = 10 s of session
    assert result.summary["session_seconds"] == pytest.approx(10.0)
    assert len(frames) == 20
    assert [f["t_ms"] for f in frames] == [round(i * FRAME_INTERVAL_S * 1000)
                                           for i in range(20)]


def test_machine_measures_are_heard_drums_only(tiny_trained, demo_vocab):
    sink = CollectorSink()
    result = run(tiny_trained, demo_vocab, sink=sink)
    assert set(result.machine_tokens) == {2, 3, 4, 5}

    expected_notes = 0
    for tokens in result.machine_tokens.values():
        grid = decode_measure(tokens)
        expected_notes += sum(len(cell.drums) for cell in grid.cells)
    assert result.summary["notes_emitted"] == expected_notes == len(sink.events)

    for event in sink.events:
        assert event.status == NOTE_ON
        assert event.channel == DRUM_CHANNEL
        # every note lands exactly on a grid step of measures 2..5
        offset = event.t_ms - 2000.0
        step = round(offset / STEP_MS)
        assert abs(offset - step * STEP_MS) < 1e-6


def test_notes_never_include_melody(tiny_trained, demo_vocab):
    # the model vocabulary contains melody tokens, so generated measures may
    # carry them; the audible projection must keep only drum strikes
    sink = CollectorSink()
    result = run(tiny_trained, demo_vocab, sink=sink, measures=6)
    assert result.summary["measures_generated"] == 6
    drum_pitches = {36, 38, 42, 44, 46}
    assert sink.events
    assert all(event.pitch in drum_pitches for event in sink.events)


def test_deceptive_display_complements_every_frame(tiny_trained, demo_vocab):
    truthful = run(tiny_trained, demo_vocab, vis=VisCondition.TRUTHFUL)
    deceptive = run(tiny_trained, demo_vocab, vis=VisCondition.DECEPTIVE)
    frames_t = records(truthful, "frame")
    frames_d = records(deceptive, "frame")
    assert len(frames_t) == len(frames_d)
    for ft, fd in zip(frames_t, frames_d):
        assert ft["c_raw"] == fd["c_raw"]  # conditions never touch the raw value
        assert ft["c"] == ft["c_raw"]
        assert fd["c"] == pytest.approx(1.0 - fd["c_raw"], abs=1e-9)
        assert fd["mode"] == "deceptive"


def test_absent_mode_keeps_raw_value_on_wire(tiny_trained, demo_vocab):
    result = run(tiny_trained, demo_vocab, vis=VisCondition.ABSENT)
    for frame in records(result, "frame"):
        assert frame["mode"] == "absent"
        assert frame["c"] == frame["c_raw"]


def test_deceptive_bio_swaps_sensor_levels(tiny_trained, demo_vocab):
    qsc = ScriptedQsc([QscLevel.HIGH, QscLevel.LOW, QscLevel.MED, QscLevel.HIGH])
    model_config, result, _ = tiny_trained
    config = SessionConfig(measures=4, seed=7, bio=BioCondition.DECEPTIVE)
    session = run_session(config, result.params, model_config, demo_vocab,
                          result.calibration, qsc_transport=qsc,
                          clock=SimulatedClock())
    triggers = records(session, "trigger")
    assert [t["qsc_raw"] for t in triggers] == ["High", "Low", "Med", "High"]
    assert [t["qsc_effective"] for t in triggers] == ["Low", "High", "Med", "Low"]


def test_hub_receives_wire_frames(tiny_trained, demo_vocab):
    hub = BroadcastHub()
    client = hub.register()
    result = run(tiny_trained, demo_vocab, hub=hub)
    payloads = hub.drain(client)
    # 20 frames were published; the bounded buffer keeps the newest 16
    assert hub.published == result.summary["frames_emitted"] == 20
    assert len(payloads) == 16
    parsed = [frame_from_wire(p) for p in payloads]
    assert parsed[-1]["t_ms"] == 9500
    log_frames = {f["t_ms"]: f for f in records(result, "frame")}
    for frame in parsed:
        assert frame["c"] == pytest.approx(log_frames[frame["t_ms"]]["c"], abs=1e-9)


def test_transient_deadline_miss_replays_previous_measure(tiny_trained, demo_vocab):
    class SlowSecondQuery:
        def __init__(self):
            self.calls = 0

        def query(self, timeout_s):
            self.calls += 1
            if self.calls == 2:
                time.sleep(0.06)  # blows the ~41.7 ms deadline once
            return QscLevel.MED

    model_config, result, _ = tiny_trained
    config = SessionConfig(measures=4, seed=7)
    session = run_session(config, result.params, model_config, demo_vocab,
                          result.calibration, qsc_transport=SlowSecondQuery(),
                          clock=SimulatedClock())
    misses = records(session, "deadline_miss")
    assert [m["consecutive"] for m in misses] == [1]
    assert misses[0]["measure"] == 3
    assert session.summary["deadline_misses"] == 1
    # measure 3 replays the machine's measure 2 exactly as it was heard
    heard_2 = MeasureGrid(cells=tuple(
        GridCell(melody=None, drums=c.drums)
        for c in decode_measure(session.machine_tokens[2]).cells))
    assert session.machine_tokens[3] == encode_measure(heard_2)
    # later triggers met their deadline again
    assert records(session, "trigger")[-1]["deadline_met"] is True


def test_four_consecutive_misses_abort(tiny_trained, demo_vocab):
    model_config, result, _ = tiny_trained
    config = SessionConfig(measures=8, seed=7)
    with pytest.raises(RuntimeAbort, match="consecutive deadline misses"):
        run_session(config, result.params, model_config, demo_vocab,
                    result.calibration, clock=SimulatedClock(),
                    generation_delay_s=0.06)


def test_config_and_geometry_validation(tiny_trained, demo_vocab):
    with pytest.raises(DataError):
        SessionConfig(measures=0)
    with pytest.raises(DataError):
        SessionConfig(tempo_bpm=0.0)
    model_config, result, _ = tiny_trained
    with pytest.raises(DataError, match="geometry"):
        run_session(SessionConfig(), result.params,
                    tiny_config(vocab_size=demo_vocab.size), demo_vocab,
                    result.calibration)
