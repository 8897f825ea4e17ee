"""The measure-by-measure session engine.

One event loop over a Clock drives three event kinds in time order: note
emission, confidence frames, and the generation trigger fired one grid step
before each barline. Generation is timed against the real CPU clock even
when session time is simulated, because the deadline contract is about
compute, not about the simulation.

The log is line-delimited JSON and deterministic for a given seed and
model: runs can be compared byte for byte. Wall-time measurements stay out
of the log for that reason; they are returned in the summary instead.
"""

from __future__ import annotations

import heapq
import json
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..biometric import QscLevel
from ..corpus.events import band_velocity
from ..corpus.grid import GridCell, MeasureGrid, merge_grids, step_duration_s
from ..corpus.tokens import decode_measure, encode_measure
from ..corpus.vocab import Vocabulary
from ..errors import DataError, RuntimeAbort
from ..model.config import ModelConfig
from ..model.network import Params
from ..model.sampling import sample_measure
from ..model.training import Calibration
from ..netio.frames import BroadcastHub, ConfidenceFrame
from ..netio.midi import DRUM_CHANNEL, NOTE_ON, CollectorSink, MidiEvent, MidiSink
from ..netio.osc import QSC_TIMEOUT_S
from .clock import Clock, SimulatedClock
from .conditions import BioCondition, VisCondition, swap_level
from .confidence import ConfidenceTracker
from .scripted import ScriptedMelody, ScriptedQsc

FRAME_INTERVAL_S = 0.5
MAX_CONSECUTIVE_MISSES = 3

_NOTE, _FRAME, _TRIGGER = 0, 1, 2


@dataclass(frozen=True)
class SessionConfig:
    measures: int = 8
    tempo_bpm: float = 120.0
    vis: VisCondition = VisCondition.TRUTHFUL
    bio: BioCondition = BioCondition.TRUTHFUL
    seed: int = 0
    temperature: float = 1.0

    def __post_init__(self) -> None:
        if self.measures < 1:
            raise DataError(f"need at least 1 measure, got {self.measures}")
        if self.tempo_bpm <= 0:
            raise DataError(f"tempo must be positive, got {self.tempo_bpm}")


@dataclass
class SessionResult:
    log_lines: list[str]
    summary: dict
    machine_tokens: dict[int, list[str]] = field(default_factory=dict)

    def log_text(self) -> str:
        return "\n".join(self.log_lines) + "\n"


def _drums_only(grid: MeasureGrid) -> MeasureGrid:
    """What the room actually hears from the machine: drums, no melody."""
    return MeasureGrid(
        cells=tuple(GridCell(melody=None, drums=c.drums) for c in grid.cells)
    )


def _without_step(grid: MeasureGrid, step: int) -> MeasureGrid:
    cells = list(grid.cells)
    cells[step] = GridCell()
    return MeasureGrid(cells=tuple(cells))


def _merge_heard(melody: MeasureGrid | None, machine: MeasureGrid | None) -> MeasureGrid:
    if melody is None and machine is None:
        return MeasureGrid.empty()
    if melody is None:
        return machine
    if machine is None:
        return melody
    return merge_grids(melody, machine)


def run_session(
    config: SessionConfig,
    params: Params,
    model_config: ModelConfig,
    vocab: Vocabulary,
    calibration: Calibration,
    melody: Callable[[int], MeasureGrid] | None = None,
    qsc_transport=None,
    midi_sink: MidiSink | None = None,
    hub: BroadcastHub | None = None,
    clock: Clock | None = None,
    generation_delay_s: float = 0.0,
) -> SessionResult:
    """Play a session of `config.measures` human measures.

    The trigger for measure n fires at its 47th grid step and generates
    measure n+1 from the three measures heard so far (the not-yet-heard
    step 47 of the current measure reads as silent). A generation that
    overruns one grid step of real time is discarded: the previous machine
    measure is replayed and the miss logged; more than
    MAX_CONSECUTIVE_MISSES in a row aborts the session.
    """
    if model_config.context_steps != 144 or model_config.target_steps != 48:
        raise DataError("session engine needs full 3+1 measure geometry")
    clock = clock if clock is not None else SimulatedClock()
    midi_sink = midi_sink if midi_sink is not None else CollectorSink()
    melody_fn = melody if melody is not None else ScriptedMelody(config.seed).measure
    qsc_transport = qsc_transport if qsc_transport is not None else ScriptedQsc()

    step_s = step_duration_s(config.tempo_bpm)
    measure_s = step_s * 48
    beat_s = 60.0 / config.tempo_bpm
    session_end = (config.measures + 1) * measure_s
    deadline_s = step_s

    melody_grids: dict[int, MeasureGrid] = {
        n: melody_fn(n) for n in range(1, config.measures + 1)
    }
    machine_grids: dict[int, MeasureGrid] = {}
    machine_tokens: dict[int, list[str]] = {}
    tracker = ConfidenceTracker(calibration)

    log: list[str] = []

    def emit(record: dict) -> None:
        log.append(json.dumps(record, separators=(",", ":")))

    heap: list[tuple[float, int, int, object]] = []
    seq = 0

    def push(t: float, priority: int, payload: object) -> None:
        nonlocal seq
        heapq.heappush(heap, (t, priority, seq, payload))
        seq += 1

    for n in range(1, config.measures + 1):
        push((n - 1) * measure_s + 47 * step_s, _TRIGGER, n)
    t = 0.0
    while t < session_end - 1e-9:
        push(t, _FRAME, None)
        t += FRAME_INTERVAL_S

    emit({
        "type": "session_start",
        "measures": config.measures,
        "tempo_bpm": config.tempo_bpm,
        "vis": config.vis.value,
        "bio": config.bio.value,
        "seed": config.seed,
        "temperature": config.temperature,
        "vocab_hash": vocab.vocab_hash,
    })

    misses_total = 0
    consecutive_misses = 0
    frames_emitted = 0
    notes_emitted = 0
    max_generation_ms = 0.0
    generation_ms: list[float] = []

    def context_ids(n: int) -> list[int]:
        ids: list[int] = []
        for k in (n - 2, n - 1, n):
            if k < 1:
                grid = MeasureGrid.empty()
            else:
                grid = _merge_heard(melody_grids.get(k), machine_grids.get(k))
            if k == n:
                grid = _without_step(grid, 47)
            ids.extend(vocab.encode(encode_measure(grid)))
        return ids

    def schedule_measure(measure_index: int, grid: MeasureGrid) -> None:
        start = (measure_index - 1) * measure_s
        for s, cell in enumerate(grid.cells):
            for pitch, band in cell.drums:
                push(start + s * step_s, _NOTE, (pitch, band_velocity(band)))

    def handle_trigger(n: int) -> None:
        nonlocal misses_total, consecutive_misses, max_generation_ms, notes_emitted
        t_now = clock.now_s()
        real_start = time.perf_counter()
        qsc_raw = qsc_transport.query(QSC_TIMEOUT_S)
        qsc_effective = (
            swap_level(qsc_raw) if config.bio is BioCondition.DECEPTIVE else qsc_raw
        )
        ids = context_ids(n)
        rng = np.random.default_rng(np.random.SeedSequence((config.seed, n)))
        if generation_delay_s > 0.0:
            time.sleep(generation_delay_s)
        sampled_ids, probs = sample_measure(
            params, model_config, vocab, ids, qsc_effective,
            temperature=config.temperature, rng=rng,
        )
        elapsed_s = time.perf_counter() - real_start
        generation_ms.append(elapsed_s * 1000.0)
        max_generation_ms = max(max_generation_ms, elapsed_s * 1000.0)
        deadline_met = elapsed_s <= deadline_s

        emit({
            "type": "trigger",
            "measure": n,
            "t_ms": round(t_now * 1000.0),
            "qsc_raw": qsc_raw.wire_name,
            "qsc_effective": qsc_effective.wire_name,
            "deadline_met": deadline_met,
        })

        if deadline_met:
            consecutive_misses = 0
            tokens = vocab.decode(sampled_ids)
            grid = _drums_only(decode_measure(tokens))
            machine_grids[n + 1] = grid
            machine_tokens[n + 1] = tokens
            tracker.set_target(probs)
            emit({
                "type": "generated",
                "measure": n + 1,
                "tokens": tokens,
                "probs": [round(p, 9) for p in probs],
            })
        else:
            misses_total += 1
            consecutive_misses += 1
            emit({
                "type": "deadline_miss",
                "measure": n + 1,
                "consecutive": consecutive_misses,
            })
            if consecutive_misses > MAX_CONSECUTIVE_MISSES:
                emit({"type": "abort", "reason": "deadline",
                      "consecutive": consecutive_misses})
                raise RuntimeAbort(
                    f"aborted: {consecutive_misses} consecutive deadline misses "
                    f"at measure {n}"
                )
            previous = machine_grids.get(n, MeasureGrid.empty())
            machine_grids[n + 1] = previous
            machine_tokens[n + 1] = encode_measure(previous)
        schedule_measure(n + 1, machine_grids[n + 1])

    def handle_frame() -> None:
        nonlocal frames_emitted
        t_now = clock.now_s()
        c_raw = tracker.tick()
        c_display = 1.0 - c_raw if config.vis is VisCondition.DECEPTIVE else c_raw
        frame = ConfidenceFrame(
            t_ms=round(t_now * 1000.0),
            c_raw=c_raw,
            c_display=c_display,
            mode=config.vis.value,
            tempo_bpm=config.tempo_bpm,
            beat_phase=(t_now % beat_s) / beat_s,
        )
        if hub is not None:
            hub.publish(frame)
        emit({
            "type": "frame",
            "t_ms": frame.t_ms,
            "c_raw": round(c_raw, 9),
            "c": round(c_display, 9),
            "mode": frame.mode,
        })
        frames_emitted += 1

    def handle_note(payload: tuple[int, int]) -> None:
        nonlocal notes_emitted
        pitch, velocity = payload
        midi_sink.send(MidiEvent(
            t_ms=clock.now_s() * 1000.0,
            status=NOTE_ON,
            channel=DRUM_CHANNEL,
            pitch=pitch,
            velocity=velocity,
        ))
        notes_emitted += 1

    while heap:
        t_event, priority, _, payload = heapq.heappop(heap)
        clock.sleep_until(t_event)
        if priority == _NOTE:
            handle_note(payload)  # type: ignore[arg-type]
        elif priority == _FRAME:
            handle_frame()
        else:
            handle_trigger(payload)  # type: ignore[arg-type]

    emit({
        "type": "session_end",
        "measures_generated": len(machine_tokens),
        "deadline_misses": misses_total,
        "frames": frames_emitted,
    })

    summary = {
        "measures": config.measures,
        "measures_generated": len(machine_tokens),
        "deadline_misses": misses_total,
        "frames_emitted": frames_emitted,
        "notes_emitted": notes_emitted,
        "max_generation_ms": max_generation_ms,
        "mean_generation_ms": (
            sum(generation_ms) / len(generation_ms) if generation_ms else 0.0
        ),
        "session_seconds": session_end,
    }
    return SessionResult(log_lines=log, summary=summary,
                         machine_tokens=machine_tokens)
