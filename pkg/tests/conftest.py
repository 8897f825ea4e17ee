from __future__ import annotations

import numpy as np
import pytest

from codrummer.biometric import QscLevel
from codrummer.corpus import (
    NoteEvent,
    SessionRecord,
    Source,
    build_vocabulary,
    quantize_events,
    write_corpus,
)

# One pass/fail line per acceptance criterion, shown after the test summary
# whether or not capture is on.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter) -> None:
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)


def make_demo_events(seed: int, n_measures: int = 12) -> list[NoteEvent]:
    """A deterministic duet: kick/snare/hats plus a sparse melody line."""
    rng = np.random.default_rng(seed)
    beat = 0.5  # 120 bpm
    events: list[NoteEvent] = []
    for m in range(n_measures):
        base = m * 4 * beat
        for b in range(4):
            t = base + b * beat
            pitch, vel = (36, 100) if b % 2 == 0 else (38, 90)
            events.append(NoteEvent(Source.DRUM, t, vel, pitch))
            for half in (0.0, 0.25):
                if rng.random() < 0.8:
                    events.append(NoteEvent(Source.DRUM, t + half, 60, 42))
        for b in (0.0, 1.5, 2.0, 3.0):
            if rng.random() < 0.7:
                vel = int(rng.integers(40, 110))
                events.append(
                    NoteEvent(Source.MELODY, base + b * beat, vel, duration_s=0.225)
                )
    return events


def make_demo_sessions(n_sessions: int = 3, n_measures: int = 12) -> list[SessionRecord]:
    sessions = []
    levels = [QscLevel.MED, QscLevel.HIGH, QscLevel.LOW]
    for s in range(n_sessions):
        measures = quantize_events(make_demo_events(100 + s, n_measures), 120.0)
        sessions.append(
            SessionRecord(
                session_id=f"session{s}",
                style="Swing",
                technique="lead",
                tempo_bpm=120.0,
                qsc_levels=tuple(levels[(s + m) % 3] for m in range(len(measures))),
                measures=tuple(measures),
            )
        )
    return sessions


@pytest.fixture(scope="session")
def demo_sessions() -> list[SessionRecord]:
    return make_demo_sessions()


@pytest.fixture(scope="session")
def demo_vocab(demo_sessions):
    return build_vocabulary((s.measures for s in demo_sessions), min_count=3)


@pytest.fixture(scope="session")
def demo_corpus_path(demo_sessions, tmp_path_factory):
    path = tmp_path_factory.mktemp("corpus") / "demo_corpus.txt"
    write_corpus(path, demo_sessions)
    return path


@pytest.fixture(scope="session")
def tiny_trained(demo_sessions, demo_vocab):
    """A small model trained a few epochs on the demo corpus."""
    from codrummer.corpus import window_dataset
    from codrummer.model import ModelConfig, train

    splits = window_dataset(demo_sessions, demo_vocab, seed=0, stride=4)
    config = ModelConfig(
        vocab_size=demo_vocab.size, embed_dim=8, hidden_units=16, seed=0
    )
    result = train(
        config,
        demo_vocab,
        splits.train,
        validation=splits.validation,
        batch_size=4,
        max_epochs=3,
    )
    return config, result, splits
