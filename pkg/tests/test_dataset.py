from __future__ import annotations

import pytest

from codrummer.corpus.dataset import (
    CONTEXT_MEASURES,
    WINDOW_MEASURES,
    Split,
    session_windows,
    window_dataset,
)
from codrummer.errors import DataError

from conftest import make_demo_sessions


def test_window_geometry(demo_sessions, demo_vocab):
    windows = session_windows(demo_sessions[0], demo_vocab, stride=4)
    # 12 measures, window of 4, stride 4 -> starts 0, 4, 8.
    assert [w.start_measure for w in windows] == [0, 4, 8]
    for w in windows:
        assert len(w.context_ids) == CONTEXT_MEASURES * 48
        assert len(w.target_ids) == 48
        assert w.session_id == "session0"


def test_window_qsc_is_the_target_measures_level(demo_sessions, demo_vocab):
    session = demo_sessions[0]
    windows = session_windows(session, demo_vocab, stride=1)
    for w in windows:
        assert w.qsc == session.qsc_levels[w.start_measure + CONTEXT_MEASURES]


def test_window_content_matches_measures(demo_sessions, demo_vocab):
    from codrummer.corpus.tokens import encode_measure

    session = demo_sessions[0]
    w = session_windows(session, demo_vocab, stride=4)[1]  # starts at measure 4
    expected_context = []
    for m in range(4, 4 + CONTEXT_MEASURES):
        expected_context.extend(demo_vocab.encode(encode_measure(session.measures[m])))
    assert list(w.context_ids) == expected_context
    assert list(w.target_ids) == demo_vocab.encode(
        encode_measure(session.measures[4 + CONTEXT_MEASURES])
    )


def test_short_sessions_are_skipped_with_warning(demo_vocab):
    short = make_demo_sessions(1, WINDOW_MEASURES - 1)[0]
    with pytest.warns(UserWarning, match="session0"):
        assert session_windows(short, demo_vocab) == []


def test_split_fractions_partition_and_are_deterministic(demo_sessions, demo_vocab):
    splits = window_dataset(demo_sessions, demo_vocab, seed=11, stride=1)
    n = splits.total
    assert n == 3 * 9  # 12 measures, stride 1 -> 9 windows per session
    assert len(splits.train.windows) == round(n * 0.76)
    assert len(splits.validation.windows) == round(n * 0.12)
    assert (
        len(splits.train.windows)
        + len(splits.validation.windows)
        + len(splits.test.windows)
        == n
    )
    again = window_dataset(demo_sessions, demo_vocab, seed=11, stride=1)
    assert [w.start_measure for w in again.train.windows] == [
        w.start_measure for w in splits.train.windows
    ]
    assert [w.session_id for w in again.train.windows] == [
        w.session_id for w in splits.train.windows
    ]
    different = window_dataset(demo_sessions, demo_vocab, seed=12, stride=1)
    assert [
        (w.session_id, w.start_measure) for w in different.train.windows
    ] != [(w.session_id, w.start_measure) for w in splits.train.windows]


def test_split_labels(demo_sessions, demo_vocab):
    splits = window_dataset(demo_sessions, demo_vocab, seed=0)
    assert splits.train.split is Split.TRAIN
    assert splits.validation.split is Split.VALIDATION
    assert splits.test.split is Split.TEST


def test_bad_fractions_raise(demo_sessions, demo_vocab):
    with pytest.raises(DataError):
        window_dataset(demo_sessions, demo_vocab, fractions=(0.9, 0.2, 0.2))
