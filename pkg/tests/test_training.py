from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import pytest

from codrummer.biometric import QscLevel
from codrummer.corpus.dataset import Split, WindowedDataset
from codrummer.corpus.vocab import vocabulary_from_counts
from codrummer.errors import DataError, RuntimeAbort
from codrummer.model.config import tiny_config
from codrummer.model.network import assemble_input_ids, forward, init_parameters
from codrummer.model.training import (
    Calibration,
    calibrate,
    perplexity,
    train,
)

DRUM_TOKENS = ("36p", "36mp", "36mf", "36f", "38mp", "38mf")


def tiny_vocab():
    """Silent + six drum tokens + five specials = 12 ids, matching tiny_config."""
    counts = {text: 100 - i for i, text in enumerate(DRUM_TOKENS)}
    vocab = vocabulary_from_counts(counts, min_count=1)
    assert vocab.size == 12
    return vocab


@dataclass(frozen=True)
class StubWindow:
    """Window stand-in without the production-geometry length checks, so the
    training mechanics can be exercised at tiny_config sizes."""

    session_id: str
    start_measure: int
    context_ids: tuple[int, ...]
    target_ids: tuple[int, ...]
    qsc: QscLevel


def make_windows(vocab, config, n, seed=0, qsc=QscLevel.MED):
    rng = np.random.default_rng(seed)
    windows = []
    for i in range(n):
        context = tuple(int(x) for x in
                        rng.integers(0, vocab.musical_size, size=config.context_steps))
        target = tuple(int(x) for x in
                       rng.integers(0, vocab.musical_size, size=config.target_steps))
        windows.append(StubWindow(session_id=f"s{i}", start_measure=i,
                                  context_ids=context, target_ids=target, qsc=qsc))
    return windows


def dataset(windows, split=Split.TRAIN):
    return WindowedDataset(windows=tuple(windows), split=split)


def test_single_window_is_memorized():
    vocab = tiny_vocab()
    config = tiny_config(vocab_size=vocab.size)
    window = make_windows(vocab, config, 1, seed=1)[0]
    result = train(config, vocab, dataset([window]), batch_size=1,
                   max_epochs=300, patience=None)
    best = min(r.perplexity for r in result.reports)
    assert best <= 1.2
    report = perplexity(result.params, config, vocab, dataset([window]))
    assert report.perplexity <= 1.2


def test_perplexity_matches_hand_computation():
    vocab = tiny_vocab()
    config = tiny_config(vocab_size=vocab.size)
    params = init_parameters(config)
    windows = make_windows(vocab, config, 5, seed=2)

    total = 0.0
    count = 0
    for w in windows:
        ids = assemble_input_ids(vocab.qsc_id(w.qsc), w.context_ids,
                                 vocab.mask_id, config.target_steps)
        probs = forward(params, config, ids)
        for j, target in enumerate(w.target_ids):
            total += -math.log(probs[j, target])
            count += 1
    expected = math.exp(total / count)

    report = perplexity(params, config, vocab, dataset(windows, Split.TEST))
    assert report.perplexity == pytest.approx(expected, rel=1e-12)
    assert report.token_count == count


def test_perplexity_empty_split_raises():
    vocab = tiny_vocab()
    config = tiny_config(vocab_size=vocab.size)
    params = init_parameters(config)
    with pytest.raises(DataError, match="empty"):
        perplexity(params, config, vocab, dataset([], Split.VALIDATION))


def test_start_token_carries_qsc_only_when_enabled():
    vocab = tiny_vocab()
    config = tiny_config(vocab_size=vocab.size)
    params = init_parameters(config)
    w_high = make_windows(vocab, config, 1, seed=3, qsc=QscLevel.HIGH)
    w_low = [StubWindow(session_id="s0", start_measure=0,
                        context_ids=w_high[0].context_ids,
                        target_ids=w_high[0].target_ids, qsc=QscLevel.LOW)]
    with_qsc_high = perplexity(params, config, vocab, dataset(w_high)).perplexity
    with_qsc_low = perplexity(params, config, vocab, dataset(w_low)).perplexity
    assert with_qsc_high != with_qsc_low
    no_qsc_high = perplexity(params, config, vocab, dataset(w_high),
                             use_qsc=False).perplexity
    no_qsc_low = perplexity(params, config, vocab, dataset(w_low),
                            use_qsc=False).perplexity
    assert no_qsc_high == no_qsc_low


def test_calibration_percentiles_and_bounds():
    vocab = tiny_vocab()
    config = tiny_config(vocab_size=vocab.size)
    params = init_parameters(config)
    windows = make_windows(vocab, config, 40, seed=4)
    cal = calibrate(params, config, vocab, dataset(windows, Split.VALIDATION))

    geo_means = []
    for w in windows:
        ids = assemble_input_ids(vocab.qsc_id(w.qsc), w.context_ids,
                                 vocab.mask_id, config.target_steps)
        probs = forward(params, config, ids)
        log_p = [math.log(probs[j, t]) for j, t in enumerate(w.target_ids)]
        geo_means.append(math.exp(sum(log_p) / len(log_p)))
    assert cal.g_lo == pytest.approx(float(np.percentile(geo_means, 5)), rel=1e-12)
    assert cal.g_hi == pytest.approx(float(np.percentile(geo_means, 95)), rel=1e-12)
    assert 0.0 < cal.g_lo < cal.g_hi <= 1.0


def test_calibration_fallback_cases():
    vocab = tiny_vocab()
    config = tiny_config(vocab_size=vocab.size)
    params = init_parameters(config)
    fallback = Calibration(g_lo=1.0 / vocab.size, g_hi=1.0)

    assert calibrate(params, config, vocab, None) == fallback
    assert calibrate(params, config, vocab,
                     dataset([], Split.VALIDATION)) == fallback
    # a single window collapses both percentiles to the same value
    one = make_windows(vocab, config, 1, seed=5)
    assert calibrate(params, config, vocab, dataset(one, Split.VALIDATION)) == fallback


def test_calibration_validates_order():
    with pytest.raises(DataError):
        Calibration(g_lo=0.5, g_hi=0.5)
    with pytest.raises(DataError):
        Calibration(g_lo=-0.1, g_hi=0.5)


def test_early_stopping_and_best_epoch():
    vocab = tiny_vocab()
    config = tiny_config(vocab_size=vocab.size)
    windows = make_windows(vocab, config, 6, seed=6)
    val = make_windows(vocab, config, 4, seed=7)
    result = train(config, vocab, dataset(windows),
                   validation=dataset(val, Split.VALIDATION),
                   batch_size=3, max_epochs=60, patience=3)
    ppls = [r.perplexity for r in result.reports]
    assert [r.epoch for r in result.reports] == list(range(1, len(ppls) + 1))
    assert result.best_epoch == ppls.index(min(ppls)) + 1
    if len(ppls) < 60:  # stopped early: best followed by `patience` stale epochs
        assert len(ppls) - result.best_epoch >= 3
    recheck = perplexity(result.params, config, vocab,
                         dataset(val, Split.VALIDATION))
    assert recheck.perplexity == pytest.approx(min(ppls), rel=1e-5)


def test_training_is_deterministic():
    vocab = tiny_vocab()
    config = tiny_config(vocab_size=vocab.size)
    windows = make_windows(vocab, config, 5, seed=8)
    a = train(config, vocab, dataset(windows), batch_size=2, max_epochs=4,
              patience=None)
    b = train(config, vocab, dataset(windows), batch_size=2, max_epochs=4,
              patience=None)
    assert [r.perplexity for r in a.reports] == [r.perplexity for r in b.reports]
    for name in a.params:
        assert np.array_equal(a.params[name], b.params[name]), name


def test_progress_callback_sees_every_epoch():
    vocab = tiny_vocab()
    config = tiny_config(vocab_size=vocab.size)
    windows = make_windows(vocab, config, 3, seed=9)
    seen = []
    train(config, vocab, dataset(windows), batch_size=2, max_epochs=3,
          patience=None, progress=seen.append)
    assert [r.epoch for r in seen] == [1, 2, 3]


def test_train_input_validation():
    vocab = tiny_vocab()
    config = tiny_config(vocab_size=vocab.size)
    with pytest.raises(DataError, match="empty"):
        train(config, vocab, dataset([]))
    wrong = tiny_config(vocab_size=13)
    with pytest.raises(DataError, match="vocab"):
        train(wrong, vocab, dataset(make_windows(vocab, config, 1)))


def test_divergence_aborts(monkeypatch):
    vocab = tiny_vocab()
    config = tiny_config(vocab_size=vocab.size)
    windows = make_windows(vocab, config, 2, seed=10)

    import codrummer.model.training as training_module

    real = training_module.loss_and_grad

    def poisoned(result, targets, silent_token_id, silent_loss_weight=0.1):
        _, d_logits = real(result, targets, silent_token_id, silent_loss_weight)
        return float("nan"), d_logits

    monkeypatch.setattr(training_module, "loss_and_grad", poisoned)
    with pytest.raises(RuntimeAbort, match="diverged"):
        train(config, vocab, dataset(windows), max_epochs=2)
