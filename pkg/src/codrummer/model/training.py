"""Training loop, perplexity evaluation, and confidence calibration."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from ..corpus.dataset import Window, WindowedDataset
from ..corpus.vocab import Vocabulary
from ..errors import DataError, RuntimeAbort
from .config import ModelConfig
from .network import (
    Params,
    assemble_input_ids,
    backward,
    forward_batch,
    init_parameters,
    loss_and_grad,
)

ADAM_LR = 1e-3
ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8
GRAD_CLIP_NORM = 5.0
DEFAULT_BATCH_SIZE = 16
DEFAULT_MAX_EPOCHS = 69
DEFAULT_PATIENCE = 10


@dataclass(frozen=True)
class EvalReport:
    perplexity: float
    token_count: int
    epoch: int


@dataclass(frozen=True)
class Calibration:
    """Confidence normalization range: 5th/95th percentile of per-window
    geometric-mean target probability on the validation set."""

    g_lo: float
    g_hi: float

    def __post_init__(self) -> None:
        if not (0.0 < self.g_lo < self.g_hi <= 1.0):
            raise DataError(f"bad calibration range ({self.g_lo}, {self.g_hi})")


@dataclass
class TrainResult:
    params: Params
    reports: list[EvalReport]
    calibration: Calibration
    best_epoch: int


def _window_start_id(window: Window, vocab: Vocabulary, use_qsc: bool) -> int:
    return vocab.qsc_id(window.qsc) if use_qsc else vocab.start_id


def _batch_arrays(
    windows: Sequence[Window],
    vocab: Vocabulary,
    config: ModelConfig,
    use_qsc: bool,
) -> tuple[np.ndarray, np.ndarray]:
    inputs = np.stack([
        assemble_input_ids(
            _window_start_id(w, vocab, use_qsc),
            w.context_ids,
            vocab.mask_id,
            config.target_steps,
        )
        for w in windows
    ])
    targets = np.array([w.target_ids for w in windows], dtype=np.int64)
    return inputs, targets


class _Adam:
    def __init__(self, params: Params, lr: float = ADAM_LR) -> None:
        self.lr = lr
        self.t = 0
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}

    def step(self, params: Params, grads: Params) -> None:
        self.t += 1
        bc1 = 1.0 - ADAM_BETA1 ** self.t
        bc2 = 1.0 - ADAM_BETA2 ** self.t
        for k, g in grads.items():
            self.m[k] = ADAM_BETA1 * self.m[k] + (1.0 - ADAM_BETA1) * g
            self.v[k] = ADAM_BETA2 * self.v[k] + (1.0 - ADAM_BETA2) * g * g
            m_hat = self.m[k] / bc1
            v_hat = self.v[k] / bc2
            params[k] = params[k] - self.lr * m_hat / (np.sqrt(v_hat) + ADAM_EPS)


def _clip_gradients(grads: Params, max_norm: float = GRAD_CLIP_NORM) -> None:
    total = math.sqrt(sum(float(np.sum(g * g)) for g in grads.values()))
    if total > max_norm and total > 0.0:
        scale = max_norm / total
        for k in grads:
            grads[k] = grads[k] * scale


def _nll_sum(
    params: Params,
    config: ModelConfig,
    vocab: Vocabulary,
    windows: Sequence[Window],
    use_qsc: bool,
    chunk: int = 64,
) -> tuple[float, int, list[float]]:
    """Total negative log-likelihood over all target positions, plus the
    per-window geometric means used for calibration."""
    total = 0.0
    count = 0
    geo_means: list[float] = []
    for start in range(0, len(windows), chunk):
        part = windows[start:start + chunk]
        inputs, targets = _batch_arrays(part, vocab, config, use_qsc)
        probs = forward_batch(params, config, inputs, train=False).probs
        b_idx, t_idx = np.indices(targets.shape)
        chosen = np.maximum(probs[b_idx, t_idx, targets], 1e-300)
        log_p = np.log(chosen)
        total += float(-log_p.sum())
        count += int(targets.size)
        geo_means.extend(np.exp(log_p.mean(axis=1)).tolist())
    return total, count, geo_means


def perplexity(
    params: Params,
    config: ModelConfig,
    vocab: Vocabulary,
    dataset: WindowedDataset,
    use_qsc: bool = True,
    epoch: int = 0,
) -> EvalReport:
    """exp of the unweighted mean NLL over every target position."""
    if not dataset.windows:
        raise DataError(f"{dataset.split.value} split is empty")
    total, count, _ = _nll_sum(params, config, vocab, dataset.windows, use_qsc)
    return EvalReport(perplexity=math.exp(total / count), token_count=count,
                      epoch=epoch)


def calibrate(
    params: Params,
    config: ModelConfig,
    vocab: Vocabulary,
    validation: WindowedDataset | None,
    use_qsc: bool = True,
) -> Calibration:
    fallback = Calibration(g_lo=1.0 / config.vocab_size, g_hi=1.0)
    if validation is None or not validation.windows:
        return fallback
    _, _, geo_means = _nll_sum(params, config, vocab, validation.windows, use_qsc)
    g_lo = float(np.percentile(geo_means, 5))
    g_hi = float(np.percentile(geo_means, 95))
    if not (0.0 < g_lo < g_hi <= 1.0):
        return fallback
    return Calibration(g_lo=g_lo, g_hi=g_hi)


def _snapshot(params: Params) -> Params:
    return {k: v.astype(np.float32).astype(np.float64) for k, v in params.items()}


def train(
    config: ModelConfig,
    vocab: Vocabulary,
    train_set: WindowedDataset,
    validation: WindowedDataset | None = None,
    batch_size: int = DEFAULT_BATCH_SIZE,
    max_epochs: int = DEFAULT_MAX_EPOCHS,
    patience: int | None = DEFAULT_PATIENCE,
    use_qsc: bool = True,
    progress: Callable[[EvalReport], None] | None = None,
) -> TrainResult:
    """Fit the model; returns the parameters with the best validation
    perplexity seen (training perplexity when no validation split is given).
    """
    if not train_set.windows:
        raise DataError("training split is empty")
    if vocab.size != config.vocab_size:
        raise DataError(
            f"config expects vocab of {config.vocab_size}, got {vocab.size}"
        )

    params = init_parameters(config)
    optimizer = _Adam(params)
    eval_set = validation if validation is not None and validation.windows else train_set

    reports: list[EvalReport] = []
    best_ppl = math.inf
    best_params = _snapshot(params)
    best_epoch = 0
    stale = 0

    for epoch in range(1, max_epochs + 1):
        shuffle_rng = np.random.default_rng(
            np.random.SeedSequence((config.seed, 1000 + epoch))
        )
        dropout_rng = np.random.default_rng(
            np.random.SeedSequence((config.seed, 2000 + epoch))
        )
        order = shuffle_rng.permutation(len(train_set.windows))
        for start in range(0, len(order), batch_size):
            batch = [train_set.windows[i] for i in order[start:start + batch_size]]
            inputs, targets = _batch_arrays(batch, vocab, config, use_qsc)
            result = forward_batch(params, config, inputs, train=True,
                                   dropout_rng=dropout_rng)
            value, d_logits = loss_and_grad(
                result, targets, vocab.silent_id, config.silent_loss_weight
            )
            if not math.isfinite(value):
                raise RuntimeAbort(
                    f"training diverged: loss {value} at epoch {epoch}"
                )
            grads = backward(params, config, result, d_logits)
            _clip_gradients(grads)
            optimizer.step(params, grads)

        report = perplexity(params, config, vocab, eval_set, use_qsc, epoch=epoch)
        reports.append(report)
        if progress is not None:
            progress(report)
        if report.perplexity < best_ppl - 1e-12:
            best_ppl = report.perplexity
            best_params = _snapshot(params)
            best_epoch = epoch
            stale = 0
        else:
            stale += 1
            if patience is not None and stale >= patience:
                break

    calibration = calibrate(best_params, config, vocab, validation, use_qsc)
    return TrainResult(params=best_params, reports=reports,
                       calibration=calibration, best_epoch=best_epoch)
