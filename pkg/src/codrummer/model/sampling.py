"""Weighted sampling of one generated measure from the model's outputs."""

from __future__ import annotations

import numpy as np

from ..biometric import QscLevel
from ..corpus.vocab import Vocabulary
from ..errors import DataError
from .config import ModelConfig
from .network import Params, assemble_input_ids, forward

ARGMAX_TEMPERATURE = 1e-6


def sample_measure(
    params: Params,
    config: ModelConfig,
    vocab: Vocabulary,
    context_ids,
    qsc: QscLevel | None,
    temperature: float = 1.0,
    rng: np.random.Generator | None = None,
) -> tuple[list[int], list[float]]:
    """Sample the next measure position by position.

    Every row is restricted to the musical part of the vocabulary before
    sampling, so specials can never be emitted. Returns the chosen ids and
    the probability the sampling distribution assigned to each choice.
    `qsc` None selects the neutral start token.
    """
    if temperature <= 0.0:
        raise DataError(f"temperature must be positive, got {temperature}")
    if rng is None:
        rng = np.random.default_rng()

    start_id = vocab.start_id if qsc is None else vocab.qsc_id(qsc)
    input_ids = assemble_input_ids(start_id, context_ids, vocab.mask_id,
                                   config.target_steps)
    if len(input_ids) != config.input_length:
        raise DataError(
            f"context of {len(context_ids)} ids does not fit input length "
            f"{config.input_length}"
        )
    rows = forward(params, config, input_ids)

    musical = rows[:, :vocab.musical_size]
    musical = musical / musical.sum(axis=1, keepdims=True)

    ids: list[int] = []
    probs: list[float] = []
    for row in musical:
        if temperature < ARGMAX_TEMPERATURE:
            choice = int(np.argmax(row))
            scaled = row
        else:
            log_q = np.log(np.maximum(row, 1e-300)) / temperature
            log_q -= log_q.max()
            scaled = np.exp(log_q)
            scaled /= scaled.sum()
            choice = int(rng.choice(len(scaled), p=scaled))
        ids.append(choice)
        probs.append(float(scaled[choice]))
    return ids, probs
