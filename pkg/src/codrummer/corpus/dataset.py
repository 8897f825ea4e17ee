"""Windowing sessions into 4-measure training examples and split handling."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from ..biometric import QscLevel
from ..errors import DataError
from .corpusio import SessionRecord
from .tokens import encode_measure
from .vocab import Vocabulary

CONTEXT_MEASURES = 3
WINDOW_MEASURES = 4
DEFAULT_FRACTIONS = (0.76, 0.12, 0.12)
DEFAULT_STRIDE = 4


class Split(Enum):
    TRAIN = "train"
    VALIDATION = "validation"
    TEST = "test"


@dataclass(frozen=True)
class Window:
    """Four consecutive measures of one session, already tokenized.

    `context_ids` concatenates the first three measures (144 ids) and
    `target_ids` is the fourth. `qsc` is the quantized skin-conductance
    level at the start of the fourth measure.
    """

    session_id: str
    start_measure: int
    context_ids: tuple[int, ...]
    target_ids: tuple[int, ...]
    qsc: QscLevel

    def __post_init__(self) -> None:
        if len(self.context_ids) != CONTEXT_MEASURES * 48:
            raise DataError(f"context must be {CONTEXT_MEASURES * 48} ids")
        if len(self.target_ids) != 48:
            raise DataError("target must be 48 ids")


@dataclass(frozen=True)
class WindowedDataset:
    windows: tuple[Window, ...]
    split: Split

    def __len__(self) -> int:
        return len(self.windows)


@dataclass(frozen=True)
class DatasetSplits:
    train: WindowedDataset
    validation: WindowedDataset
    test: WindowedDataset

    @property
    def total(self) -> int:
        return len(self.train) + len(self.validation) + len(self.test)


def session_windows(
    session: SessionRecord,
    vocab: Vocabulary,
    stride: int = DEFAULT_STRIDE,
) -> list[Window]:
    if stride <= 0:
        raise DataError(f"stride must be positive, got {stride}")
    n = len(session.measures)
    if n < WINDOW_MEASURES:
        warnings.warn(
            f"session {session.session_id!r} has {n} measures, "
            f"shorter than a {WINDOW_MEASURES}-measure window; skipped"
        )
        return []
    out = []
    for start in range(0, n - WINDOW_MEASURES + 1, stride):
        ids = [
            vocab.encode(encode_measure(session.measures[start + k]))
            for k in range(WINDOW_MEASURES)
        ]
        out.append(
            Window(
                session_id=session.session_id,
                start_measure=start,
                context_ids=tuple(ids[0] + ids[1] + ids[2]),
                target_ids=tuple(ids[3]),
                qsc=session.qsc_levels[start + WINDOW_MEASURES - 1],
            )
        )
    return out


def window_dataset(
    sessions: Sequence[SessionRecord],
    vocab: Vocabulary,
    fractions: tuple[float, float, float] = DEFAULT_FRACTIONS,
    seed: int = 0,
    stride: int = DEFAULT_STRIDE,
) -> DatasetSplits:
    """Window every session, shuffle deterministically, and split.

    Split sizes are round(N * fraction) for train and validation with the
    remainder as test, so the three parts always partition the windows.
    """
    if abs(sum(fractions) - 1.0) > 1e-9:
        raise DataError(f"split fractions must sum to 1, got {fractions}")
    if any(f < 0 for f in fractions):
        raise DataError(f"split fractions must be nonnegative, got {fractions}")

    windows: list[Window] = []
    for session in sessions:
        windows.extend(session_windows(session, vocab, stride))

    rng = np.random.Generator(np.random.PCG64(seed))
    order = rng.permutation(len(windows))
    shuffled = [windows[i] for i in order]

    n = len(shuffled)
    n_train = round(n * fractions[0])
    n_val = min(round(n * fractions[1]), n - n_train)
    train = shuffled[:n_train]
    val = shuffled[n_train:n_train + n_val]
    test = shuffled[n_train + n_val:]
    return DatasetSplits(
        train=WindowedDataset(tuple(train), Split.TRAIN),
        validation=WindowedDataset(tuple(val), Split.VALIDATION),
        test=WindowedDataset(tuple(test), Split.TEST),
    )
