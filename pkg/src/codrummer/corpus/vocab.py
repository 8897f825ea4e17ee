"""Token vocabulary: counting, pruning, id assignment, and hashing."""

from __future__ import annotations

import hashlib
import json
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from ..biometric import QscLevel
from ..errors import DataError
from .grid import MeasureGrid
from .tokens import SILENT_TOKEN, encode_measure

MASK_TOKEN = "<mask>"
START_TOKEN = "<start>"
_QSC_TOKENS = {QscLevel.HIGH: "<High>", QscLevel.MED: "<Med>", QscLevel.LOW: "<Low>"}
SPECIAL_TOKENS = (_QSC_TOKENS[QscLevel.HIGH], _QSC_TOKENS[QscLevel.MED],
                  _QSC_TOKENS[QscLevel.LOW], MASK_TOKEN, START_TOKEN)

DEFAULT_MIN_COUNT = 20


def qsc_token_text(level: QscLevel) -> str:
    return _QSC_TOKENS[level]


@dataclass(frozen=True)
class VocabReport:
    total_unique: int
    pruned: int
    retained: int


@dataclass(frozen=True)
class Vocabulary:
    """Fixed token-id mapping.

    Musical tokens occupy ids [0, musical_size): the silent token is id 0 and
    the rest are ordered by descending corpus count with text as tiebreaker.
    The five input-only specials follow (three start tokens carrying the
    quantized skin-conductance level, a mask token, and a neutral start
    token). Rare musical tokens are not stored; encoding maps them to the
    silent id.
    """

    tokens: tuple[str, ...]
    musical_size: int
    counts: Mapping[str, int] = field(default_factory=dict, compare=False)
    _ids: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not self.tokens or self.tokens[0] != SILENT_TOKEN:
            raise DataError("vocabulary must start with the silent token")
        if self.tokens[self.musical_size:] != SPECIAL_TOKENS:
            raise DataError("vocabulary must end with the five special tokens")
        object.__setattr__(self, "_ids", {t: i for i, t in enumerate(self.tokens)})
        if len(self._ids) != len(self.tokens):
            raise DataError("duplicate token in vocabulary")

    @property
    def size(self) -> int:
        return len(self.tokens)

    @property
    def silent_id(self) -> int:
        return 0

    @property
    def mask_id(self) -> int:
        return self._ids[MASK_TOKEN]

    @property
    def start_id(self) -> int:
        return self._ids[START_TOKEN]

    def qsc_id(self, level: QscLevel) -> int:
        return self._ids[_QSC_TOKENS[level]]

    def __contains__(self, text: str) -> bool:
        return text in self._ids

    def id_of(self, text: str) -> int:
        """Token id; unknown (pruned) tokens fall back to the silent id."""
        i = self._ids.get(text)
        return self.silent_id if i is None else i

    def strict_id(self, text: str) -> int:
        i = self._ids.get(text)
        if i is None:
            raise DataError(f"token {text!r} not in vocabulary")
        return i

    def text_of(self, token_id: int) -> str:
        if not 0 <= token_id < len(self.tokens):
            raise DataError(f"token id {token_id} out of range")
        return self.tokens[token_id]

    def is_musical(self, token_id: int) -> bool:
        return 0 <= token_id < self.musical_size

    def encode(self, texts: Sequence[str]) -> list[int]:
        return [self.id_of(t) for t in texts]

    def decode(self, ids: Sequence[int]) -> list[str]:
        return [self.text_of(i) for i in ids]

    @property
    def report(self) -> VocabReport:
        observed = set(self.counts) | {SILENT_TOKEN}
        total = len(observed)
        return VocabReport(
            total_unique=total,
            pruned=total - self.musical_size,
            retained=self.musical_size,
        )

    @property
    def vocab_hash(self) -> str:
        payload = "\n".join(self.tokens).encode("utf-8")
        return hashlib.sha256(payload).hexdigest()

    def to_json(self) -> str:
        return json.dumps(
            {
                "tokens": list(self.tokens),
                "musical_size": self.musical_size,
                "counts": dict(self.counts),
            },
            indent=2,
        )

    @classmethod
    def from_json(cls, text: str) -> "Vocabulary":
        data = json.loads(text)
        return cls(
            tokens=tuple(data["tokens"]),
            musical_size=int(data["musical_size"]),
            counts={k: int(v) for k, v in data.get("counts", {}).items()},
        )


def vocabulary_from_counts(
    counts: Mapping[str, int],
    min_count: int = DEFAULT_MIN_COUNT,
) -> Vocabulary:
    """Assign ids from raw corpus counts.

    Tokens seen fewer than `min_count` times are dropped; their occurrences
    encode as silent. The silent token itself is never pruned and always
    takes id 0.
    """
    kept = [
        (text, n)
        for text, n in counts.items()
        if text != SILENT_TOKEN and text not in SPECIAL_TOKENS and n >= min_count
    ]
    kept.sort(key=lambda item: (-item[1], item[0]))
    musical = [SILENT_TOKEN] + [text for text, _ in kept]
    return Vocabulary(
        tokens=tuple(musical) + SPECIAL_TOKENS,
        musical_size=len(musical),
        counts={
            k: v for k, v in counts.items() if k not in SPECIAL_TOKENS
        },
    )


def build_vocabulary(
    corpus: Iterable[Sequence[MeasureGrid]],
    min_count: int = DEFAULT_MIN_COUNT,
) -> Vocabulary:
    """Count tokens across all sessions' measures, then prune and assign ids."""
    counts: Counter = Counter()
    for session in corpus:
        for grid in session:
            counts.update(encode_measure(grid))
    if not counts:
        raise DataError("cannot build a vocabulary from an empty corpus")
    return vocabulary_from_counts(counts, min_count)
