"""Listener study: exclusions, preference aggregation, and the published
table.

Input rows mirror the questionnaire: each real A/B comparison asks which
track was "more interesting" and which had better "balance"; choices are
recorded as whether the pick was the track recorded under the truthful
visualization. One extra comparison is an attention check (a drum-less
track), carried in the same CSV with question "drums" or a flagged
"balance" row.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

from ..errors import DataError
from .stats import binomial_test_one_sided

QUESTIONS = ("interesting", "balance")
CHOICES = ("truthful", "deceptive")
MIN_DURATION_S = 480.0  # the 8 minutes needed to hear every track
ATTENTION_COMPARISON = "check"  # the drum-less comparison never enters counts


@dataclass(frozen=True)
class ListenerRow:
    participant: str
    comparison: str
    question: str
    choice: str
    duration_s: float
    attention_ok: bool


@dataclass(frozen=True)
class CellCount:
    truthful: int
    total: int

    @property
    def percent(self) -> int:
        if self.total == 0:
            return 0
        return round(100.0 * self.truthful / self.total)


@dataclass
class ListenerSummary:
    cells: dict[str, dict[str, CellCount]]      # comparison -> question -> count
    totals: dict[str, CellCount]                # question -> count
    p_values: dict[str, float]                  # question -> binomial tail
    excluded: dict[str, str] = field(default_factory=dict)
    valid_participants: int = 0


def exclude_participants(
    rows: Iterable[ListenerRow],
) -> tuple[list[ListenerRow], dict[str, str]]:
    """Apply the three exclusion rules; returns surviving rows and the
    reason each excluded participant was dropped."""
    rows = list(rows)
    excluded: dict[str, str] = {}
    for row in rows:
        if row.participant in excluded:
            continue
        if row.duration_s < MIN_DURATION_S:
            excluded[row.participant] = "under 8 minutes"
        elif not row.attention_ok:
            if row.question == "drums":
                excluded[row.participant] = "wrong drums answer"
            elif row.question == "balance":
                excluded[row.participant] = "balance on drum-less track"
            else:
                excluded[row.participant] = "failed attention check"
    kept = [r for r in rows if r.participant not in excluded]
    return kept, excluded


def summarize_listener(rows: Sequence[ListenerRow]) -> ListenerSummary:
    kept, excluded = exclude_participants(rows)
    cells: dict[str, dict[str, list[int]]] = {}
    totals: dict[str, list[int]] = {q: [0, 0] for q in QUESTIONS}
    participants = set()
    for row in kept:
        participants.add(row.participant)
        if row.question not in QUESTIONS or row.comparison == ATTENTION_COMPARISON:
            continue  # attention-check rows do not enter the counts
        if row.choice not in CHOICES:
            raise DataError(
                f"{row.participant}/{row.comparison}: unknown choice {row.choice!r}"
            )
        cell = cells.setdefault(row.comparison, {q: [0, 0] for q in QUESTIONS})
        counter = cell[row.question]
        counter[1] += 1
        totals[row.question][1] += 1
        if row.choice == "truthful":
            counter[0] += 1
            totals[row.question][0] += 1

    summary = ListenerSummary(
        cells={
            comparison: {q: CellCount(*cell[q]) for q in QUESTIONS}
            for comparison, cell in sorted(cells.items())
        },
        totals={q: CellCount(*totals[q]) for q in QUESTIONS},
        p_values={
            q: binomial_test_one_sided(totals[q][0], totals[q][1])
            for q in QUESTIONS
            if totals[q][1] > 0
        },
        excluded=excluded,
        valid_participants=len(participants),
    )
    return summary


def load_listener_csv(path: str | Path) -> list[ListenerRow]:
    rows: list[ListenerRow] = []
    expected = ["participant", "comparison", "question", "choice",
                "duration_s", "attention_ok"]
    if not Path(path).is_file():
        raise DataError(f"{path}: listener CSV not found")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise DataError(f"{path}: empty listener CSV")
        if [h.strip() for h in header] != expected:
            raise DataError(f"{path}: header must be {','.join(expected)}")
        for lineno, row in enumerate(reader, start=2):
            if not row or not any(cell.strip() for cell in row):
                continue
            if len(row) != len(expected):
                raise DataError(f"{path} row {lineno}: expected {len(expected)} fields")
            try:
                duration = float(row[4])
            except ValueError as exc:
                raise DataError(f"{path} row {lineno}: {exc}") from None
            flag = row[5].strip().lower()
            if flag not in ("0", "1", "true", "false"):
                raise DataError(f"{path} row {lineno}: attention_ok must be boolean")
            rows.append(ListenerRow(
                participant=row[0].strip(),
                comparison=row[1].strip(),
                question=row[2].strip(),
                choice=row[3].strip(),
                duration_s=duration,
                attention_ok=flag in ("1", "true"),
            ))
    if not rows:
        raise DataError(f"{path}: no rows")
    return rows


def published_listener_table() -> dict:
    """The published preference table, shipped verbatim.

    Its totals are not recomputable from the per-comparison percentages, so
    reporting echoes this fixture rather than re-deriving them.
    """
    payload = (
        resources.files("codrummer.analysis") / "fixtures" / "listener_summary.json"
    ).read_text(encoding="utf-8")
    return json.loads(payload)
