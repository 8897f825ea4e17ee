"""Flow questionnaire responses and the flow index."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from ..errors import DataError
from ..improviser.conditions import VisCondition

FLOW_DIMENSIONS = (
    "Challenge-Skill Balance",
    "Merging of Action-Awareness",
    "Clarity of Goals",
    "Unambiguous Feedback",
    "Concentration",
    "Sense of Control",
    "Loss of Self-Consciousness",
    "Transformation of Time",
    "Autotelic Experience",
)

SCORED_DIMENSIONS = (
    "Sense of Control",
    "Autotelic Experience",
    "Challenge-Skill Balance",
)


@dataclass(frozen=True)
class FlowResponse:
    participant: str
    condition: VisCondition
    items: Mapping[str, float]

    def __post_init__(self) -> None:
        missing = set(FLOW_DIMENSIONS) - set(self.items)
        extra = set(self.items) - set(FLOW_DIMENSIONS)
        if missing or extra:
            raise DataError(
                f"response for {self.participant!r} has wrong items: "
                f"missing {sorted(missing)}, extra {sorted(extra)}"
            )
        for name, score in self.items.items():
            if not 1.0 <= score <= 5.0:
                raise DataError(f"{name} score {score} outside [1,5]")


def flow_index(resp: FlowResponse) -> float:
    """Mean of Sense of Control, Autotelic Experience, Challenge-Skill."""
    try:
        return sum(resp.items[d] for d in SCORED_DIMENSIONS) / len(SCORED_DIMENSIONS)
    except KeyError as exc:
        raise DataError(f"missing flow item {exc}") from None


def weighted_flow_index(resp: FlowResponse, loadings: Sequence[float]) -> float:
    """Alternative index weighted by first-principal-component loadings."""
    if len(loadings) != len(FLOW_DIMENSIONS):
        raise DataError(f"need {len(FLOW_DIMENSIONS)} loadings, got {len(loadings)}")
    total = float(sum(loadings))
    if abs(total) < 1e-12:
        raise DataError("loadings sum to zero")
    return float(
        sum(w * resp.items[d] for w, d in zip(loadings, FLOW_DIMENSIONS)) / total
    )


@dataclass(frozen=True)
class ConditionStats:
    condition: VisCondition
    mean: float
    sd: float | None
    n_participants: int


def participant_condition_means(
    responses: Iterable[FlowResponse],
) -> dict[str, dict[VisCondition, float]]:
    """Per-participant mean flow index per condition.

    A participant may have several sessions in one condition (Absent was
    played twice); those collapse to one value before any cross-participant
    statistics, so every participant counts once.
    """
    acc: dict[str, dict[VisCondition, list[float]]] = {}
    for resp in responses:
        acc.setdefault(resp.participant, {}).setdefault(resp.condition, []).append(
            flow_index(resp)
        )
    return {
        participant: {
            cond: sum(values) / len(values) for cond, values in by_cond.items()
        }
        for participant, by_cond in acc.items()
    }


def condition_summary(
    responses: Iterable[FlowResponse],
) -> dict[VisCondition, ConditionStats]:
    by_participant = participant_condition_means(responses)
    per_condition: dict[VisCondition, list[float]] = {}
    for means in by_participant.values():
        for cond, value in means.items():
            per_condition.setdefault(cond, []).append(value)
    out: dict[VisCondition, ConditionStats] = {}
    for cond, values in per_condition.items():
        arr = np.asarray(values)
        sd = float(arr.std(ddof=1)) if len(values) > 1 else None
        out[cond] = ConditionStats(condition=cond, mean=float(arr.mean()),
                                   sd=sd, n_participants=len(values))
    return out


def load_flow_csv(path: str | Path) -> list[FlowResponse]:
    """Read "participant,condition,item1..item9" rows (items in the
    FLOW_DIMENSIONS order)."""
    responses: list[FlowResponse] = []
    if not Path(path).is_file():
        raise DataError(f"{path}: flow CSV not found")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise DataError(f"{path}: empty flow CSV")
        expected = ["participant", "condition"] + [
            f"item{i}" for i in range(1, len(FLOW_DIMENSIONS) + 1)
        ]
        if [h.strip() for h in header] != expected:
            raise DataError(f"{path}: header must be {','.join(expected)}")
        for lineno, row in enumerate(reader, start=2):
            if not row or not any(cell.strip() for cell in row):
                continue
            if len(row) != len(expected):
                raise DataError(f"{path} row {lineno}: expected {len(expected)} fields")
            try:
                condition = VisCondition(row[1].strip().lower())
            except ValueError:
                raise DataError(
                    f"{path} row {lineno}: unknown condition {row[1]!r}"
                ) from None
            try:
                scores = [float(cell) for cell in row[2:]]
            except ValueError as exc:
                raise DataError(f"{path} row {lineno}: {exc}") from None
            try:
                responses.append(FlowResponse(
                    participant=row[0].strip(),
                    condition=condition,
                    items=dict(zip(FLOW_DIMENSIONS, scores)),
                ))
            except DataError as exc:
                raise DataError(f"{path} row {lineno}: {exc}") from None
    if not responses:
        raise DataError(f"{path}: no responses")
    return responses
