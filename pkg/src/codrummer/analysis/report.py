"""Aligned-text and JSON report rendering for the two studies."""

from __future__ import annotations

from typing import Iterable, Sequence

from ..improviser.conditions import VisCondition
from .flow import (
    ConditionStats,
    FlowResponse,
    condition_summary,
    participant_condition_means,
)
from .listener import ListenerSummary, QUESTIONS
from .stats import PairedTResult, paired_t

TABLE_ORDER = (VisCondition.DECEPTIVE, VisCondition.ABSENT, VisCondition.TRUTHFUL)
PAIR_ORDER = (
    ("Absent vs. Deceptive", VisCondition.ABSENT, VisCondition.DECEPTIVE),
    ("Truthful vs. Absent", VisCondition.TRUTHFUL, VisCondition.ABSENT),
    ("Truthful vs. Deceptive", VisCondition.TRUTHFUL, VisCondition.DECEPTIVE),
)


def pairwise_tests(
    responses: Iterable[FlowResponse],
) -> dict[str, PairedTResult]:
    """The three between-condition matched-pair tests, pairing on
    participants present in both conditions."""
    by_participant = participant_condition_means(responses)
    out: dict[str, PairedTResult] = {}
    for label, cond_a, cond_b in PAIR_ORDER:
        a, b = [], []
        for means in by_participant.values():
            if cond_a in means and cond_b in means:
                a.append(means[cond_a])
                b.append(means[cond_b])
        if len(a) >= 2:
            out[label] = paired_t(a, b)
    return out


def _fmt(value: float | None, digits: int = 2) -> str:
    if value is None:
        return "--"
    return f"{value:.{digits}f}"


def render_flow_report(responses: Sequence[FlowResponse]) -> str:
    by_participant = participant_condition_means(responses)
    summary = condition_summary(responses)
    tests = pairwise_tests(responses)

    lines = ["flow index vs. visualisation condition", ""]
    header = f"{'Participant':<12}" + "".join(
        f"{c.value.capitalize():>10}" for c in TABLE_ORDER
    )
    lines.append(header)
    for participant in sorted(by_participant):
        means = by_participant[participant]
        row = f"{participant:<12}" + "".join(
            f"{_fmt(means.get(c)):>10}" for c in TABLE_ORDER
        )
        lines.append(row)
    lines.append(
        f"{'mean':<12}"
        + "".join(
            f"{_fmt(summary[c].mean if c in summary else None):>10}"
            for c in TABLE_ORDER
        )
    )
    lines.append(
        f"{'s.d.':<12}"
        + "".join(
            f"{_fmt(summary[c].sd if c in summary else None):>10}"
            for c in TABLE_ORDER
        )
    )
    lines.append("")
    lines.append("matched-pair t-tests (95% CI)")
    for label, result in tests.items():
        if result.degenerate:
            lines.append(f"  {label:<24} mean {result.mean_diff:+.2f} (degenerate)")
        else:
            lines.append(
                f"  {label:<24} mean {result.mean_diff:+.2f} "
                f"[{result.ci_low:+.2f}, {result.ci_high:+.2f}]  "
                f"t={result.t_stat:.2f}  p={result.p_two_sided:.4f}"
            )
    return "\n".join(lines)


def flow_report_json(responses: Sequence[FlowResponse]) -> dict:
    by_participant = participant_condition_means(responses)
    summary = condition_summary(responses)
    tests = pairwise_tests(responses)
    return {
        "participants": {
            p: {c.value: v for c, v in means.items()}
            for p, means in sorted(by_participant.items())
        },
        "conditions": {
            c.value: {"mean": s.mean, "sd": s.sd, "n": s.n_participants}
            for c, s in summary.items()
        },
        "pairwise": {
            label: {
                "mean_diff": r.mean_diff,
                "ci95": [r.ci_low, r.ci_high],
                "t": None if r.degenerate else r.t_stat,
                "p_two_sided": None if r.degenerate else r.p_two_sided,
                "n": r.n,
                "degenerate": r.degenerate,
            }
            for label, r in tests.items()
        },
    }


def render_listener_report(
    summary: ListenerSummary | None,
    published: dict,
) -> str:
    lines: list[str] = []
    if summary is not None:
        lines += ["listener study (computed from responses)", ""]
        lines.append(f"{'Tracks':<12}{'More interesting':>18}{'Better balance':>18}")
        for comparison, cell in summary.cells.items():
            lines.append(
                f"{comparison:<12}"
                f"{cell['interesting'].percent:>17}%"
                f"{cell['balance'].percent:>17}%"
            )
        totals = summary.totals
        lines.append(
            f"{'Total':<12}{totals['interesting'].percent:>17}%"
            f"{totals['balance'].percent:>17}%"
        )
        for q in QUESTIONS:
            if q in summary.p_values:
                k = totals[q].truthful
                n = totals[q].total
                lines.append(
                    f"  {q}: {k}/{n} truthful, one-sided binomial p = "
                    f"{summary.p_values[q]:.4f}"
                )
        lines.append(f"  valid participants: {summary.valid_participants}")
        if summary.excluded:
            lines.append("  excluded:")
            for participant, reason in sorted(summary.excluded.items()):
                lines.append(f"    {participant}: {reason}")
        lines.append("")

    lines += ["published listener table (truthful-condition preference)", ""]
    lines.append(f"{'Tracks':<12}{'More interesting':>18}{'Better balance':>18}")
    for row in published["comparisons"]:
        lines.append(
            f"{row['tracks']:<12}{row['interesting']:>17}%{row['balance']:>17}%"
        )
    totals = published["totals"]
    star = "*" if published.get("significant", {}).get("balance") else ""
    lines.append(
        f"{'Total':<12}{totals['interesting']:>17}%{totals['balance']:>16}%{star}"
    )
    return "\n".join(lines)


def listener_report_json(
    summary: ListenerSummary | None,
    published: dict,
) -> dict:
    out: dict = {"published": published}
    if summary is not None:
        out["computed"] = {
            "cells": {
                comparison: {
                    q: {"truthful": c.truthful, "total": c.total,
                        "percent": c.percent}
                    for q, c in cell.items()
                }
                for comparison, cell in summary.cells.items()
            },
            "totals": {
                q: {"truthful": c.truthful, "total": c.total, "percent": c.percent}
                for q, c in summary.totals.items()
            },
            "p_values": summary.p_values,
            "excluded": summary.excluded,
            "valid_participants": summary.valid_participants,
        }
    return out
