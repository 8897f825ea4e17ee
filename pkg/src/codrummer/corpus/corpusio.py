"""Corpus file reader/writer.

Line-delimited UTF-8 text. A session starts with a header:

    #session id=<id> style=<Swing|Funk|Rock> technique=<lead|trade4|trade2> tempo=120

followed by one line per measure: the quantized skin-conductance level, a
tab, then the measure's 48 space-separated tokens.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from ..biometric import QscLevel
from ..errors import DataError
from .grid import MeasureGrid
from .tokens import decode_measure, encode_measure

STYLES = ("Swing", "Funk", "Rock")
TECHNIQUES = ("lead", "trade4", "trade2")


@dataclass(frozen=True)
class SessionRecord:
    session_id: str
    style: str
    technique: str
    tempo_bpm: float
    qsc_levels: tuple[QscLevel, ...]
    measures: tuple[MeasureGrid, ...]

    def __post_init__(self) -> None:
        if self.style not in STYLES:
            raise DataError(f"unknown style {self.style!r}, expected one of {STYLES}")
        if self.technique not in TECHNIQUES:
            raise DataError(
                f"unknown technique {self.technique!r}, expected one of {TECHNIQUES}"
            )
        if self.tempo_bpm <= 0:
            raise DataError(f"tempo must be positive, got {self.tempo_bpm}")
        if len(self.qsc_levels) != len(self.measures):
            raise DataError(
                f"session {self.session_id!r}: {len(self.qsc_levels)} levels "
                f"for {len(self.measures)} measures"
            )


def _parse_header(line: str, lineno: int) -> dict[str, str]:
    fields: dict[str, str] = {}
    for part in line[len("#session"):].split():
        key, sep, value = part.partition("=")
        if not sep or not value:
            raise DataError(f"line {lineno}: malformed header field {part!r}")
        fields[key] = value
    missing = {"id", "style", "technique", "tempo"} - set(fields)
    if missing:
        raise DataError(f"line {lineno}: header missing {sorted(missing)}")
    if fields["style"] not in STYLES:
        raise DataError(
            f"line {lineno}: unknown style {fields['style']!r}, "
            f"expected one of {STYLES}"
        )
    if fields["technique"] not in TECHNIQUES:
        raise DataError(
            f"line {lineno}: unknown technique {fields['technique']!r}, "
            f"expected one of {TECHNIQUES}"
        )
    try:
        float(fields["tempo"])
    except ValueError:
        raise DataError(
            f"line {lineno}: tempo {fields['tempo']!r} is not a number"
        ) from None
    return fields


def read_corpus(path: str | Path) -> list[SessionRecord]:
    sessions: list[SessionRecord] = []
    header: dict[str, str] | None = None
    levels: list[QscLevel] = []
    grids: list[MeasureGrid] = []

    def flush() -> None:
        nonlocal header, levels, grids
        if header is None:
            return
        sessions.append(
            SessionRecord(
                session_id=header["id"],
                style=header["style"],
                technique=header["technique"],
                tempo_bpm=float(header["tempo"]),
                qsc_levels=tuple(levels),
                measures=tuple(grids),
            )
        )
        header, levels, grids = None, [], []

    try:
        text = Path(path).read_text(encoding="utf-8")
    except FileNotFoundError:
        raise DataError(f"{path}: corpus file not found") from None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#session"):
            flush()
            header = _parse_header(line, lineno)
            continue
        if line.startswith("#"):
            continue
        if header is None:
            raise DataError(f"line {lineno}: measure line before any session header")
        level_text, sep, token_text = raw.partition("\t")
        if not sep:
            raise DataError(f"line {lineno}: expected '<level>\\t<tokens>'")
        try:
            level = QscLevel.from_name(level_text.strip())
        except DataError as exc:
            raise DataError(f"line {lineno}: {exc}") from None
        tokens = token_text.split()
        try:
            grid = decode_measure(tokens)
        except DataError as exc:
            raise DataError(f"line {lineno}: {exc}") from None
        levels.append(level)
        grids.append(grid)
    flush()
    if not sessions:
        raise DataError(f"{path}: no sessions found")
    return sessions


def write_corpus(path: str | Path, sessions: Iterable[SessionRecord]) -> None:
    lines: list[str] = []
    for s in sessions:
        lines.append(
            f"#session id={s.session_id} style={s.style} "
            f"technique={s.technique} tempo={s.tempo_bpm:g}"
        )
        for level, grid in zip(s.qsc_levels, s.measures):
            lines.append(f"{level.wire_name}\t{' '.join(encode_measure(grid))}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
