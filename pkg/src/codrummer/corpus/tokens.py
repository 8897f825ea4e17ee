"""Text token codec for grid cells.

One token per grid step. A silent step is "o". A sounding step joins its
components with "|": an optional melody element ("H<band>" onset or "s"
sustain) plus any number of drum hits "<pitch><band>", e.g. "38mp|44mf|Hmp".
Canonical rendering puts the melody element first and drums in ascending
pitch order; the parser accepts components in any order.
"""

from __future__ import annotations

from typing import Sequence

from ..errors import DataError
from .events import VelocityBand, band_from_suffix
from .grid import (
    STEPS_PER_MEASURE,
    GridCell,
    MeasureGrid,
    MelodyOnset,
    MelodySustain,
    SUSTAIN,
)

SILENT_TOKEN = "o"
_BAND_SUFFIXES = ("p", "mp", "mf", "f")


class TokenError(DataError):
    """A token string that does not belong to the grammar."""


def _fail(token: str, position: int | None, why: str) -> TokenError:
    where = f" at step {position}" if position is not None else ""
    return TokenError(f"bad token {token!r}{where}: {why}")


def render_cell(cell: GridCell) -> str:
    if cell.is_empty:
        return SILENT_TOKEN
    parts: list[str] = []
    if isinstance(cell.melody, MelodyOnset):
        parts.append("H" + cell.melody.band.suffix)
    elif isinstance(cell.melody, MelodySustain):
        parts.append("s")
    for pitch, band in cell.drums:
        parts.append(f"{pitch}{band.suffix}")
    return "|".join(parts)


def _parse_component(comp: str, token: str, position: int | None) -> tuple[str, object]:
    if comp == "s":
        return ("melody", SUSTAIN)
    if comp.startswith("H"):
        band = band_from_suffix(comp[1:])
        if band is None:
            raise _fail(token, position, f"unknown melody band in {comp!r}")
        return ("melody", MelodyOnset(band))
    i = 0
    while i < len(comp) and comp[i].isdigit():
        i += 1
    if i == 0:
        raise _fail(token, position, f"unrecognized component {comp!r}")
    pitch = int(comp[:i])
    if pitch > 127:
        raise _fail(token, position, f"drum pitch {pitch} out of range")
    band = band_from_suffix(comp[i:])
    if band is None:
        raise _fail(token, position, f"unknown velocity band in {comp!r}")
    return ("drum", (pitch, band))


def parse_token(text: str, position: int | None = None) -> GridCell:
    if text == SILENT_TOKEN:
        return GridCell()
    if not text:
        raise _fail(text, position, "empty token")
    melody: MelodyOnset | MelodySustain | None = None
    drums: dict[int, VelocityBand] = {}
    for comp in text.split("|"):
        if comp == SILENT_TOKEN:
            raise _fail(text, position, "'o' cannot appear inside a composite")
        kind, value = _parse_component(comp, text, position)
        if kind == "melody":
            if melody is not None:
                raise _fail(text, position, "more than one melody component")
            melody = value  # type: ignore[assignment]
        else:
            pitch, band = value  # type: ignore[misc]
            if pitch in drums:
                raise _fail(text, position, f"duplicate drum pitch {pitch}")
            drums[pitch] = band
    return GridCell(melody=melody, drums=tuple(sorted(drums.items())))


def encode_measure(grid: MeasureGrid) -> list[str]:
    return [render_cell(c) for c in grid.cells]


def decode_measure(tokens: Sequence[str]) -> MeasureGrid:
    if len(tokens) != STEPS_PER_MEASURE:
        raise TokenError(
            f"measure needs {STEPS_PER_MEASURE} tokens, got {len(tokens)}"
        )
    return MeasureGrid(cells=tuple(parse_token(t, i) for i, t in enumerate(tokens)))
