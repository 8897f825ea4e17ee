"""Duet corpus pipeline: events -> beat grid -> tokens -> vocabulary -> windows."""

from .events import NoteEvent, Source, VelocityBand, band_of_velocity, band_velocity
from .grid import (
    BEATS_PER_MEASURE,
    STEPS_PER_BEAT,
    STEPS_PER_MEASURE,
    DrumHit,
    GridCell,
    MeasureGrid,
    MelodyOnset,
    MelodySustain,
    SUSTAIN,
    measure_duration_s,
    merge_grids,
    quantize_events,
    step_duration_s,
)
from .tokens import SILENT_TOKEN, TokenError, decode_measure, encode_measure, parse_token, render_cell
from .vocab import MASK_TOKEN, START_TOKEN, Vocabulary, build_vocabulary, qsc_token_text
from .dataset import Split, Window, WindowedDataset, DatasetSplits, window_dataset
from .corpusio import SessionRecord, read_corpus, write_corpus
from .smf import read_midi_file, write_midi_file, midi_to_events

__all__ = [
    "NoteEvent", "Source", "VelocityBand", "band_of_velocity", "band_velocity",
    "BEATS_PER_MEASURE", "STEPS_PER_BEAT", "STEPS_PER_MEASURE",
    "DrumHit", "GridCell", "MeasureGrid", "MelodyOnset", "MelodySustain", "SUSTAIN",
    "measure_duration_s", "merge_grids", "quantize_events", "step_duration_s",
    "SILENT_TOKEN", "TokenError", "decode_measure", "encode_measure", "parse_token", "render_cell",
    "MASK_TOKEN", "START_TOKEN", "Vocabulary", "build_vocabulary", "qsc_token_text",
    "Split", "Window", "WindowedDataset", "DatasetSplits", "window_dataset",
    "SessionRecord", "read_corpus", "write_corpus",
    "read_midi_file", "write_midi_file", "midi_to_events",
]
