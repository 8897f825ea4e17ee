"""The operations behind each service endpoint.

Each op takes a request model, does the file I/O and orchestration around
the core modules, writes a manifest next to every artifact it produces, and
returns a JSON-ready dict.
"""

from __future__ import annotations

import collections
import logging
from pathlib import Path

from ..biometric import QscLevel, QscService, load_sc_csv
from ..corpus import (
    SessionRecord,
    Vocabulary,
    build_vocabulary,
    midi_to_events,
    quantize_events,
    read_corpus,
    read_midi_file,
    window_dataset,
    write_corpus,
)
from ..corpus.dataset import Split
from ..corpus.grid import measure_duration_s
from ..errors import DataError, UsageError
from ..improviser import ScriptedQsc, SessionConfig, SimulatedClock, WallClock, run_session
from ..improviser.conditions import BioCondition, VisCondition
from ..model import ModelConfig, load_model, perplexity, save_model, train
from ..netio import BroadcastHub, CollectorSink, UdpQscTransport
from . import schemas
from .manifest import RunManifest, write_manifest

log = logging.getLogger(__name__)

MIDI_SUFFIXES = (".mid", ".midi")
QSC_SIDECAR_SUFFIX = ".qsc.csv"


def _session_from_midi(path: Path, req: schemas.CorpusBuildRequest) -> SessionRecord:
    midi = read_midi_file(path)
    events = midi_to_events(midi)
    measures = quantize_events(events, tempo_bpm=req.tempo_bpm)
    sidecar = path.with_name(path.stem + QSC_SIDECAR_SUFFIX)
    if sidecar.exists():
        service = QscService.from_samples(load_sc_csv(sidecar))
        measure_s = measure_duration_s(req.tempo_bpm)
        levels = [service.level_at(n * measure_s) for n in range(len(measures))]
    else:
        levels = [QscLevel.MED] * len(measures)
    return SessionRecord(
        session_id=path.stem,
        style=req.style,
        technique=req.technique,
        tempo_bpm=req.tempo_bpm,
        qsc_levels=tuple(levels),
        measures=tuple(measures),
    )


def corpus_build(req: schemas.CorpusBuildRequest) -> dict:
    midi_dir = Path(req.midi_dir)
    if not midi_dir.is_dir():
        raise DataError(f"{midi_dir}: not a directory")
    paths = sorted(
        p for p in midi_dir.iterdir() if p.suffix.lower() in MIDI_SUFFIXES
    )
    if not paths:
        raise DataError(f"{midi_dir}: no MIDI files found")
    sessions = [_session_from_midi(p, req) for p in paths]
    out = Path(req.out_path)
    write_corpus(out, sessions)
    manifest = RunManifest(command="corpus build", config=req.model_dump())
    for p in paths:
        manifest.add_input(p)
    manifest.add_output(out)
    write_manifest(manifest, out)
    return {
        "out_path": str(out),
        "sessions": len(sessions),
        "measures": sum(len(s.measures) for s in sessions),
    }


def corpus_stats(req: schemas.CorpusStatsRequest) -> dict:
    sessions = read_corpus(req.corpus_path)
    vocab = build_vocabulary((s.measures for s in sessions), min_count=req.min_count)
    report = vocab.report
    level_counts = collections.Counter(
        level.wire_name for s in sessions for level in s.qsc_levels
    )
    total_levels = sum(level_counts.values())
    return {
        "sessions": len(sessions),
        "measures": sum(len(s.measures) for s in sessions),
        "token_occurrences": sum(vocab.counts.values()),
        "unique_tokens": report.total_unique,
        "retained": report.retained,
        "pruned": report.pruned,
        "min_count": req.min_count,
        "qsc_proportions": {
            name: level_counts.get(name, 0) / total_levels if total_levels else 0.0
            for name in ("Low", "Med", "High")
        },
    }


def vocab_build(req: schemas.VocabBuildRequest) -> dict:
    sessions = read_corpus(req.corpus_path)
    vocab = build_vocabulary((s.measures for s in sessions), min_count=req.min_count)
    out = Path(req.out_path)
    out.write_text(vocab.to_json() + "\n", encoding="utf-8")
    manifest = RunManifest(command="corpus vocab", config=req.model_dump())
    manifest.add_input(req.corpus_path)
    manifest.add_output(out)
    write_manifest(manifest, out)
    report = vocab.report
    return {
        "out_path": str(out),
        "size": vocab.size,
        "musical_size": vocab.musical_size,
        "retained": report.retained,
        "pruned": report.pruned,
        "vocab_hash": vocab.vocab_hash,
    }


def _load_vocab(path: str | Path) -> Vocabulary:
    try:
        return Vocabulary.from_json(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise DataError(f"{path}: vocabulary file not found") from None
    except (ValueError, KeyError) as exc:
        raise DataError(f"{path}: malformed vocabulary file: {exc}") from None


def _vocab_sidecar(model_path: str | Path) -> Path:
    model_path = Path(model_path)
    return model_path.with_name(model_path.stem + ".vocab.json")


def train_model(req: schemas.TrainRequest) -> dict:
    sessions = read_corpus(req.corpus_path)
    if req.vocab_path is not None:
        vocab = _load_vocab(req.vocab_path)
    else:
        vocab = build_vocabulary(
            (s.measures for s in sessions), min_count=req.min_count
        )
    splits = window_dataset(sessions, vocab, seed=req.seed, stride=req.stride)
    config = ModelConfig(
        vocab_size=vocab.size,
        embed_dim=req.embed_dim,
        hidden_units=req.hidden_units,
        seed=req.seed,
    )
    result = train(
        config,
        vocab,
        splits.train,
        validation=splits.validation if splits.validation.windows else None,
        batch_size=req.batch_size,
        max_epochs=req.max_epochs,
        patience=req.patience,
        use_qsc=req.use_qsc,
        progress=lambda r: log.info(
            "epoch %d: validation perplexity %.4f", r.epoch, r.perplexity
        ),
    )
    out = Path(req.out_path)
    save_model(out, result.params, config, vocab.vocab_hash, result.calibration)
    vocab_out = _vocab_sidecar(out)
    vocab_out.write_text(vocab.to_json() + "\n", encoding="utf-8")
    manifest = RunManifest(
        command="train", config=req.model_dump(), seed=req.seed
    )
    manifest.add_input(req.corpus_path)
    if req.vocab_path is not None:
        manifest.add_input(req.vocab_path)
    manifest.add_output(out)
    manifest.add_output(vocab_out)
    write_manifest(manifest, out)
    test_report = None
    if splits.test.windows:
        test_report = perplexity(
            result.params, config, vocab, splits.test, use_qsc=req.use_qsc
        )
    best_report = next(
        (r for r in result.reports if r.epoch == result.best_epoch), None
    )
    return {
        "out_path": str(out),
        "vocab_path": str(vocab_out),
        "vocab_hash": vocab.vocab_hash,
        "windows": {
            "train": len(splits.train.windows),
            "validation": len(splits.validation.windows),
            "test": len(splits.test.windows),
        },
        "best_epoch": result.best_epoch,
        "epochs_run": len(result.reports),
        "validation_perplexity": best_report.perplexity if best_report else None,
        "test_perplexity": test_report.perplexity if test_report else None,
        "calibration": {
            "g_lo": result.calibration.g_lo,
            "g_hi": result.calibration.g_hi,
        },
    }


def _load_model_and_vocab(model_path: str, vocab_path: str | None):
    vocab_file = Path(vocab_path) if vocab_path else _vocab_sidecar(model_path)
    vocab = _load_vocab(vocab_file)
    try:
        loaded = load_model(model_path, expected_vocab_hash=vocab.vocab_hash)
    except FileNotFoundError:
        raise DataError(f"{model_path}: model file not found") from None
    return loaded, vocab


def eval_model(req: schemas.EvalRequest) -> dict:
    loaded, vocab = _load_model_and_vocab(req.model_path, req.vocab_path)
    sessions = read_corpus(req.corpus_path)
    splits = window_dataset(sessions, vocab, seed=req.seed, stride=req.stride)
    dataset = {
        Split.TRAIN: splits.train,
        Split.VALIDATION: splits.validation,
        Split.TEST: splits.test,
    }[Split(req.split)]
    report = perplexity(
        loaded.params, loaded.config, vocab, dataset, use_qsc=req.use_qsc
    )
    return {
        "split": req.split,
        "perplexity": report.perplexity,
        "token_count": report.token_count,
        "windows": len(dataset.windows),
    }


def perform(req: schemas.PerformRequest, hub: BroadcastHub | None = None) -> dict:
    if req.melody_input == "live":
        raise UsageError(
            "live melody input needs a MIDI device; use --input script "
            "for the simulated performer"
        )
    loaded, vocab = _load_model_and_vocab(req.model_path, req.vocab_path)
    session_config = SessionConfig(
        measures=req.measures,
        tempo_bpm=req.tempo_bpm,
        vis=VisCondition(req.vis),
        bio=BioCondition(req.bio),
        seed=req.seed,
        temperature=req.temperature,
    )
    if req.osc_host is not None and req.osc_port is not None:
        qsc = UdpQscTransport(host=req.osc_host, port=req.osc_port)
    elif req.osc_host is not None or req.osc_port is not None:
        raise UsageError("OSC endpoint needs both a host and a port")
    else:
        qsc = ScriptedQsc()
    sink = CollectorSink()
    clock = WallClock() if req.realtime else SimulatedClock()
    try:
        result = run_session(
            session_config,
            loaded.params,
            loaded.config,
            vocab,
            loaded.calibration,
            qsc_transport=qsc,
            midi_sink=sink,
            hub=hub,
            clock=clock,
        )
    finally:
        qsc.close()
    out: dict = {"summary": result.summary}
    if req.log_path is not None:
        log_file = Path(req.log_path)
        log_file.write_text(result.log_text(), encoding="utf-8")
        manifest = RunManifest(
            command="perform",
            config=req.model_dump(),
            seed=req.seed,
        )
        manifest.add_input(req.model_path)
        manifest.add_output(log_file)
        write_manifest(manifest, log_file)
        out["log_path"] = str(log_file)
    else:
        out["log_lines"] = result.log_lines
    return out


def analyze_flow(req: schemas.AnalyzeFlowRequest) -> dict:
    from ..analysis import condition_summary, load_flow_csv
    from ..analysis.report import flow_report_json, render_flow_report

    responses = load_flow_csv(req.csv_path)
    return {
        "report": render_flow_report(responses),
        "data": flow_report_json(responses),
    }


def analyze_listener(req: schemas.AnalyzeListenerRequest) -> dict:
    from ..analysis import (
        load_listener_csv,
        published_listener_table,
        summarize_listener,
    )
    from ..analysis.report import listener_report_json, render_listener_report

    summary = None
    if req.csv_path is not None:
        summary = summarize_listener(load_listener_csv(req.csv_path))
    published = published_listener_table()
    return {
        "report": render_listener_report(summary, published),
        "data": listener_report_json(summary, published),
    }
