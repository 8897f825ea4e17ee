"""Request and response bodies for the HTTP service.

Paths are host paths: the service is a local orchestrator, so artifacts are
exchanged by filename rather than uploaded.
"""

from __future__ import annotations

from pydantic import BaseModel, Field

from ..corpus.dataset import DEFAULT_STRIDE
from ..corpus.vocab import DEFAULT_MIN_COUNT
from ..model.training import DEFAULT_BATCH_SIZE, DEFAULT_MAX_EPOCHS, DEFAULT_PATIENCE


class CorpusBuildRequest(BaseModel):
    midi_dir: str
    out_path: str
    tempo_bpm: float = 120.0
    style: str = "Swing"
    technique: str = "lead"


class CorpusStatsRequest(BaseModel):
    corpus_path: str
    min_count: int = DEFAULT_MIN_COUNT


class VocabBuildRequest(BaseModel):
    corpus_path: str
    out_path: str
    min_count: int = DEFAULT_MIN_COUNT


class TrainRequest(BaseModel):
    corpus_path: str
    out_path: str
    vocab_path: str | None = None
    min_count: int = DEFAULT_MIN_COUNT
    seed: int = 0
    stride: int = DEFAULT_STRIDE
    batch_size: int = DEFAULT_BATCH_SIZE
    max_epochs: int = DEFAULT_MAX_EPOCHS
    patience: int | None = DEFAULT_PATIENCE
    embed_dim: int = 20
    hidden_units: int = 192
    use_qsc: bool = True


class EvalRequest(BaseModel):
    model_path: str
    corpus_path: str
    vocab_path: str | None = None
    split: str = Field(default="test", pattern="^(train|validation|test)$")
    seed: int = 0
    stride: int = DEFAULT_STRIDE
    use_qsc: bool = True


class PerformRequest(BaseModel):
    model_path: str
    vocab_path: str | None = None
    log_path: str | None = None
    measures: int = 90  # three minutes of 4/4 at 120 bpm
    tempo_bpm: float = 120.0
    vis: str = Field(default="truthful", pattern="^(truthful|deceptive|absent)$")
    bio: str = Field(default="truthful", pattern="^(truthful|deceptive)$")
    melody_input: str = Field(default="script", pattern="^(script|live)$")
    seed: int = 0
    temperature: float = 1.0
    realtime: bool = False
    osc_host: str | None = None
    osc_port: int | None = None


class AnalyzeFlowRequest(BaseModel):
    csv_path: str


class AnalyzeListenerRequest(BaseModel):
    csv_path: str | None = None


class ErrorBody(BaseModel):
    kind: str  # "usage" | "data" | "abort"
    message: str
