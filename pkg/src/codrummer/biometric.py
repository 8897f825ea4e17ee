"""Skin-conductance intake: baseline calibration, normalized delta, 3-level quantization.

The sensor reports microSiemens at a nominal 4 Hz. Absolute levels vary by
person and by how tightly the band sits, so the engine only ever consumes
the *change* between consecutive samples, normalized by a per-session
baseline standard deviation, then quantized to High/Med/Low.
"""

from __future__ import annotations

import enum
import logging
import math
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .errors import DataError

log = logging.getLogger(__name__)

SAMPLE_RATE_HZ = 4.0
HOLD_GAP_S = 0.5
STALE_GAP_S = 5.0


class QscLevel(enum.IntEnum):
    """Quantized conductance-change level, ordered Low < Med < High."""

    LOW = 0
    MED = 1
    HIGH = 2

    @property
    def wire_name(self) -> str:
        return {QscLevel.LOW: "Low", QscLevel.MED: "Med", QscLevel.HIGH: "High"}[self]

    @classmethod
    def from_name(cls, name: str) -> "QscLevel":
        try:
            return {"Low": cls.LOW, "Med": cls.MED, "High": cls.HIGH}[name]
        except KeyError:
            raise DataError(f"unknown conductance level {name!r}") from None


@dataclass(frozen=True)
class SCSample:
    """One sensor reading: seconds since stream start, microSiemens."""

    t_s: float
    microsiemens: float

    def __post_init__(self) -> None:
        if self.microsiemens < 0:
            raise DataError(f"negative conductance {self.microsiemens} at t={self.t_s}")


@dataclass(frozen=True)
class Baseline:
    """Calibration result: population std-dev over the window before session start."""

    sigma: float
    window_s: float = 120.0
    warmup_s: float = 60.0


class CalibrationError(DataError):
    pass


class DegenerateBaselineError(DataError):
    """The calibration window was flat; the normalized delta is undefined."""


def baseline_sigma(
    samples: Sequence[SCSample],
    session_start_s: float | None = None,
    window_s: float = 120.0,
    warmup_s: float = 60.0,
) -> Baseline:
    """Population standard deviation of the final `window_s` before session start.

    The stream must span at least `warmup_s + window_s` so that the band-fitting
    transient never leaks into the window. A flat window raises
    DegenerateBaselineError rather than producing a divide-by-zero later.
    """
    if not samples:
        raise CalibrationError("no samples to calibrate from")
    start = samples[-1].t_s if session_start_s is None else session_start_s
    span = start - samples[0].t_s
    if span < warmup_s + window_s:
        raise CalibrationError(
            f"calibration needs {warmup_s + window_s:.0f} s of signal, got {span:.1f} s"
        )
    window = [s.microsiemens for s in samples if start - window_s <= s.t_s < start]
    if len(window) < 2:
        raise CalibrationError("calibration window holds fewer than 2 samples")
    mean = sum(window) / len(window)
    var = sum((x - mean) ** 2 for x in window) / len(window)
    sigma = math.sqrt(var)
    if sigma < 1e-9:
        raise DegenerateBaselineError("flat conductance over the calibration window")
    return Baseline(sigma=sigma, window_s=window_s, warmup_s=warmup_s)


def dsc(sc_now: float, sc_prev: float, baseline: Baseline) -> float:
    """Change in skin conductance between two samples, in baseline sigmas."""
    if baseline.sigma < 1e-9:
        raise DegenerateBaselineError("baseline sigma is zero; refusing to divide")
    return (sc_now - sc_prev) / baseline.sigma


def quantize_dsc(d: float) -> QscLevel:
    """High for d >= 1, Low for d <= -1, Med strictly between."""
    if math.isnan(d):
        raise DataError("conductance delta is NaN")
    if d >= 1.0:
        return QscLevel.HIGH
    if d <= -1.0:
        return QscLevel.LOW
    return QscLevel.MED


class StreamAccumulator:
    """Single-writer stream of samples with lock-cheap reads.

    The sensor feed appends; the engine reads the latest pair at a measure
    boundary. Reads copy at most two samples under the lock, so they stay
    well under the 1 ms budget of the real-time loop.
    """

    def __init__(self) -> None:
        self._samples: list[SCSample] = []
        self._lock = threading.Lock()

    def append(self, sample: SCSample) -> None:
        with self._lock:
            if self._samples and sample.t_s <= self._samples[-1].t_s:
                raise DataError(
                    f"non-increasing sample time {sample.t_s} after {self._samples[-1].t_s}"
                )
            self._samples.append(sample)

    def extend(self, samples: Iterable[SCSample]) -> None:
        for s in samples:
            self.append(s)

    def __len__(self) -> int:
        with self._lock:
            return len(self._samples)

    def snapshot(self) -> list[SCSample]:
        with self._lock:
            return list(self._samples)

    def latest_pair_at(self, t_s: float) -> tuple[SCSample, SCSample] | None:
        """The two most recent samples at or before t_s, oldest first."""
        with self._lock:
            # Scan from the end; streams are appended in time order.
            idx = len(self._samples) - 1
            while idx >= 0 and self._samples[idx].t_s > t_s:
                idx -= 1
            if idx < 1:
                return None
            return self._samples[idx - 1], self._samples[idx]


def sample_at_measure_start(
    stream: StreamAccumulator, t_measure_start_s: float, baseline: Baseline
) -> QscLevel:
    """Level at a measure boundary: delta of the latest sample pair, quantized.

    Degenerate input (fewer than two samples yet) falls back to Med with a
    warning; a running session must never halt on a sensor hiccup.
    """
    pair = stream.latest_pair_at(t_measure_start_s)
    if pair is None:
        log.warning("conductance stream has <2 samples at t=%.2f; holding Med", t_measure_start_s)
        return QscLevel.MED
    prev, now = pair
    gap = t_measure_start_s - now.t_s
    if gap > STALE_GAP_S:
        log.warning("conductance stream stale by %.1f s at t=%.2f", gap, t_measure_start_s)
    elif gap > HOLD_GAP_S:
        log.warning("conductance sample gap %.2f s at t=%.2f; holding last value", gap, t_measure_start_s)
    return quantize_dsc(dsc(now.microsiemens, prev.microsiemens, baseline))


def load_sc_csv(path: str | Path) -> list[SCSample]:
    """Read "t_s,microsiemens" lines; '#' comments and blank lines are skipped."""
    samples: list[SCSample] = []
    try:
        text = Path(path).read_text(encoding="utf-8")
    except FileNotFoundError:
        raise DataError(f"{path}: sample file not found") from None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise DataError(f"{path}:{lineno}: expected 't_s,microsiemens', got {raw!r}")
        try:
            samples.append(SCSample(t_s=float(parts[0]), microsiemens=float(parts[1])))
        except ValueError as exc:
            raise DataError(f"{path}:{lineno}: {exc}") from None
    if any(b.t_s <= a.t_s for a, b in zip(samples, samples[1:])):
        raise DataError(f"{path}: sample times are not strictly increasing")
    return samples


@dataclass
class SimulatedSensor:
    """Deterministic stand-in for the wristband, for headless runs and tests.

    Produces a seeded Gaussian random walk at the nominal rate, including a
    calibration stretch before t=0 so a baseline can always be computed.
    Scripted streams can be supplied directly via `samples`.
    """

    seed: int = 0
    step_sigma_us: float = 0.05
    start_us: float = 2.0
    rate_hz: float = SAMPLE_RATE_HZ
    samples: list[SCSample] = field(default_factory=list)

    def generate(self, duration_s: float, lead_in_s: float = 180.0) -> list[SCSample]:
        import numpy as np

        rng = np.random.default_rng(self.seed)
        dt = 1.0 / self.rate_hz
        n = int(round((lead_in_s + duration_s) * self.rate_hz)) + 1
        level = self.start_us
        out: list[SCSample] = []
        for i in range(n):
            t = -lead_in_s + i * dt
            level = max(0.0, level + self.step_sigma_us * float(rng.standard_normal()))
            out.append(SCSample(t_s=t, microsiemens=level))
        self.samples = out
        return out


class QscService:
    """Answers "level now?" queries from a stream plus its baseline.

    This is the biometric side of the request/response exchange; the
    transport binding (OSC over UDP, or in-process loopback) lives in netio.
    """

    def __init__(self, stream: StreamAccumulator, baseline: Baseline) -> None:
        self.stream = stream
        self.baseline = baseline

    @classmethod
    def from_samples(cls, samples: Sequence[SCSample], session_start_s: float = 0.0) -> "QscService":
        baseline = baseline_sigma(samples, session_start_s=session_start_s)
        stream = StreamAccumulator()
        stream.extend(samples)
        return cls(stream, baseline)

    def level_at(self, t_s: float) -> QscLevel:
        return sample_at_measure_start(self.stream, t_s, self.baseline)
