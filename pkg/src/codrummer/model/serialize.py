"""Model file format.

Layout: magic "CDRM", uint32 version, uint32 header length, JSON header
(config, vocabulary hash, calibration, array manifest), then the raw
little-endian float32 arrays concatenated in manifest order.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import DataError
from .config import ModelConfig
from .network import Params, parameter_names
from .training import Calibration

MAGIC = b"CDRM"
FORMAT_VERSION = 1


def _expected_shapes(config: ModelConfig) -> dict[str, tuple[int, ...]]:
    shapes: dict[str, tuple[int, ...]] = {
        "embedding": (config.vocab_size, config.embed_dim),
    }
    c_in = config.embed_dim
    for l in range(config.layers):
        shapes[f"conv{l}.weight"] = (config.kernel_size, c_in, config.hidden_units)
        shapes[f"conv{l}.bias"] = (config.hidden_units,)
        c_in = config.hidden_units
    shapes["head.weight"] = (config.hidden_units, config.vocab_size)
    shapes["head.bias"] = (config.vocab_size,)
    return shapes


@dataclass
class LoadedModel:
    params: Params
    config: ModelConfig
    vocab_hash: str
    calibration: Calibration


def save_model(
    path: str | Path,
    params: Params,
    config: ModelConfig,
    vocab_hash: str,
    calibration: Calibration,
) -> None:
    names = parameter_names(config)
    if set(names) != set(params):
        raise DataError("parameter names do not match the configuration")
    expected = _expected_shapes(config)
    manifest = []
    payload = bytearray()
    for name in names:
        arr = np.ascontiguousarray(params[name], dtype=np.float64)
        if arr.shape != expected[name]:
            raise DataError(
                f"{name}: shape {arr.shape} does not match config {expected[name]}"
            )
        if not np.all(np.isfinite(arr)):
            raise DataError(f"{name}: non-finite values")
        manifest.append({"name": name, "shape": list(arr.shape)})
        payload += arr.astype("<f4").tobytes()
    header = json.dumps(
        {
            "config": config.to_dict(),
            "vocab_hash": vocab_hash,
            "calibration": {"g_lo": calibration.g_lo, "g_hi": calibration.g_hi},
            "arrays": manifest,
        }
    ).encode("utf-8")
    blob = MAGIC + struct.pack("<II", FORMAT_VERSION, len(header)) + header + payload
    Path(path).write_bytes(blob)


def load_model(
    path: str | Path,
    expected_vocab_hash: str | None = None,
) -> LoadedModel:
    data = Path(path).read_bytes()
    if len(data) < 12 or data[:4] != MAGIC:
        raise DataError(f"{path}: not a model file")
    version, header_len = struct.unpack("<II", data[4:12])
    if version != FORMAT_VERSION:
        raise DataError(f"{path}: unsupported format version {version}")
    if len(data) < 12 + header_len:
        raise DataError(f"{path}: truncated header")
    try:
        header = json.loads(data[12:12 + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise DataError(f"{path}: bad header: {exc}") from None

    config = ModelConfig.from_dict(header["config"])
    calibration = Calibration(**header["calibration"])
    vocab_hash = header["vocab_hash"]
    if expected_vocab_hash is not None and vocab_hash != expected_vocab_hash:
        raise DataError(
            f"{path}: model was trained against a different vocabulary "
            f"(hash {vocab_hash[:12]}… != {expected_vocab_hash[:12]}…)"
        )

    expected = _expected_shapes(config)
    manifest = header["arrays"]
    if [m["name"] for m in manifest] != parameter_names(config):
        raise DataError(f"{path}: array manifest does not match configuration")

    params: Params = {}
    pos = 12 + header_len
    for m in manifest:
        name, shape = m["name"], tuple(m["shape"])
        if shape != expected[name]:
            raise DataError(f"{path}: {name} has shape {shape}, expected {expected[name]}")
        nbytes = int(np.prod(shape)) * 4
        chunk = data[pos:pos + nbytes]
        if len(chunk) != nbytes:
            raise DataError(f"{path}: truncated array {name}")
        params[name] = np.frombuffer(chunk, dtype="<f4").reshape(shape).astype(np.float64)
        pos += nbytes
    if pos != len(data):
        raise DataError(f"{path}: {len(data) - pos} trailing bytes")
    return LoadedModel(params=params, config=config, vocab_hash=vocab_hash,
                       calibration=calibration)
