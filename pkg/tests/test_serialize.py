from __future__ import annotations

import json
import struct

import numpy as np
import pytest

from codrummer.errors import DataError
from codrummer.model.config import tiny_config
from codrummer.model.network import init_parameters
from codrummer.model.serialize import FORMAT_VERSION, MAGIC, load_model, save_model
from codrummer.model.training import Calibration


@pytest.fixture
def saved(tmp_path):
    config = tiny_config(vocab_size=12, seed=4)
    params = init_parameters(config)
    calibration = Calibration(g_lo=0.05, g_hi=0.8)
    path = tmp_path / "model.cdrm"
    save_model(path, params, config, vocab_hash="deadbeef" * 8,
               calibration=calibration)
    return path, params, config, calibration


def test_round_trip_is_exact(saved):
    path, params, config, calibration = saved
    loaded = load_model(path)
    assert loaded.config == config
    assert loaded.vocab_hash == "deadbeef" * 8
    assert loaded.calibration == calibration
    assert set(loaded.params) == set(params)
    for name in params:
        # parameters are kept float32-representable, so the f32 payload
        # round-trips without loss
        assert np.array_equal(loaded.params[name], params[name]), name


def test_vocab_hash_checked_on_load(saved):
    path, *_ = saved
    load_model(path, expected_vocab_hash="deadbeef" * 8)
    with pytest.raises(DataError, match="different vocabulary"):
        load_model(path, expected_vocab_hash="cafef00d" * 8)


def test_magic_and_version_checked(saved, tmp_path):
    path, *_ = saved
    data = path.read_bytes()
    assert data[:4] == MAGIC

    bad_magic = tmp_path / "bad_magic.cdrm"
    bad_magic.write_bytes(b"XXXX" + data[4:])
    with pytest.raises(DataError, match="not a model file"):
        load_model(bad_magic)

    bad_version = tmp_path / "bad_version.cdrm"
    bad_version.write_bytes(MAGIC + struct.pack("<II", FORMAT_VERSION + 1, 0) + data[12:])
    with pytest.raises(DataError, match="version"):
        load_model(bad_version)


def test_truncation_detected(saved, tmp_path):
    path, *_ = saved
    data = path.read_bytes()

    short = tmp_path / "short.cdrm"
    short.write_bytes(data[:8])
    with pytest.raises(DataError):
        load_model(short)

    cut_header = tmp_path / "cut_header.cdrm"
    cut_header.write_bytes(data[:20])
    with pytest.raises(DataError, match="truncated"):
        load_model(cut_header)

    cut_payload = tmp_path / "cut_payload.cdrm"
    cut_payload.write_bytes(data[:-5])
    with pytest.raises(DataError, match="truncated array"):
        load_model(cut_payload)

    padded = tmp_path / "padded.cdrm"
    padded.write_bytes(data + b"\x00\x00\x00")
    with pytest.raises(DataError, match="trailing"):
        load_model(padded)


def test_corrupt_header_detected(saved, tmp_path):
    path, *_ = saved
    data = path.read_bytes()
    header_len = struct.unpack("<II", data[4:12])[1]
    corrupt = tmp_path / "corrupt.cdrm"
    corrupt.write_bytes(data[:12] + b"{" * header_len + data[12 + header_len:])
    with pytest.raises(DataError, match="bad header"):
        load_model(corrupt)


def test_manifest_mismatch_detected(saved, tmp_path):
    path, *_ = saved
    data = path.read_bytes()
    header_len = struct.unpack("<II", data[4:12])[1]
    header = json.loads(data[12:12 + header_len])
    header["arrays"] = header["arrays"][::-1]
    new_header = json.dumps(header).encode()
    mangled = tmp_path / "mangled.cdrm"
    mangled.write_bytes(MAGIC + struct.pack("<II", FORMAT_VERSION, len(new_header))
                        + new_header + data[12 + header_len:])
    with pytest.raises(DataError, match="manifest"):
        load_model(mangled)


def test_save_validates_parameters(tmp_path):
    config = tiny_config(vocab_size=12)
    params = init_parameters(config)
    calibration = Calibration(g_lo=0.1, g_hi=0.9)

    missing = dict(params)
    del missing["head.bias"]
    with pytest.raises(DataError, match="parameter names"):
        save_model(tmp_path / "a.cdrm", missing, config, "h", calibration)

    wrong_shape = dict(params)
    wrong_shape["head.bias"] = np.zeros(3)
    with pytest.raises(DataError, match="shape"):
        save_model(tmp_path / "b.cdrm", wrong_shape, config, "h", calibration)

    poisoned = dict(params)
    poisoned["head.bias"] = params["head.bias"].copy()
    poisoned["head.bias"][0] = np.nan
    with pytest.raises(DataError, match="non-finite"):
        save_model(tmp_path / "c.cdrm", poisoned, config, "h", calibration)
