from __future__ import annotations

import json
import time
import warnings
from importlib import resources
from pathlib import Path

import numpy as np
import pytest

from codrummer.corpus.smf import write_midi_file
from codrummer.corpus.vocab import Vocabulary
from codrummer.model.serialize import load_model
from codrummer.netio.frames import frame_from_wire
from codrummer.service import create_app, file_sha256, manifest_path
from conftest import make_demo_events

with warnings.catch_warnings():
    warnings.simplefilter("ignore")
    from fastapi.testclient import TestClient


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    """MIDI sessions on disk plus the artifacts one pipeline pass produces."""
    root = tmp_path_factory.mktemp("service")
    midi_dir = root / "midi"
    midi_dir.mkdir()
    for s in range(2):
        write_midi_file(midi_dir / f"session{s}.mid", make_demo_events(seed=s),
                        tempo_bpm=120.0)
    # skin-conductance sidecar for session0: slow drift, 1 Hz, covering the
    # warmup window before t=0 and the whole recording
    rng = np.random.default_rng(9)
    ts = np.arange(-180.0, 26.0, 1.0)
    values = 2.0 + np.cumsum(rng.normal(0.0, 0.05, size=ts.size))
    lines = [f"{t:.1f},{v:.6f}" for t, v in zip(ts, values)]
    (midi_dir / "session0.qsc.csv").write_text("\n".join(lines) + "\n")
    return {
        "root": root,
        "midi_dir": midi_dir,
        "corpus": root / "corpus.txt",
        "vocab": root / "vocab.json",
        "model": root / "model.cdrm",
    }


@pytest.fixture(scope="module")
def client(workspace):
    with TestClient(create_app()) as c:
        yield c


@pytest.fixture(scope="module")
def pipeline(client, workspace):
    """Run corpus build -> vocab -> train once for the whole module."""
    build = client.post("/corpus/build", json={
        "midi_dir": str(workspace["midi_dir"]),
        "out_path": str(workspace["corpus"]),
    })
    assert build.status_code == 200, build.text
    vocab = client.post("/corpus/vocab", json={
        "corpus_path": str(workspace["corpus"]),
        "out_path": str(workspace["vocab"]),
        "min_count": 2,
    })
    assert vocab.status_code == 200, vocab.text
    train = client.post("/train", json={
        "corpus_path": str(workspace["corpus"]),
        "out_path": str(workspace["model"]),
        "vocab_path": str(workspace["vocab"]),
        "seed": 0,
        "stride": 4,
        "batch_size": 4,
        "max_epochs": 2,
        "embed_dim": 8,
        "hidden_units": 16,
    })
    assert train.status_code == 200, train.text
    return {"build": build.json(), "vocab": vocab.json(), "train": train.json()}


def test_health(client):
    body = client.get("/health").json()
    assert body["status"] == "ok"
    assert "version" in body


def test_corpus_build_writes_corpus_and_manifest(pipeline, workspace):
    assert pipeline["build"]["sessions"] == 2
    assert pipeline["build"]["measures"] > 0
    assert workspace["corpus"].is_file()
    manifest = json.loads(manifest_path(workspace["corpus"]).read_text())
    assert manifest["command"] == "corpus build"
    midi_inputs = [p for p in manifest["inputs"] if p.endswith(".mid")]
    assert len(midi_inputs) == 2
    for path, digest in manifest["inputs"].items():
        assert file_sha256(path) == digest
    assert manifest["outputs"][str(workspace["corpus"])] == \
        file_sha256(workspace["corpus"])
    assert manifest["created_utc"]


def test_corpus_stats(pipeline, client, workspace):
    stats = client.post("/corpus/stats", json={
        "corpus_path": str(workspace["corpus"]), "min_count": 2,
    })
    assert stats.status_code == 200
    body = stats.json()
    assert body["sessions"] == 2
    assert body["retained"] + body["pruned"] == body["unique_tokens"]
    proportions = body["qsc_proportions"]
    assert set(proportions) == {"Low", "Med", "High"}
    assert sum(proportions.values()) == pytest.approx(1.0)


def test_vocab_build_artifact_round_trips(pipeline, workspace):
    on_disk = Vocabulary.from_json(workspace["vocab"].read_text())
    assert on_disk.vocab_hash == pipeline["vocab"]["vocab_hash"]
    assert on_disk.size == pipeline["vocab"]["size"]
    assert manifest_path(workspace["vocab"]).is_file()


def test_train_writes_model_and_vocab_sidecar(pipeline, workspace):
    body = pipeline["train"]
    assert Path(body["out_path"]) == workspace["model"]
    loaded = load_model(workspace["model"],
                        expected_vocab_hash=body["vocab_hash"])
    assert loaded.config.embed_dim == 8
    assert loaded.config.hidden_units == 16
    sidecar = workspace["root"] / "model.vocab.json"
    assert Path(body["vocab_path"]) == sidecar
    assert Vocabulary.from_json(sidecar.read_text()).vocab_hash == body["vocab_hash"]
    assert body["epochs_run"] == 2
    assert 1 <= body["best_epoch"] <= 2
    assert body["windows"]["train"] > 0
    manifest = json.loads(manifest_path(workspace["model"]).read_text())
    assert manifest["seed"] == 0
    assert str(workspace["corpus"]) in manifest["inputs"]


def test_eval_splits(pipeline, client, workspace):
    ok = client.post("/eval", json={
        "model_path": str(workspace["model"]),
        "corpus_path": str(workspace["corpus"]),
        "split": "train",
        "stride": 4,
    })
    assert ok.status_code == 200
    assert ok.json()["perplexity"] > 1.0
    assert ok.json()["windows"] > 0

    bad_split = client.post("/eval", json={
        "model_path": str(workspace["model"]),
        "corpus_path": str(workspace["corpus"]),
        "split": "holdout",
    })
    assert bad_split.status_code == 400
    assert bad_split.json()["kind"] == "usage"


def test_perform_simulated(pipeline, client, workspace):
    resp = client.post("/perform", json={
        "model_path": str(workspace["model"]),
        "measures": 3,
        "seed": 5,
    })
    assert resp.status_code == 200, resp.text
    body = resp.json()
    assert body["summary"]["measures_generated"] == 3
    assert body["summary"]["deadline_misses"] == 0
    assert "log_lines" in body
    first = json.loads(body["log_lines"][0])
    assert first["type"] == "session_start"


def test_perform_log_file_and_determinism(pipeline, client, workspace, tmp_path):
    logs = []
    for name in ("a.jsonl", "b.jsonl"):
        log_path = tmp_path / name
        resp = client.post("/perform", json={
            "model_path": str(workspace["model"]),
            "measures": 3,
            "seed": 5,
            "log_path": str(log_path),
        })
        assert resp.status_code == 200, resp.text
        assert resp.json()["log_path"] == str(log_path)
        logs.append(log_path.read_bytes())
    assert logs[0] == logs[1]
    manifest = json.loads(manifest_path(tmp_path / "a.jsonl").read_text())
    assert manifest["command"] == "perform"
    assert str(workspace["model"]) in manifest["inputs"]


def test_perform_rejects_live_input(pipeline, client, workspace):
    resp = client.post("/perform", json={
        "model_path": str(workspace["model"]),
        "melody_input": "live",
    })
    assert resp.status_code == 400
    body = resp.json()
    assert body["kind"] == "usage"
    assert "MIDI device" in body["message"]


def test_perform_osc_needs_host_and_port(pipeline, client, workspace):
    resp = client.post("/perform", json={
        "model_path": str(workspace["model"]),
        "osc_host": "127.0.0.1",
    })
    assert resp.status_code == 400
    assert resp.json()["kind"] == "usage"


def test_error_kinds_map_to_status_codes(client, workspace):
    # missing file -> data error
    resp = client.post("/corpus/stats", json={"corpus_path": "/no/such/corpus.txt"})
    assert resp.status_code == 422
    assert resp.json()["kind"] == "data"
    # schema violation -> usage error
    resp = client.post("/corpus/build", json={"midi_dir": "x"})
    assert resp.status_code == 400
    assert resp.json()["kind"] == "usage"
    # bad enum value in the body -> usage error
    resp = client.post("/perform", json={"model_path": "m", "vis": "loud"})
    assert resp.status_code == 400
    assert resp.json()["kind"] == "usage"
    # missing analysis inputs -> data errors
    resp = client.post("/analyze/flow", json={"csv_path": "/no/flow.csv"})
    assert resp.status_code == 422
    assert resp.json()["kind"] == "data"
    resp = client.post("/analyze/listener", json={"csv_path": "/no/listener.csv"})
    assert resp.status_code == 422


def test_analyze_endpoints(client):
    flow_csv = resources.files("codrummer.analysis") / "fixtures" / "flow_sessions.csv"
    resp = client.post("/analyze/flow", json={"csv_path": str(flow_csv)})
    assert resp.status_code == 200
    body = resp.json()
    assert "3.57" in body["report"] and "4.00" in body["report"]
    assert body["data"]["conditions"]["truthful"]["n"] == 7

    resp = client.post("/analyze/listener", json={})
    assert resp.status_code == 200
    body = resp.json()
    assert body["data"]["published"]["totals"] == {"interesting": 53, "balance": 55}
    assert "computed" not in body["data"]


def test_vocab_hash_mismatch_is_a_data_error(pipeline, client, workspace, tmp_path):
    # a vocabulary built with a different cutoff no longer matches the model
    other_vocab = tmp_path / "other_vocab.json"
    resp = client.post("/corpus/vocab", json={
        "corpus_path": str(workspace["corpus"]),
        "out_path": str(other_vocab),
        "min_count": 4,
    })
    assert resp.status_code == 200
    resp = client.post("/eval", json={
        "model_path": str(workspace["model"]),
        "corpus_path": str(workspace["corpus"]),
        "vocab_path": str(other_vocab),
        "split": "train",
    })
    assert resp.status_code == 422
    assert "different vocabulary" in resp.json()["message"]


def test_background_perform_and_status(pipeline, client, workspace):
    resp = client.post("/perform/start", json={
        "model_path": str(workspace["model"]),
        "measures": 2,
        "seed": 1,
    })
    assert resp.status_code == 200
    run_id = resp.json()["run_id"]
    for _ in range(100):
        status = client.get(f"/perform/status/{run_id}").json()
        if status["status"] != "running":
            break
        time.sleep(0.05)
    assert status["status"] == "done", status
    assert status["result"]["summary"]["measures_generated"] == 2

    missing = client.get("/perform/status/ffffffffffff")
    assert missing.status_code == 422
    assert missing.json()["kind"] == "data"


def test_background_perform_surfaces_errors(client):
    resp = client.post("/perform/start", json={
        "model_path": "/no/such/model.cdrm",
        "measures": 1,
    })
    run_id = resp.json()["run_id"]
    for _ in range(100):
        status = client.get(f"/perform/status/{run_id}").json()
        if status["status"] != "running":
            break
        time.sleep(0.05)
    assert status["status"] == "error"
    assert status["kind"] == "data"
    assert "not found" in status["message"]


def test_websocket_streams_frames_during_realtime_perform(
        pipeline, client, workspace):
    with client.websocket_connect("/ws/confidence") as ws:
        resp = client.post("/perform/start", json={
            "model_path": str(workspace["model"]),
            "measures": 2,
            "tempo_bpm": 240.0,
            "seed": 2,
            "realtime": True,
        })
        assert resp.status_code == 200
        run_id = resp.json()["run_id"]

        first = frame_from_wire(ws.receive_text())
        # inbound garbage must not kill the stream
        ws.send_text("not a frame at all")
        second = frame_from_wire(ws.receive_text())
        assert second["t_ms"] > first["t_ms"]
        assert first["mode"] == "truthful"
        assert first["tempo"] == 240.0

    for _ in range(200):
        status = client.get(f"/perform/status/{run_id}").json()
        if status["status"] != "running":
            break
        time.sleep(0.05)
    assert status["status"] == "done", status


def test_index_placeholder_and_static_bundle(tmp_path):
    with TestClient(create_app()) as bundled:
        page = bundled.get("/")
        assert page.status_code == 200
        assert '<canvas id="face">' in page.text

    with TestClient(create_app(static_dir=tmp_path / "nowhere")) as bare:
        page = bare.get("/")
        assert page.status_code == 200
        assert "visualizer bundle is not installed" in page.text

    static = tmp_path / "dist"
    static.mkdir()
    (static / "index.html").write_text("<!DOCTYPE html><title>viz</title>ready")
    (static / "app.js").write_text("console.log('hi')")
    with TestClient(create_app(static_dir=static)) as served:
        assert "ready" in served.get("/").text
        assert served.get("/static/app.js").status_code == 200
        assert served.get("/static/missing.js").status_code == 404
        secret = tmp_path / "secret.txt"
        secret.write_text("private")
        traversal = served.get("/static/%2e%2e/secret.txt")
        assert traversal.status_code == 404
