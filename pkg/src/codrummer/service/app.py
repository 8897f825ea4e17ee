"""HTTP face of the drummer: one endpoint per pipeline stage plus a
WebSocket that streams confidence frames to the visualizer.

Blocking pipeline calls run in the threadpool (`def` endpoints); a realtime
performance can instead be launched in the background and polled, so the
WebSocket feed plays out at musical speed.
"""

from __future__ import annotations

import asyncio
import threading
import uuid
from pathlib import Path

from fastapi import FastAPI, Request, WebSocket, WebSocketDisconnect
from fastapi.exceptions import RequestValidationError
from fastapi.responses import FileResponse, HTMLResponse, JSONResponse

from .. import __version__
from ..errors import CodrummerError, DataError, RuntimeAbort, UsageError
from ..netio import BroadcastHub
from . import ops, schemas

WS_POLL_S = 0.05

_PLACEHOLDER_PAGE = """<!DOCTYPE html>
<html><head><title>codrummer</title></head>
<body>
<h1>codrummer service</h1>
<p>The visualizer bundle is not installed. Build it with
<code>npm run build</code> in <code>frontend/</code> and copy
<code>frontend/dist/</code> to <code>src/codrummer/service/static/</code>,
or pass <code>--static</code> to <code>codrummer serve</code>.</p>
<p>Confidence frames stream at <code>/ws/confidence</code>.</p>
</body></html>
"""


def _error_kind(exc: CodrummerError) -> tuple[int, str]:
    if isinstance(exc, RuntimeAbort):
        return 500, "abort"
    if isinstance(exc, DataError):
        return 422, "data"
    return 400, "usage"


class _RunRegistry:
    """Background performance runs, keyed by id."""

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._runs: dict[str, dict] = {}

    def start(self, target, *args) -> str:
        run_id = uuid.uuid4().hex[:12]
        with self._lock:
            self._runs[run_id] = {"status": "running"}

        def runner() -> None:
            try:
                result = target(*args)
                update = {"status": "done", "result": result}
            except CodrummerError as exc:
                _, kind = _error_kind(exc)
                update = {"status": "error", "kind": kind, "message": str(exc)}
            except Exception as exc:  # noqa: BLE001 - surfaced via status
                update = {"status": "error", "kind": "abort", "message": str(exc)}
            with self._lock:
                self._runs[run_id] = update

        threading.Thread(target=runner, name=f"perform-{run_id}", daemon=True).start()
        return run_id

    def status(self, run_id: str) -> dict | None:
        with self._lock:
            entry = self._runs.get(run_id)
            return dict(entry) if entry is not None else None


def create_app(static_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="codrummer", version=__version__)
    hub = BroadcastHub()
    runs = _RunRegistry()
    app.state.hub = hub
    static_root = Path(static_dir) if static_dir else Path(__file__).parent / "static"

    @app.exception_handler(CodrummerError)
    async def _domain_error(request: Request, exc: CodrummerError) -> JSONResponse:
        status, kind = _error_kind(exc)
        return JSONResponse(
            status_code=status, content={"kind": kind, "message": str(exc)}
        )

    @app.exception_handler(RequestValidationError)
    async def _validation_error(
        request: Request, exc: RequestValidationError
    ) -> JSONResponse:
        return JSONResponse(
            status_code=400, content={"kind": "usage", "message": str(exc.errors())}
        )

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok", "version": __version__}

    @app.post("/corpus/build")
    def corpus_build(req: schemas.CorpusBuildRequest) -> dict:
        return ops.corpus_build(req)

    @app.post("/corpus/stats")
    def corpus_stats(req: schemas.CorpusStatsRequest) -> dict:
        return ops.corpus_stats(req)

    @app.post("/corpus/vocab")
    def vocab_build(req: schemas.VocabBuildRequest) -> dict:
        return ops.vocab_build(req)

    @app.post("/train")
    def train(req: schemas.TrainRequest) -> dict:
        return ops.train_model(req)

    @app.post("/eval")
    def eval_model(req: schemas.EvalRequest) -> dict:
        return ops.eval_model(req)

    @app.post("/perform")
    def perform(req: schemas.PerformRequest) -> dict:
        return ops.perform(req, hub=hub)

    @app.post("/perform/start")
    def perform_start(req: schemas.PerformRequest) -> dict:
        run_id = runs.start(ops.perform, req, hub)
        return {"run_id": run_id}

    @app.get("/perform/status/{run_id}")
    def perform_status(run_id: str) -> dict:
        entry = runs.status(run_id)
        if entry is None:
            raise DataError(f"unknown run id {run_id}")
        return entry

    @app.post("/analyze/flow")
    def analyze_flow(req: schemas.AnalyzeFlowRequest) -> dict:
        return ops.analyze_flow(req)

    @app.post("/analyze/listener")
    def analyze_listener(req: schemas.AnalyzeListenerRequest) -> dict:
        return ops.analyze_listener(req)

    @app.websocket("/ws/confidence")
    async def ws_confidence(ws: WebSocket) -> None:
        await ws.accept()
        client = hub.register()
        receiver = asyncio.ensure_future(ws.receive())
        try:
            while True:
                for frame in hub.drain(client):
                    await ws.send_text(frame)
                if receiver.done():
                    message = receiver.result()
                    if message.get("type") == "websocket.disconnect":
                        break
                    receiver = asyncio.ensure_future(ws.receive())
                await asyncio.sleep(WS_POLL_S)
        except WebSocketDisconnect:
            pass
        finally:
            receiver.cancel()
            hub.unregister(client)

    @app.get("/", response_class=HTMLResponse)
    def index():
        page = static_root / "index.html"
        if page.is_file():
            return FileResponse(page)
        return HTMLResponse(_PLACEHOLDER_PAGE)

    @app.get("/static/{name:path}")
    def static_file(name: str):
        target = (static_root / name).resolve()
        if not target.is_file() or static_root.resolve() not in target.parents:
            return JSONResponse(
                status_code=404, content={"kind": "data", "message": f"no such file {name}"}
            )
        return FileResponse(target)

    return app
