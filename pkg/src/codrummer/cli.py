"""Command line for the drummer pipeline.

Thin client of the HTTP service: every subcommand builds a request body,
sends it to the service, and formats the JSON reply. By default the service
runs in-process; --server (or CODRUMMER_SERVER) points at a remote one
instead, so the same commands drive either.

Exit codes: 0 success, 1 usage, 2 data error, 3 runtime abort.
"""

from __future__ import annotations

import json
import sys
from typing import Sequence

import click

from .corpus.dataset import DEFAULT_STRIDE
from .corpus.vocab import DEFAULT_MIN_COUNT
from .errors import CodrummerError, DataError, RuntimeAbort, UsageError
from .model.training import DEFAULT_BATCH_SIZE, DEFAULT_MAX_EPOCHS, DEFAULT_PATIENCE

_KIND_ERRORS = {"usage": UsageError, "data": DataError, "abort": RuntimeAbort}


class _ServiceClient:
    """POST/GET against the in-process app or a remote server."""

    def __init__(self, server: str | None) -> None:
        if server:
            import httpx

            self._client = httpx.Client(base_url=server, timeout=600.0)
        else:
            import warnings

            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                from fastapi.testclient import TestClient

            from .service import create_app

            self._client = TestClient(create_app())

    def call(self, method: str, path: str, body: dict | None = None) -> dict:
        response = self._client.request(method, path, json=body)
        try:
            payload = response.json()
        except ValueError:
            raise RuntimeAbort(
                f"{path}: service returned {response.status_code} with no JSON body"
            ) from None
        if response.status_code != 200:
            kind = payload.get("kind", "abort")
            message = payload.get("message", str(payload))
            raise _KIND_ERRORS.get(kind, RuntimeAbort)(message)
        return payload

    def close(self) -> None:
        self._client.close()


def _client(ctx: click.Context) -> _ServiceClient:
    return ctx.obj


def _emit(payload: dict) -> None:
    click.echo(json.dumps(payload, indent=2))


@click.group()
@click.option(
    "--server",
    envvar="CODRUMMER_SERVER",
    default=None,
    help="Base URL of a running service; default runs the service in-process.",
)
@click.pass_context
def cli(ctx: click.Context, server: str | None) -> None:
    """Collaborative drummer: corpus building, training, performance, analysis."""
    ctx.obj = _ServiceClient(server)
    ctx.call_on_close(ctx.obj.close)


@cli.group()
def corpus() -> None:
    """Corpus construction and inspection."""


@corpus.command("build")
@click.argument("midi_dir", type=click.Path(exists=True, file_okay=False))
@click.argument("out_path", type=click.Path(dir_okay=False, writable=True))
@click.option("--tempo", "tempo_bpm", default=120.0, show_default=True)
@click.option("--style", default="Swing", show_default=True)
@click.option("--technique", default="lead", show_default=True)
@click.pass_context
def corpus_build(ctx, midi_dir, out_path, tempo_bpm, style, technique) -> None:
    """Quantize a folder of MIDI files into a corpus file."""
    _emit(
        _client(ctx).call(
            "POST",
            "/corpus/build",
            {
                "midi_dir": midi_dir,
                "out_path": out_path,
                "tempo_bpm": tempo_bpm,
                "style": style,
                "technique": technique,
            },
        )
    )


@corpus.command("stats")
@click.argument("corpus_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--min-count", default=DEFAULT_MIN_COUNT, show_default=True)
@click.pass_context
def corpus_stats(ctx, corpus_path, min_count) -> None:
    """Token counts, prune report, and QSC level proportions."""
    _emit(
        _client(ctx).call(
            "POST",
            "/corpus/stats",
            {"corpus_path": corpus_path, "min_count": min_count},
        )
    )


@corpus.command("vocab")
@click.argument("corpus_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("out_path", type=click.Path(dir_okay=False, writable=True))
@click.option("--min-count", default=DEFAULT_MIN_COUNT, show_default=True)
@click.pass_context
def corpus_vocab(ctx, corpus_path, out_path, min_count) -> None:
    """Build and write the token vocabulary."""
    _emit(
        _client(ctx).call(
            "POST",
            "/corpus/vocab",
            {"corpus_path": corpus_path, "out_path": out_path, "min_count": min_count},
        )
    )


@cli.command()
@click.argument("corpus_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("out_path", type=click.Path(dir_okay=False, writable=True))
@click.option("--vocab", "vocab_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--min-count", default=DEFAULT_MIN_COUNT, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--stride", default=DEFAULT_STRIDE, show_default=True)
@click.option("--batch-size", default=DEFAULT_BATCH_SIZE, show_default=True)
@click.option("--epochs", "max_epochs", default=DEFAULT_MAX_EPOCHS, show_default=True)
@click.option("--patience", default=DEFAULT_PATIENCE, show_default=True)
@click.option("--embed-dim", default=20, show_default=True)
@click.option("--hidden-units", default=192, show_default=True)
@click.option("--no-qsc", "use_qsc", flag_value=False, default=True,
              help="Train without the biometric start token.")
@click.pass_context
def train(ctx, corpus_path, out_path, vocab_path, min_count, seed, stride,
          batch_size, max_epochs, patience, embed_dim, hidden_units, use_qsc) -> None:
    """Train the measure model and write the model file."""
    _emit(
        _client(ctx).call(
            "POST",
            "/train",
            {
                "corpus_path": corpus_path,
                "out_path": out_path,
                "vocab_path": vocab_path,
                "min_count": min_count,
                "seed": seed,
                "stride": stride,
                "batch_size": batch_size,
                "max_epochs": max_epochs,
                "patience": patience,
                "embed_dim": embed_dim,
                "hidden_units": hidden_units,
                "use_qsc": use_qsc,
            },
        )
    )


@cli.command("eval")
@click.argument("model_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("corpus_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--vocab", "vocab_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--split", default="test", show_default=True,
              type=click.Choice(["train", "validation", "test"]))
@click.option("--seed", default=0, show_default=True)
@click.option("--stride", default=DEFAULT_STRIDE, show_default=True)
@click.option("--no-qsc", "use_qsc", flag_value=False, default=True)
@click.pass_context
def eval_cmd(ctx, model_path, corpus_path, vocab_path, split, seed, stride,
             use_qsc) -> None:
    """Report perplexity on a corpus split."""
    _emit(
        _client(ctx).call(
            "POST",
            "/eval",
            {
                "model_path": model_path,
                "corpus_path": corpus_path,
                "vocab_path": vocab_path,
                "split": split,
                "seed": seed,
                "stride": stride,
                "use_qsc": use_qsc,
            },
        )
    )


@cli.command()
@click.argument("model_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--vocab", "vocab_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--log", "log_path", type=click.Path(dir_okay=False, writable=True),
              help="Write the session log here (JSON lines).")
@click.option("--measures", default=90, show_default=True,
              help="Session length in human measures (90 = three minutes).")
@click.option("--tempo", "tempo_bpm", default=120.0, show_default=True)
@click.option("--vis", default="truthful", show_default=True,
              type=click.Choice(["truthful", "deceptive", "absent"]))
@click.option("--bio", default="truthful", show_default=True,
              type=click.Choice(["truthful", "deceptive"]))
@click.option("--input", "melody_input", default="script", show_default=True,
              type=click.Choice(["script", "live"]))
@click.option("--seed", default=0, show_default=True)
@click.option("--temperature", default=1.0, show_default=True)
@click.option("--realtime", is_flag=True,
              help="Run against the wall clock instead of simulated time.")
@click.option("--osc-host", envvar="CODRUMMER_OSC_HOST", default=None,
              help="Biometric service host (UDP OSC).")
@click.option("--osc-port", envvar="CODRUMMER_OSC_PORT", default=None, type=int,
              help="Biometric service port (UDP OSC).")
@click.pass_context
def perform(ctx, model_path, vocab_path, log_path, measures, tempo_bpm, vis, bio,
            melody_input, seed, temperature, realtime, osc_host, osc_port) -> None:
    """Play a session against the scripted performer and log it."""
    payload = _client(ctx).call(
        "POST",
        "/perform",
        {
            "model_path": model_path,
            "vocab_path": vocab_path,
            "log_path": log_path,
            "measures": measures,
            "tempo_bpm": tempo_bpm,
            "vis": vis,
            "bio": bio,
            "melody_input": melody_input,
            "seed": seed,
            "temperature": temperature,
            "realtime": realtime,
            "osc_host": osc_host,
            "osc_port": osc_port,
        },
    )
    if log_path is None and "log_lines" in payload:
        for line in payload.pop("log_lines"):
            click.echo(line)
    _emit(payload)


@cli.group()
def analyze() -> None:
    """Study statistics: flow questionnaire and listener preferences."""


@analyze.command("flow")
@click.argument("csv_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--json", "as_json", is_flag=True, help="Emit JSON instead of the table.")
@click.pass_context
def analyze_flow(ctx, csv_path, as_json) -> None:
    """Per-condition flow table plus matched-pair t-tests."""
    payload = _client(ctx).call("POST", "/analyze/flow", {"csv_path": csv_path})
    if as_json:
        _emit(payload["data"])
    else:
        click.echo(payload["report"])


@analyze.command("listener")
@click.option("--csv", "csv_path", type=click.Path(exists=True, dir_okay=False),
              help="Raw response rows; omit to just print the published table.")
@click.option("--json", "as_json", is_flag=True, help="Emit JSON instead of the table.")
@click.pass_context
def analyze_listener(ctx, csv_path, as_json) -> None:
    """Listener preference table with exclusions and binomial tests."""
    payload = _client(ctx).call("POST", "/analyze/listener", {"csv_path": csv_path})
    if as_json:
        _emit(payload["data"])
    else:
        click.echo(payload["report"])


@cli.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
@click.option("--static", "static_dir",
              type=click.Path(exists=True, file_okay=False), default=None,
              help="Directory with the built visualizer bundle.")
def serve(host, port, static_dir) -> None:
    """Run the HTTP service (REST + confidence WebSocket)."""
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(static_dir=static_dir), host=host, port=port)


def main(argv: Sequence[str] | None = None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.exceptions.Exit as exc:
        return int(exc.exit_code)
    except click.ClickException as exc:
        exc.show()
        return 1
    except click.Abort:
        click.echo("aborted", err=True)
        return 1
    except UsageError as exc:
        click.echo(f"error: {exc}", err=True)
        return 1
    except DataError as exc:
        click.echo(f"error: {exc}", err=True)
        return 2
    except RuntimeAbort as exc:
        click.echo(f"error: {exc}", err=True)
        return 3
    except CodrummerError as exc:
        click.echo(f"error: {exc}", err=True)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
