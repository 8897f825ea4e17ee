"""Run manifests: one JSON record written alongside every output artifact,
naming the command, the resolved configuration, the seed, and content hashes
of every input and output so deterministic runs can be audited byte-for-byte.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path


def file_sha256(path: str | Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def manifest_path(artifact: str | Path) -> Path:
    artifact = Path(artifact)
    return artifact.with_name(artifact.name + ".manifest.json")


@dataclass
class RunManifest:
    command: str
    config: dict
    seed: int | None = None
    inputs: dict[str, str] = field(default_factory=dict)
    outputs: dict[str, str] = field(default_factory=dict)
    created_utc: str = ""

    def add_input(self, path: str | Path) -> None:
        self.inputs[str(path)] = file_sha256(path)

    def add_output(self, path: str | Path) -> None:
        self.outputs[str(path)] = file_sha256(path)

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "config": self.config,
            "seed": self.seed,
            "inputs": self.inputs,
            "outputs": self.outputs,
            "created_utc": self.created_utc,
        }


def write_manifest(manifest: RunManifest, artifact: str | Path) -> Path:
    """Write the manifest next to `artifact` as <name>.manifest.json."""
    if not manifest.created_utc:
        manifest.created_utc = datetime.now(timezone.utc).isoformat()
    out = manifest_path(artifact)
    out.write_text(json.dumps(manifest.to_dict(), indent=2) + "\n", encoding="utf-8")
    return out
