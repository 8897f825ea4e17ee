"""HTTP service wrapping the pipeline; the CLI is a thin client of it."""

from .app import create_app
from .manifest import RunManifest, file_sha256, manifest_path, write_manifest

__all__ = [
    "RunManifest",
    "create_app",
    "file_sha256",
    "manifest_path",
    "write_manifest",
]
