"""
Run manifests: what was run, on which inputs, with which options.
"""
import json
import logging
import os
import time
from typing import Any, Dict, Sequence

from partitioner.core.config import settings
from partitioner.core.utils import file_digest
from partitioner.models.schemas import RunManifest, RunManifestSchema

logger = logging.getLogger(__name__)

MANIFEST_FILE = "manifest.json"


def build_manifest(command: str, inputs: Sequence[str], options: Dict[str, Any], started: float) -> RunManifest:
    """
    Describe a finished command.

    Args:
        command: CLI subcommand name
        inputs: Paths of every file input, hashed in order
        options: Flattened command options
        started: time.monotonic() at command start
    """
    flat = {key: value for key, value in options.items() if value is not None}
    return RunManifest(
        command=command,
        input_digest=file_digest(inputs),
        options=flat,
        tool_version=settings.VERSION,
        wall_time_s=time.monotonic() - started,
    )


def write_manifest(out_dir: str, manifest: RunManifest) -> str:
    """Write `manifest.json` into out_dir and return its path."""
    os.makedirs(out_dir, exist_ok=True)
    payload = RunManifestSchema().dump(manifest)
    payload["schema_version"] = settings.SCHEMA_VERSION
    path = os.path.join(out_dir, MANIFEST_FILE)
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(payload, handle, indent=2, sort_keys=True)
    logger.debug(f"Manifest written to {path}")
    return path
