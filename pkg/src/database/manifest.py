"""
======================================================
🧾 Run Manifest
Causal Land Suitability Pipeline
Every stage output is traced to one `<stage>_manifest.json` holding the
config digest, seed and sha256 digests of inputs and artifacts.
======================================================
"""
import hashlib
import json
import os
from typing import Any, Dict, Mapping, Optional, Sequence

from config import config
from src.utils.constants import ArtifactNames, Stage
from src.utils.exceptions import MissingArtifact

MANIFEST_FORMAT_VERSION = 1


def file_digest(path: str) -> str:
    if not os.path.exists(path):
        raise MissingArtifact(f"cannot digest missing file: {path}")
    sha = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            sha.update(chunk)
    return sha.hexdigest()


def config_digest(settings: Mapping[str, Any]) -> str:
    """sha256 of canonical JSON (sorted keys, no whitespace)"""
    canonical = json.dumps(settings, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def manifest_path(out_dir: str, stage: Stage) -> str:
    return os.path.join(out_dir, f"{stage.value}{ArtifactNames.MANIFEST_SUFFIX}")


def _relative(path: str, out_dir: str) -> str:
    # keys must not depend on where the output directory lives
    try:
        rel = os.path.relpath(path, out_dir)
    except ValueError:
        return os.path.basename(path)
    return rel.replace(os.sep, "/") if not rel.startswith("..") else os.path.basename(path)


def write_manifest(out_dir: str, stage: Stage, settings: Mapping[str, Any], seed: Optional[int],
                   inputs: Sequence[str] = (), artifacts: Sequence[str] = ()) -> str:
    """Writes the manifest; no wall-clock fields so reruns are byte-identical"""
    manifest: Dict[str, Any] = {
        "format_version": MANIFEST_FORMAT_VERSION,
        "app_version": config.APP_VERSION,
        "stage": stage.value,
        "seed": seed,
        "config_digest": config_digest(settings),
        "inputs": {_relative(p, out_dir): file_digest(p) for p in sorted(set(inputs))},
        "artifacts": {_relative(p, out_dir): file_digest(p) for p in sorted(set(artifacts))},
    }
    path = manifest_path(out_dir, stage)
    os.makedirs(out_dir, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(manifest, f, sort_keys=True, indent=2)
        f.write("\n")
    return path


def read_manifest(out_dir: str, stage: Stage) -> Dict[str, Any]:
    path = manifest_path(out_dir, stage)
    if not os.path.exists(path):
        raise MissingArtifact(f"no {stage.value} manifest in {out_dir}")
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)
