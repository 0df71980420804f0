"""Artifact files: metadata headers, content hashing, and cache freshness.

Every emitted table starts with ``# key=value`` comment lines recording the
inputs digest, the seed, and the package version, so a rerun can prove an
artifact is current without recomputing it, and a reader can trace any file
back to its inputs.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Iterable, Mapping

import pandas as pd

from . import __version__


def inputs_digest(paths: Iterable[Path] = (), params: Mapping | None = None) -> str:
    """sha256 over the given files' bytes plus the sorted parameter items."""
    h = hashlib.sha256()
    for p in sorted(Path(p) for p in paths):
        h.update(str(p.name).encode())
        h.update(p.read_bytes())
    for key in sorted(params or {}):
        h.update(f"{key}={params[key]}".encode())
    return h.hexdigest()


def meta_lines(digest: str, seed: int | None = None, extra: Mapping | None = None) -> list[str]:
    meta = {"inputs_sha256": digest, "seed": seed if seed is not None else "", "version": __version__}
    meta.update(extra or {})
    return [f"{k}={meta[k]}" for k in meta]


def write_table(frame: pd.DataFrame, path: Path, digest: str, seed: int | None = None,
                extra: Mapping | None = None, index: bool = False, index_label=None) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for line in meta_lines(digest, seed, extra):
            fh.write(f"# {line}\n")
        frame.to_csv(fh, index=index, index_label=index_label)


def read_table(path: Path, **kwargs) -> pd.DataFrame:
    kwargs.setdefault("float_precision", "round_trip")
    return pd.read_csv(path, comment="#", **kwargs)


def read_meta(path: Path) -> dict[str, str]:
    meta: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for raw in fh:
            if not raw.startswith("# "):
                break
            line = raw[2:].strip()
            if "=" in line:
                key, _, value = line.partition("=")
                meta[key] = value
    return meta


def write_json(payload: dict, path: Path, digest: str, seed: int | None = None) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    body = {"_meta": {"inputs_sha256": digest, "seed": seed, "version": __version__}}
    body.update(payload)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(body, fh, indent=1, sort_keys=True)
        fh.write("\n")


def is_fresh(path: Path, digest: str) -> bool:
    """True when the artifact exists and was produced from the same inputs."""
    if not path.exists():
        return False
    if path.suffix == ".json":
        try:
            with open(path, encoding="utf-8") as fh:
                return json.load(fh).get("_meta", {}).get("inputs_sha256") == digest
        except (OSError, json.JSONDecodeError):
            return False
    try:
        return read_meta(path).get("inputs_sha256") == digest
    except OSError:
        return False
