"""Report writing: versioned JSON payloads, CSV tables, and a metadata sidecar.

Payloads are a pure function of the run configuration and seed. Anything
time- or host-dependent goes to ``<out>.meta.json`` so the payload stays
byte-identical across runs.
"""

from __future__ import annotations

import csv
import io
import json
import os
import platform
import tempfile
import time
from pathlib import Path

from .certificates import jsonable

SCHEMA_VERSION = 1


def payload(command: str, config: dict, body: dict, passed: bool) -> dict:
    return {"schema": SCHEMA_VERSION, "command": command, "config": jsonable(config),
            "pass": bool(passed), **jsonable(body)}


def dumps_json(obj: dict) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=True) + "\n"


def dumps_csv(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(v) if isinstance(v, float) else v for v in r])
    return buf.getvalue()


def write_atomic(path: str | os.PathLike, text: str) -> Path:
    """Write via a temporary file in the same directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def meta_path(path: str | os.PathLike) -> Path:
    p = Path(path)
    return p.with_name(p.name + ".meta.json")


def write_meta(path: str | os.PathLike, elapsed: float, extra: dict | None = None) -> Path:
    meta = {
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
        "elapsed_seconds": round(elapsed, 6),
        "python": platform.python_version(),
        "platform": platform.platform(),
        **(extra or {}),
    }
    return write_atomic(meta_path(path), dumps_json(meta))
