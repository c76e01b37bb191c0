"""Serialization helpers: canonical JSON, CSV, atomic writes and the result cache."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
import tempfile
from pathlib import Path

SCHEMA = 1


def clean(obj):
    """Recursively turn numpy scalars/arrays into builtins and non-finite floats into strings."""
    if isinstance(obj, dict):
        return {str(k): clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [clean(v) for v in obj]
    if hasattr(obj, "tolist"):
        return clean(obj.tolist())
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, float):
        if math.isfinite(obj):
            return obj
        return "nan" if math.isnan(obj) else ("inf" if obj > 0 else "-inf")
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def restore_float(x):
    """Inverse of the non-finite encoding used by :func:`clean`, applied recursively."""
    if isinstance(x, str) and x in ("nan", "inf", "-inf"):
        return float(x)
    if isinstance(x, dict):
        return {k: restore_float(v) for k, v in x.items()}
    if isinstance(x, list):
        return [restore_float(v) for v in x]
    return x


def dumps(obj) -> str:
    """Canonical JSON: sorted keys, shortest round-trip floats, trailing newline."""
    return json.dumps(clean(obj), sort_keys=True, indent=1, allow_nan=False) + "\n"


def csv_text(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    for row in rows:
        writer.writerow([repr(float(v)) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def atomic_write(path, text: str) -> Path:
    """Write via a temporary file in the target directory and rename over ``path``."""
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


def config_hash(config: dict) -> str:
    canon = json.dumps(clean(config), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()[:32]


def cache_dir(override=None) -> Path:
    if override:
        return Path(override)
    env = os.environ.get("HENON_CACHE_DIR")
    if env:
        return Path(env)
    return Path(os.environ.get("XDG_CACHE_HOME", Path.home() / ".cache")) / "henon"


def cache_load(key: str, directory=None):
    path = cache_dir(directory) / f"{key}.json"
    if not path.exists():
        return None
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError):
        return None


def cache_store(key: str, payload: dict, directory=None) -> Path:
    return atomic_write(cache_dir(directory) / f"{key}.json", dumps(payload))
