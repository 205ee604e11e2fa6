"""JSON helpers: deterministic dumps, atomic writes, content hashing.

All artifacts are serialized with insertion-ordered keys and the default
float repr (shortest round-trip decimal), so identical inputs produce
byte-identical files.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from pathlib import Path

from .errors import IOErrorCategory


def dumps(obj) -> str:
    """Pretty, deterministic serialization used for all on-disk artifacts."""
    return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"


def canonical(obj) -> str:
    """Compact form used for hashing."""
    return json.dumps(obj, separators=(",", ":"), ensure_ascii=False)


def sha256_of(obj) -> str:
    return hashlib.sha256(canonical(obj).encode("utf-8")).hexdigest()


def write_atomic(path: str | Path, text: str) -> Path:
    """Write ``text`` to ``path`` via a temp file + rename in the same dir."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except OSError as exc:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise IOErrorCategory(f"cannot write {path}: {exc}") from exc
    return path


def load(path: str | Path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise IOErrorCategory(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise IOErrorCategory(f"invalid JSON in {path}: {exc}") from exc
