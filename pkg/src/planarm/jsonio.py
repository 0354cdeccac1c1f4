"""Canonical JSON serialization with stable float formatting.

All persisted artifacts (roadmaps, datasets, reports) go through this writer
so that digests are reproducible across runs and platforms.  Floats are
rendered with 17 significant digits, which round-trips IEEE doubles exactly.
"""

from __future__ import annotations

import hashlib
import json
from typing import Any


def format_float(x: float) -> str:
    if x != x:
        raise ValueError("NaN is not serializable")
    if x in (float("inf"), float("-inf")):
        raise ValueError("infinity is not serializable")
    return format(float(x), ".17g")


def canonical_dumps(obj: Any) -> str:
    """Serialize to canonical JSON: sorted keys, fixed float encoding."""
    parts: list[str] = []
    _write(obj, parts)
    return "".join(parts)


def canonical_bytes(obj: Any) -> bytes:
    return canonical_dumps(obj).encode("utf-8")


def digest(obj: Any) -> str:
    """SHA-256 hex digest of the canonical serialization."""
    return hashlib.sha256(canonical_bytes(obj)).hexdigest()


def load_path(path: str) -> Any:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def dump_path(obj: Any, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(canonical_dumps(obj))


def _write(obj: Any, out: list[str]) -> None:
    if obj is None:
        out.append("null")
    elif obj is True:
        out.append("true")
    elif obj is False:
        out.append("false")
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        out.append(format_float(obj))
    elif isinstance(obj, str):
        out.append(json.dumps(obj, ensure_ascii=True))
    elif isinstance(obj, (list, tuple)):
        out.append("[")
        for i, item in enumerate(obj):
            if i:
                out.append(",")
            _write(item, out)
        out.append("]")
    elif isinstance(obj, dict):
        out.append("{")
        for i, key in enumerate(sorted(obj)):
            if not isinstance(key, str):
                raise TypeError(f"non-string key: {key!r}")
            if i:
                out.append(",")
            out.append(json.dumps(key, ensure_ascii=True))
            out.append(":")
            _write(obj[key], out)
        out.append("}")
    else:
        raise TypeError(f"not canonically serializable: {type(obj)!r}")
