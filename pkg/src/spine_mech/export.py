"""CSV/JSON writers with a provenance line; output is byte-for-byte reproducible."""

from __future__ import annotations

import hashlib
import json
import math
from pathlib import Path

from . import __version__


def config_hash(*paths) -> str:
    h = hashlib.sha256()
    for p in paths:
        h.update(Path(p).read_bytes())
    return h.hexdigest()[:16]


def provenance(command: str, digest: str) -> str:
    return f"spine-mech {__version__} {command} {digest}"


def fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float) or hasattr(value, "dtype"):
        v = float(value)
        if math.isnan(v):
            return "nan"
        return format(v, ".17g")
    return str(value)


def csv_text(columns: dict, order, header_comment: str | None = None) -> str:
    lines = []
    if header_comment is not None:
        lines.append(f"# {header_comment}")
    lines.append(",".join(order))
    n = len(columns[order[0]])
    cols = [columns[name] for name in order]
    for i in range(n):
        lines.append(",".join(fmt(c[i]) for c in cols))
    return "\n".join(lines) + "\n"


def write_csv(path, columns: dict, order, header_comment: str | None = None) -> None:
    Path(path).write_text(csv_text(columns, order, header_comment), encoding="utf-8", newline="\n")


def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if hasattr(obj, "dtype"):
        return obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def write_json(path, payload: dict, header_comment: str | None = None) -> None:
    data = dict(payload)
    if header_comment is not None:
        data = {"provenance": header_comment, **data}
    text = json.dumps(_clean(data), indent=2, sort_keys=False) + "\n"
    Path(path).write_text(text, encoding="utf-8", newline="\n")
