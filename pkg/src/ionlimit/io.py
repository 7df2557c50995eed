"""CSV and run-manifest writers with locale-independent 12-digit formatting."""
from __future__ import annotations

import json
import math
from importlib import metadata
from pathlib import Path

DIGITS = 12


def fmt(x):
    """Format a number with 12 significant digits ('.' separator, 'nan' for missing)."""
    if x is None:
        return "nan"
    x = float(x)
    if not math.isfinite(x):
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    return f"{x:.{DIGITS}g}"


def write_csv(path, header, rows):
    """Write a header line and rows of numbers; returns the path."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [",".join(header)]
    lines += [",".join(v if isinstance(v, str) else fmt(v) for v in row) for row in rows]
    path.write_text("\n".join(lines) + "\n", encoding="ascii")
    return path


def code_version():
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "unknown"


def write_manifest(path, record):
    """Write ``record`` as sorted, indented JSON with the code version attached."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    body = {"code_version": code_version(), **record}
    path.write_text(json.dumps(body, indent=2, sort_keys=True, default=_plain) + "\n", encoding="ascii")
    return path


def _plain(obj):
    if hasattr(obj, "tolist"):
        return obj.tolist()
    if hasattr(obj, "value"):
        return obj.value
    raise TypeError(f"cannot serialise {type(obj).__name__}")
