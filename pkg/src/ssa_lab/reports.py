"""JSON/CSV emission for reports: 12 significant digits, labeled timestamp."""
from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

SIG_DIGITS = 12
# Everything under this key is outside the determinism contract.
TIMESTAMP_KEY = "nonDeterministicTimestamp"


def round_sig(x: float, digits: int = SIG_DIGITS) -> float:
    if not math.isfinite(x):
        return x
    return float(f"{x:.{digits}g}")


def normalize(obj):
    """Plain JSON types, floats rounded to 12 significant digits."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        obj = obj.to_dict() if hasattr(obj, "to_dict") else dataclasses.asdict(obj)
    if isinstance(obj, dict):
        return {str(k): normalize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [normalize(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return round_sig(float(obj))
    if isinstance(obj, complex):
        return [round_sig(obj.real), round_sig(obj.imag)]
    if isinstance(obj, np.ndarray):
        return normalize(obj.tolist())
    return obj


def to_json(report, timestamp: bool = True) -> str:
    doc = normalize(report)
    if timestamp and isinstance(doc, dict):
        doc[TIMESTAMP_KEY] = datetime.now(timezone.utc).isoformat()
    return json.dumps(doc, indent=2, sort_keys=True, allow_nan=True) + "\n"


def parse_json(text: str) -> dict:
    doc = json.loads(text)
    if isinstance(doc, dict):
        doc.pop(TIMESTAMP_KEY, None)
    return doc


def _flatten(d: dict, prefix: str = "") -> dict:
    out = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        elif isinstance(v, (int, float, str, bool)) or v is None:
            out[key] = v
    return out


def to_csv(report) -> str:
    """One row per trial for sweeps; a single flattened row otherwise."""
    doc = normalize(report)
    rows = doc.get("records") if isinstance(doc, dict) and "records" in doc else None
    if rows is None:
        rows = doc if isinstance(doc, list) else [_flatten(doc)]
    rows = [_flatten(r) for r in rows]
    header = list(dict.fromkeys(k for r in rows for k in r)) or ["trial"]
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=header, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


def emit(report, path=None, fmt: str = "json", timestamp: bool = True) -> str:
    if fmt not in ("json", "csv"):
        raise ValueError(f"unknown format {fmt!r}")
    text = to_json(report, timestamp) if fmt == "json" else to_csv(report)
    if path is not None:
        Path(path).write_text(text)
    return text
