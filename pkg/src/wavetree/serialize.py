"""Deterministic JSON/CSV emission helpers.

All writers here are byte-reproducible for equal inputs: keys are sorted,
floats go through repr, and nothing records wall-clock time.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np


def rle_encode(values) -> list[list[int]]:
    """Run-length encode an integer sequence as [[value, run], ...]."""
    values = np.asarray(values).ravel()
    if values.size == 0:
        return []
    change = np.nonzero(np.diff(values))[0] + 1
    starts = np.concatenate(([0], change))
    ends = np.concatenate((change, [values.size]))
    return [[int(values[s]), int(e - s)] for s, e in zip(starts, ends)]


def rle_decode(pairs: list[list[int]]) -> np.ndarray:
    if not pairs:
        return np.zeros(0, dtype=np.int32)
    return np.concatenate([np.full(run, val, dtype=np.int32) for val, run in pairs])


def _sanitize(obj):
    """Make numpy scalars/arrays JSON-safe, recursively."""
    if isinstance(obj, dict):
        return {str(k): _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_sanitize(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    return obj


def canonical_json(obj) -> str:
    return json.dumps(_sanitize(obj), sort_keys=True, indent=2) + "\n"


def write_json(path: Path, obj) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(canonical_json(obj))


def spec_hash(obj, length: int = 8) -> str:
    """Short content hash of a resolved config, used in output file names."""
    blob = json.dumps(_sanitize(obj), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:length]


def format_cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path: Path, header: list[str], rows, preamble: list[str] = ()) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    lines = [f"# {p}" for p in preamble]
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(format_cell(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def compact_json(obj) -> str:
    return json.dumps(_sanitize(obj), sort_keys=True, separators=(",", ":"))
