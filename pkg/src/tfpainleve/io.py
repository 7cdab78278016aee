"""CSV profiles and JSON run metadata.

Floats are written with ``repr`` (shortest round-trip form), so reading a
file back reproduces the written values exactly and reruns are
byte-identical.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np


def _fmt(v) -> str:
    v = float(v)
    if math.isnan(v):
        return "nan"
    return repr(v)


def write_csv(path: str | Path, header: Sequence[str], columns: Sequence) -> None:
    cols = [np.asarray(c, dtype=float) for c in columns]
    n = len(cols[0])
    if len(header) != len(cols) or any(len(c) != n for c in cols):
        raise ValueError("header and columns disagree in shape")
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(c[i]) for c in cols) for i in range(n))
    with open(path, "w", newline="\n") as f:
        f.write("\n".join(lines) + "\n")


def read_csv(path: str | Path) -> tuple[list[str], dict[str, np.ndarray]]:
    text = Path(path).read_text().splitlines()
    header = text[0].split(",")
    rows = [[float(s) for s in line.split(",")] for line in text[1:] if line]
    data = np.array(rows, dtype=float).reshape(len(rows), len(header))
    return header, {name: data[:, k] for k, name in enumerate(header)}


@dataclass
class RunMetadata:
    command: str
    eps: Optional[float] = None
    eta: Optional[float] = None
    eta_spec: Optional[str] = None
    grid: Optional[tuple] = None  # (y_min, y_max, h)
    converged: Optional[bool] = None
    iterations: Optional[int] = None
    residuals: Optional[tuple] = None
    sup_R: Optional[float] = None
    eta0: Optional[float] = None
    wall_time_ms: int = 0
    tool_version: str = ""
    extra: dict = field(default_factory=dict)


def _clean(obj):
    # JSON has no NaN/inf: write them as null
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, (np.floating, np.integer)):
        return _clean(obj.item())
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def metadata_json(meta: RunMetadata) -> str:
    return json.dumps(_clean(asdict(meta)), indent=2, sort_keys=True, allow_nan=False)


def write_metadata(path: str | Path, meta: RunMetadata) -> None:
    with open(path, "w", newline="\n") as f:
        f.write(metadata_json(meta) + "\n")
