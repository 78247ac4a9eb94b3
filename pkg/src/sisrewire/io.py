"""CSV/JSON writers shared by the experiment harness and the command line.

Numbers are written with ``repr``, the shortest decimal text that parses
back to the identical float, so every emitted file round-trips exactly.
"""

from __future__ import annotations

import csv
import dataclasses
import enum
import json
import math
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from .integrator import Trajectory

TRAJECTORY_HEADER = ("t", "I", "SI", "II", "SS", "n", "u1", "u2")


def fmt(value: Any) -> str:
    if isinstance(value, enum.Enum):
        return str(value.value)
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])
    return path


def read_csv(path: Path) -> tuple[list[str], list[list[str]]]:
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def trajectory_rows(traj: Trajectory) -> list[tuple]:
    """One row per recorded time; the final row repeats the last control."""
    rows = []
    nctl = len(traj.controls)
    for k, t in enumerate(traj.times):
        u1, u2 = traj.controls[min(k, nctl - 1)]
        I, SI, II, SS = traj.states[k]
        rows.append((t, I, SI, II, SS, traj.n[k], u1, u2))
    return rows


def write_trajectory(path: Path, traj: Trajectory) -> Path:
    return write_csv(path, TRAJECTORY_HEADER, trajectory_rows(traj))


def _jsonable(obj: Any):
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {k: _jsonable(v) for k, v in dataclasses.asdict(obj).items()}
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        # JSON has no NaN/inf; keep them readable as strings
        return v if math.isfinite(v) else repr(v)
    return obj


def write_json(path: Path, data: Any) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_jsonable(data), indent=2, sort_keys=True) + "\n")
    return path


def to_jsonable(obj: Any):
    return _jsonable(obj)
