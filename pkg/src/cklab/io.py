"""Reproducible export: trajectory CSV with a JSON sidecar, and canonical JSON."""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .flow import Chart, EndKind, Endpoint, Trajectory, first_integral_drift

CSV_HEADER = ("chart", "coord", "a", "b", "c", "alpha")


def fmt(x: float) -> str:
    """Shortest text that round-trips to 17 significant digits."""
    return "%.17g" % float(x)


def to_plain(obj):
    """Numpy scalars, arrays, enums and non-finite floats to JSON-safe values."""
    if isinstance(obj, dict):
        return {str(k): to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_plain(v) for v in obj.tolist()]
    if hasattr(obj, "value") and hasattr(obj, "name") and not isinstance(obj, (int, float, str)):
        return obj.value
    if isinstance(obj, np.generic):
        obj = obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return "nan" if math.isnan(obj) else ("inf" if obj > 0 else "-inf")
    return obj


def dumps(obj) -> str:
    return json.dumps(to_plain(obj), sort_keys=True, indent=2) + "\n"


def write_json(path, obj) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(obj))
    return path


def trajectory_rows(traj: Trajectory):
    for coord, y in zip(traj.coords, traj.states):
        yield (traj.chart.value, fmt(coord), *(fmt(v) for v in y))


def write_trajectory(traj: Trajectory, path) -> tuple:
    """Write ``path`` (CSV) and ``path`` with suffix ``.json`` (endpoints)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        w.writerows(trajectory_rows(traj))
    side = path.with_suffix(".json")
    meta = {
        "chart": traj.chart.value,
        "samples": len(traj),
        "left_end": traj.left_end.to_dict(),
        "right_end": traj.right_end.to_dict(),
    }
    if traj.group is not None:
        meta["group"] = {"tag": traj.group.tag.value, "exp_neg_A": traj.group.exp_neg_A}
        try:
            meta["first_integral_drift"] = first_integral_drift(traj)
        except ValueError:
            pass
    write_json(side, meta)
    return path, side


def read_trajectory(path) -> Trajectory:
    """Load a CSV written by :func:`write_trajectory`. Derivatives are not
    stored, so they come back as zeros; endpoints come from the sidecar when
    present."""
    path = Path(path)
    with path.open() as fh:
        r = csv.reader(fh)
        header = tuple(next(r))
        if header != CSV_HEADER:
            raise ValueError(f"unexpected header {header}")
        rows = list(r)
    chart = Chart(rows[0][0])
    data = np.array([[float(v) for v in row[1:]] for row in rows])
    coords, states = data[:, 0], data[:, 1:]
    left = Endpoint(float(coords[0]), EndKind.UserLimit)
    right = Endpoint(float(coords[-1]), EndKind.UserLimit)
    side = path.with_suffix(".json")
    if side.exists():
        meta = json.loads(side.read_text())

        def ep(d):
            return Endpoint(float(d["value"]), EndKind(d["kind"]), d.get("detail", {}))

        left, right = ep(meta["left_end"]), ep(meta["right_end"])
    return Trajectory(chart, coords, states, np.zeros_like(states), coords.copy(), left, right)
