"""CSV/JSON emission with bit-exact round trips.

Floats in CSV are written with 17 significant digits, which is enough to
recover every double exactly. JSON uses Python's shortest round-trip repr.
Every file is written to a temporary sibling and moved into place.
"""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .grid import GridFunction, GridMeasure


def fmt(x) -> str:
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return format(float(x), ".17g")


def atomic_write(path: str | os.PathLike, text: str) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    return path


def csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([v if isinstance(v, str) else fmt(v) for v in r])
    return buf.getvalue()


def write_table_csv(path, columns: Mapping[str, Sequence]) -> Path:
    names = list(columns)
    cols = [list(columns[n]) for n in names]
    n = len(cols[0]) if cols else 0
    if any(len(c) != n for c in cols):
        raise ValueError("columns differ in length")
    return atomic_write(path, csv_text(names, zip(*cols)))


# -- grids -----------------------------------------------------------------

def write_grid_csv(path, grid: GridFunction) -> Path:
    return atomic_write(path, csv_text(["t", "value"], zip(grid.t, grid.values)))


def read_grid_csv(path, kind: str = "plain", atomic: bool = False) -> GridFunction:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if rows[0] != ["t", "value"]:
        raise ValueError(f"{path}: expected header t,value")
    t = [float(r[0]) for r in rows[1:]]
    vals = np.array([float(r[1]) for r in rows[1:]])
    if len(t) < 2:
        raise ValueError(f"{path}: need at least two grid points")
    cls = GridFunction if kind == "plain" else GridMeasure
    return cls(t[1], vals, kind=kind, atomic=atomic)


def grid_to_dict(grid: GridFunction) -> dict:
    return {
        "h": grid.h,
        "t_max": grid.t_max,
        "kind": grid.kind,
        "atomic": grid.atomic,
        "values": grid.values.tolist(),
    }


def grid_from_dict(d: Mapping) -> GridFunction:
    cls = GridFunction if d["kind"] == "plain" else GridMeasure
    g = cls(float(d["h"]), np.asarray(d["values"], dtype=float), kind=d["kind"], atomic=bool(d.get("atomic", False)))
    if abs(g.t_max - float(d["t_max"])) > 1e-9 * max(1.0, g.t_max):
        raise ValueError("envelope t_max does not match h and values")
    return g


def write_json(path, obj) -> Path:
    return atomic_write(path, json.dumps(obj, indent=2, allow_nan=False) + "\n")


def read_json(path):
    with open(path) as fh:
        return json.load(fh)


# -- simulation output ------------------------------------------------------

def write_counts_csv(path, counts: np.ndarray, u: Sequence[float]) -> Path:
    """Raw count paths: columns replicate, j, u, count."""
    R, J, n = counts.shape
    rows = (
        (r, j + 1, u[i], int(counts[r, j, i]))
        for r in range(R)
        for j in range(J)
        for i in range(n)
    )
    return atomic_write(path, csv_text(["replicate", "j", "u", "count"], rows))


def write_paths_csv(path, paths: np.ndarray, u: Sequence[float]) -> Path:
    """Gaussian path sets: columns replicate, u, value."""
    rows = ((r, u[i], paths[r, i]) for r in range(paths.shape[0]) for i in range(paths.shape[1]))
    return atomic_write(path, csv_text(["replicate", "u", "value"], rows))
