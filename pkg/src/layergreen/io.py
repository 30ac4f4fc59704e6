"""Deterministic JSON / CSV serialization and grid-field export.

Floats are written with Python's shortest round-trip representation, which
never needs more than 17 significant digits, so identical inputs give
byte-identical files.  Non-finite floats become ``null`` in JSON.
"""

import csv
import io
import json
from dataclasses import asdict, is_dataclass
from enum import Enum

import numpy as np

SCHEMA_VERSION = "1.0"


def to_plain(obj):
    """Recursively convert NumPy scalars/arrays, dataclasses and enums to plain Python."""
    if is_dataclass(obj) and not isinstance(obj, type):
        obj = obj.as_dict() if hasattr(obj, "as_dict") else asdict(obj)
    if isinstance(obj, dict):
        return {str(k): to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_plain(v) for v in obj.tolist()]
    if isinstance(obj, Enum):
        return obj.name
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        return value if np.isfinite(value) else None
    return obj


def dumps_json(obj):
    """Serialize ``obj`` with fixed key order (insertion order) and a trailing newline."""
    return json.dumps(to_plain(obj), indent=2, allow_nan=False) + "\n"


def format_float(value):
    value = float(value)
    return repr(value) if np.isfinite(value) else ""


def dumps_csv(header, rows):
    """CSV text with a header line; floats formatted as in :func:`dumps_json`."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_float(v) if isinstance(v, (float, np.floating)) else v
                         for v in row])
    return buf.getvalue()


def grid_records(grid, values):
    """Rows ``(x1, x2, x3, value)`` of a field on a :class:`~layergreen.fd.BoxGrid` in row-major order."""
    values = np.asarray(values, dtype=float)
    if values.shape != grid.shape:
        raise ValueError("field shape %s does not match grid %s" % (values.shape, grid.shape))
    pts = grid.nodes().reshape(-1, 3)
    return np.column_stack([pts, values.ravel()])


def grid_to_csv(grid, values):
    return dumps_csv(["x1", "x2", "x3", "value"], grid_records(grid, values).tolist())


def grid_sidecar(grid, kind="value"):
    origin = [float(grid.axis(i)[0]) for i in range(3)]
    return {"schema_version": SCHEMA_VERSION, "kind": kind, "dtype": "float64",
            "byte_order": "little", "order": "C", "dims": list(grid.shape),
            "axes": ["x1", "x2", "x3"], "h": grid.h, "origin": origin}


def write_grid_binary(path, grid, values, kind="value"):
    """Write ``values`` as little-endian float64 in row-major order plus ``path + '.json'``."""
    values = np.asarray(values, dtype="<f8")
    if values.shape != grid.shape:
        raise ValueError("field shape %s does not match grid %s" % (values.shape, grid.shape))
    with open(path, "wb") as fh:
        fh.write(np.ascontiguousarray(values).tobytes(order="C"))
    sidecar = str(path) + ".json"
    with open(sidecar, "w") as fh:
        fh.write(dumps_json(grid_sidecar(grid, kind)))
    return sidecar


def read_grid_binary(path):
    """Inverse of :func:`write_grid_binary`; returns ``(values, sidecar dict)``."""
    with open(str(path) + ".json") as fh:
        meta = json.load(fh)
    values = np.fromfile(path, dtype="<f8").reshape(meta["dims"])
    return values, meta
