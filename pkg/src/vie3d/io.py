"""CSV and JSON writers; every number is written with 9 significant digits."""
from __future__ import annotations

import csv
import json

import numpy as np

__all__ = ["fmt", "write_far_field_csv", "write_probe_csv", "write_json", "FAR_FIELD_COLUMNS", "PROBE_COLUMNS"]

FAR_FIELD_COLUMNS = ["theta", "phi"] + [f"{p}_A{c}" for c in "xyz" for p in ("re", "im")]
PROBE_COLUMNS = ["x", "y", "z"] + [f"{p}_E{c}" for c in "xyz" for p in ("re", "im")] + ["boundary_layer"]


def fmt(v) -> str:
    return format(float(v), ".9g")


def _complex_cols(a):
    out = []
    for c in range(3):
        out += [fmt(a[c].real), fmt(a[c].imag)]
    return out


def write_far_field_csv(path, theta, phi, amplitude):
    """Rows ``theta, phi, re/im of A_x, A_y, A_z`` (angles in radians)."""
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(FAR_FIELD_COLUMNS)
        for t, p, a in zip(theta, phi, amplitude):
            w.writerow([fmt(t), fmt(p)] + _complex_cols(a))


def write_probe_csv(path, points, field, flags):
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(PROBE_COLUMNS)
        for x, e, fl in zip(points, field, flags):
            w.writerow([fmt(v) for v in x] + _complex_cols(e) + [int(bool(fl))])


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": float(fmt(obj.real)), "im": float(fmt(obj.imag))}
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return float(fmt(v)) if np.isfinite(v) else str(v)
    return obj


def write_json(path, data):
    with open(path, "w") as f:
        json.dump(_jsonable(data), f, indent=2, sort_keys=True)
        f.write("\n")
