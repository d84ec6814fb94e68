"""CSV emission: UTF-8, LF line endings, header "name [unit]", shortest round-trip floats."""

import csv
import re

import numpy as np

from .errors import ValidationError

__all__ = ["format_value", "write_csv", "read_csv"]

_HEADER = re.compile(r"^(?P<name>[^\[]+?)\s*\[(?P<unit>[^\]]*)\]$")


def format_value(v):
    if isinstance(v, str):
        return v
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def write_csv(path, columns, rows):
    """Write ``rows`` under ``columns`` = [(name, unit), ...]."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"{name} [{unit}]" for name, unit in columns])
        for row in rows:
            if len(row) != len(columns):
                raise ValueError("row length does not match the header")
            w.writerow([format_value(v) for v in row])
    return path


def read_csv(path):
    """Return (names, units, columns) with numeric columns as float arrays."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValidationError(f"{path}: empty CSV (no header)")
    names, units = [], []
    for h in rows[0]:
        m = _HEADER.match(h.strip())
        names.append(m["name"].strip() if m else h.strip())
        units.append(m["unit"] if m else "")
    cols = {}
    for j, name in enumerate(names):
        vals = []
        for i, row in enumerate(rows[1:], start=2):
            if len(row) != len(names):
                raise ValidationError(f"{path}:{i}: expected {len(names)} fields, got {len(row)}")
            cell = row[j].strip()
            try:
                vals.append(float(cell))
            except ValueError:
                vals.append(cell)
        numeric = all(isinstance(v, float) for v in vals)
        cols[name] = np.array(vals, dtype=float) if numeric else vals
    return names, units, cols

