"""Plain numeric table input and bit-exact CSV output."""

from __future__ import annotations

import csv
import io

import numpy as np

from .errors import MalformedFile, NonNumericValue


def fmt(v):
    """Shortest round-trip text for floats; str() for everything else."""
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, np.integer):
        return str(int(v))
    if v is None:
        return ""
    return str(v)


def write_csv(path, header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(buf.getvalue())


def _is_number(cell):
    try:
        float(cell)
    except ValueError:
        return False
    return True


def read_matrix(path, delimiter=None):
    """Read a delimiter-separated numeric matrix, one observation per row.

    A first row containing any non-numeric cell is taken as a header.
    Returns (values, header or None).
    """
    with open(path, encoding="utf-8", newline="") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise MalformedFile(1, "empty file")
    if delimiter is None:
        first = lines[0]
        delimiter = "\t" if "\t" in first else ("," if "," in first else None)
    if delimiter is None:
        rows = [ln.split() for ln in lines]
    else:
        rows = list(csv.reader(lines, delimiter=delimiter))
    header = None
    start = 0
    if rows and not all(_is_number(c) for c in rows[0] if c.strip()):
        header = [c.strip() for c in rows[0]]
        start = 1
    width = None
    out = []
    for lineno, row in enumerate(rows[start:], start=start + 1):
        if not row or all(not c.strip() for c in row):
            continue
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise MalformedFile(lineno, f"expected {width} fields, found {len(row)}")
        vals = []
        for col, cell in enumerate(row, start=1):
            try:
                x = float(cell)
            except ValueError:
                raise NonNumericValue(lineno, col, cell) from None
            if not np.isfinite(x):
                raise NonNumericValue(lineno, col, cell)
            vals.append(x)
        out.append(vals)
    if not out:
        raise MalformedFile(len(rows), "no numeric rows")
    return np.array(out), header


def read_vector(path, delimiter=None):
    values, _ = read_matrix(path, delimiter)
    if values.shape[1] != 1 and values.shape[0] != 1:
        raise MalformedFile(1, f"expected a single column, found {values.shape[1]}")
    return values.ravel()
