"""File formats: time-series CSV and JSON helpers."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .core import ResponseSet


class DataFormatError(ValueError):
    """Malformed input file; the message carries the offending row/column."""


def write_timeseries_csv(rs: ResponseSet, path, seqs=None) -> None:
    """Write ``rs`` as ``seq,t,c1..cn`` rows; t=0 is the initial state.

    ``seqs`` restricts output to the given sequence indices.
    """
    seqs = range(rs.m) if seqs is None else seqs
    with open(path, "w", newline="", encoding="utf-8") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["seq", "t"] + [f"c{j + 1}" for j in range(rs.n)])
        for s in seqs:
            out.writerow([s, 0] + [repr(float(v)) for v in rs.initials[s]])
            for t in range(rs.k):
                out.writerow([s, t + 1] + [repr(float(v)) for v in rs.sequences[s, t]])


def load_timeseries_csv(path) -> ResponseSet:
    """Read a ``seq,t,c1..cn`` file into a response set.

    Rows are grouped by ``seq`` (in first-seen order) and sorted by ``t``;
    the ``t=0`` row of each group becomes its initial state.
    """
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise DataFormatError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    if len(header) < 3 or header[0] != "seq" or header[1] != "t":
        raise DataFormatError(f"{path}: header must be 'seq,t,c1,...,cn', got {','.join(header)!r}")
    n = len(header) - 2
    groups: dict[str, dict[int, list[float]]] = {}
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != n + 2:
            raise DataFormatError(f"{path}: row {lineno} has {len(row)} cells, expected {n + 2}")
        seq = row[0].strip()
        try:
            t = int(row[1])
        except ValueError:
            raise DataFormatError(f"{path}: row {lineno}, column 't': non-integer {row[1]!r}") from None
        vals = []
        for col, cell in enumerate(row[2:], start=3):
            try:
                v = float(cell)
            except ValueError:
                raise DataFormatError(
                    f"{path}: row {lineno}, column {col} ({header[col - 1]}): non-numeric {cell!r}"
                ) from None
            if not math.isfinite(v):
                raise DataFormatError(f"{path}: row {lineno}, column {col}: non-finite value")
            vals.append(v)
        g = groups.setdefault(seq, {})
        if t in g:
            raise DataFormatError(f"{path}: row {lineno}: duplicate t={t} for seq {seq!r}")
        g[t] = vals
    if not groups:
        raise DataFormatError(f"{path}: no data rows")
    initials, seqs = [], []
    k = None
    for seq, g in groups.items():
        if 0 not in g:
            raise DataFormatError(f"{path}: seq {seq!r} has no t=0 row")
        ts = sorted(g)
        if ts != list(range(len(ts))):
            raise DataFormatError(f"{path}: seq {seq!r} time steps are not contiguous from 0")
        if k is None:
            k = len(ts) - 1
        elif len(ts) - 1 != k:
            raise DataFormatError(f"{path}: seq {seq!r} has {len(ts) - 1} steps, expected {k}")
        initials.append(g[0])
        seqs.append([g[t] for t in ts[1:]])
    if k < 2:
        raise DataFormatError(f"{path}: sequences need at least 2 steps after t=0, got {k}")
    return ResponseSet(np.asarray(initials), np.asarray(seqs))


def dump_json(obj, path) -> None:
    Path(path).write_text(canonical_json(obj))


def canonical_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def load_json(path):
    return json.loads(Path(path).read_text(encoding="utf-8"))
