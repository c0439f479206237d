"""On-disk formats used by the command-line tools.

* data CSV: one header row, continuous columns named ``c_<j>`` and binary
  columns ``b_<j>``; one line per matrix row.
* partition CSV (truth or fitted): columns ``row,ccol,bcol``.  Column ``row``
  has ``n`` entries, ``ccol`` ``d_c`` and ``bcol`` ``d_d``; shorter columns are
  padded with empty cells.
* memberships CSV: long format ``axis,index,cluster,membership``.
* fc-trace CSV: ``iteration,fc``.
* JSON documents carry a ``schema_version`` field.

Floats are written with ``repr`` so that files round-trip exactly.
"""
from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .core import FitResult, HardPartition, MixedDataMatrix, SoftMemberships
from .errors import ValidationError

SCHEMA_VERSION = 1
AXES = ("row", "ccol", "bcol")


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    if np.isnan(v):
        return ""
    return repr(v)


def write_data(path, x: MixedDataMatrix) -> None:
    header = [f"c_{j}" for j in range(x.d_c)] + [f"b_{j}" for j in range(x.d_d)]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for i in range(x.n):
            w.writerow([repr(float(v)) for v in x.continuous[i]]
                       + [str(int(v)) for v in x.binary[i]])


def read_data(path) -> MixedDataMatrix:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValidationError(f"{path}: empty file")
    header, body = rows[0], rows[1:]
    cont = [j for j, h in enumerate(header) if h.startswith("c_")]
    binr = [j for j, h in enumerate(header) if h.startswith("b_")]
    if len(cont) + len(binr) != len(header):
        bad = [h for h in header if not h.startswith(("c_", "b_"))]
        raise ValidationError(f"{path}: column names must start with c_ or b_: {bad}")
    try:
        values = np.array([[float(v) for v in r] for r in body], dtype=float)
    except ValueError as exc:
        raise ValidationError(f"{path}: {exc}") from None
    if body and values.shape[1] != len(header):
        raise ValidationError(f"{path}: ragged rows")
    values = values.reshape(len(body), len(header))
    return MixedDataMatrix(values[:, cont], values[:, binr])


def write_partition(path, p: HardPartition) -> None:
    cols = [p.row_labels, p.ccol_labels, p.bcol_labels]
    length = max(len(c) for c in cols)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(AXES)
        for i in range(length):
            w.writerow([str(int(c[i])) if i < len(c) else "" for c in cols])


def read_partition(path) -> HardPartition:
    """Read a partition CSV; a single-column file is taken as row labels."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValidationError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    if len(header) == 1 and header[0] not in AXES:
        header = ["row"]
    cols = {a: [] for a in AXES}
    for r in rows[1:]:
        for name, v in zip(header, r):
            if name in cols and v.strip() != "":
                cols[name].append(int(v))
    return HardPartition(*(np.asarray(cols[a], dtype=np.int64) for a in AXES))


def write_memberships(path, m: SoftMemberships) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["axis", "index", "cluster", "membership"])
        for axis, mat in zip(AXES, (m.s, m.tc, m.td)):
            for i, row in enumerate(mat):
                for k, v in enumerate(row):
                    w.writerow([axis, i, k, repr(float(v))])


def read_memberships(path) -> SoftMemberships:
    entries = {a: {} for a in AXES}
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            entries[rec["axis"]][(int(rec["index"]), int(rec["cluster"]))] = float(rec["membership"])
    mats = []
    for a in AXES:
        e = entries[a]
        if not e:
            mats.append(np.zeros((0, 0)))
            continue
        n = max(i for i, _ in e) + 1
        k = max(c for _, c in e) + 1
        m = np.zeros((n, k))
        for (i, c), v in e.items():
            m[i, c] = v
        mats.append(m)
    return SoftMemberships(*mats)


def write_trace(path, trace) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["iteration", "fc"])
        for it, v in enumerate(trace, start=1):
            w.writerow([it, repr(float(v))])


def read_trace(path) -> list[float]:
    with open(path, newline="") as fh:
        return [float(r["fc"]) for r in csv.DictReader(fh)]


def write_json(path, doc) -> None:
    doc = {"schema_version": SCHEMA_VERSION, **doc}
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def read_json(path) -> dict:
    doc = json.loads(Path(path).read_text())
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ValidationError(f"{path}: unsupported schema_version {version!r}")
    return doc


def fit_document(res: FitResult, extra=None) -> dict:
    """JSON-ready description of a fit: parameters plus run diagnostics."""
    doc = {
        "params": res.params.to_dict(),
        "fc_final": res.fc,
        "outer_iters": res.outer_iters,
        "converged": res.converged,
        "seed": res.seed,
        "restart_fcs": [None if not np.isfinite(v) else v
                        for v in res.diagnostics.get("restart_fcs", [])],
    }
    doc.update(extra or {})
    return doc


def write_rows(path, columns, rows) -> None:
    """Write dict rows as CSV with a fixed column order."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_fmt(r[c]) if isinstance(r[c], (float, int, np.number))
                        and not isinstance(r[c], bool) else str(r[c]) for c in columns])
