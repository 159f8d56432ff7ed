"""Shared plumbing for the figure scripts: schema-checked CSV readers,
grid reconstruction, and the PlotJob record.

These scripts consume the solver's file formats verbatim:
  snapshot  "x,y,sigma" rows on a regular grid, x varying fastest
  trace     "t,receiver_0,receiver_1,..."
  study     "n_points,max_abs_error,avg_rel_error,assembly_seconds,
             solve_seconds[,failed]"
  manifest  "[section]" / "key = value" lines with # comments

A schema mismatch exits nonzero naming the offending column. Rendering is
deterministic: the Agg backend is forced and PNG metadata is pinned, so
identical inputs give identical image bytes.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field

import numpy as np

import matplotlib

matplotlib.use("Agg")

SAVEFIG_KW = dict(dpi=110, metadata={"Software": "fracwave-plots"})


@dataclass(frozen=True)
class PlotJob:
    """One rendering task: input files, plot kind, output image, labels."""

    kind: str                  # heatmap | profile | error_curve | overlay
    inputs: tuple
    output: str
    xlabel: str = "x [m]"
    ylabel: str = "y [m]"
    title: str = ""
    options: dict = field(default_factory=dict)


def fail(message):
    print(f"error: {message}", file=sys.stderr)
    sys.exit(2)


def read_csv(path, required):
    """Read a comma-separated file, insisting on the required leading columns."""
    try:
        with open(path) as fh:
            lines = [ln.strip() for ln in fh if ln.strip()]
    except OSError as exc:
        fail(f"cannot read {path}: {exc}")
    header = lines[0].split(",")
    for i, col in enumerate(required):
        if i >= len(header) or header[i] != col:
            got = header[i] if i < len(header) else "<missing>"
            fail(f"{path}: expected column '{col}' at position {i}, got '{got}'")
    rows = []
    for ln, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) < len(required):
            fail(f"{path}:{ln}: row has {len(parts)} fields, "
                 f"needs at least {len(required)}")
        rows.append(parts)
    return header, rows


def read_snapshot(path):
    """Snapshot CSV -> (xs, ys, values[ny, nx]) with exact node round-trip."""
    _, rows = read_csv(path, ["x", "y", "sigma"])
    x = np.array([float(r[0]) for r in rows])
    y = np.array([float(r[1]) for r in rows])
    v = np.array([float(r[2]) for r in rows])
    xs = np.unique(x)
    ys = np.unique(y)
    if len(xs) * len(ys) != len(rows):
        fail(f"{path}: {len(rows)} rows do not fill a {len(xs)} x {len(ys)} grid")
    ix = np.searchsorted(xs, x)
    iy = np.searchsorted(ys, y)
    vals = np.full((len(ys), len(xs)), np.nan)
    vals[iy, ix] = v
    if np.any(np.isnan(vals)):
        fail(f"{path}: grid nodes are missing or duplicated")
    return xs, ys, vals


def flatten_snapshot(xs, ys, vals):
    """Inverse of read_snapshot's reshape: rows in x-fastest order."""
    out = np.empty((len(xs) * len(ys), 3))
    k = 0
    for j in range(len(ys)):
        for i in range(len(xs)):
            out[k] = (xs[i], ys[j], vals[j, i])
            k += 1
    return out


def read_trace(path):
    header, rows = read_csv(path, ["t"])
    for i, col in enumerate(header[1:]):
        if col != f"receiver_{i}":
            fail(f"{path}: expected column 'receiver_{i}', got '{col}'")
    data = np.array([[float(v) for v in r] for r in rows])
    return data[:, 0], data[:, 1:]


def read_study(path):
    required = ["n_points", "max_abs_error", "avg_rel_error",
                "assembly_seconds", "solve_seconds"]
    _, rows = read_csv(path, required)
    ok = [r for r in rows if len(r) < 6 or not r[5]]
    n = np.array([int(r[0]) for r in ok])
    return (n,
            np.array([float(r[1]) for r in ok]),
            np.array([float(r[2]) for r in ok]),
            np.array([float(r[3]) for r in ok]),
            np.array([float(r[4]) for r in ok]))


def read_manifest_grid(path):
    """snapshot_nx / snapshot_ny declared in a run manifest, if present."""
    nx = ny = None
    with open(path) as fh:
        for line in fh:
            line = line.split("#")[0].strip()
            if "=" not in line:
                continue
            key, value = (p.strip() for p in line.split("=", 1))
            if key == "snapshot_nx":
                nx = int(value)
            elif key == "snapshot_ny":
                ny = int(value)
    return nx, ny
