"""Overlay two wavefield snapshots: filled field plus reference contours.

Usage:
    python overlay.py SNAPSHOT_A SNAPSHOT_B OUTPUT_PNG [--title TEXT]

Snapshot A is drawn as a heatmap, snapshot B as contour lines on top, and
the panel title reports the maximum absolute difference; the standard use
is collocation versus pseudospectral fields at the same time.
"""

import argparse

import numpy as np
import matplotlib.pyplot as plt

from common import PlotJob, SAVEFIG_KW, fail, read_snapshot


def render(job: PlotJob):
    xs_a, ys_a, va = read_snapshot(job.inputs[0])
    xs_b, ys_b, vb = read_snapshot(job.inputs[1])
    if va.shape != vb.shape or not (np.array_equal(xs_a, xs_b)
                                    and np.array_equal(ys_a, ys_b)):
        fail(f"snapshots {job.inputs[0]} and {job.inputs[1]} are on different grids")
    diff = float(np.abs(va - vb).max())
    fig, ax = plt.subplots(figsize=(6.5, 5.5))
    scale = max(np.abs(va).max(), 1e-300)
    mesh = ax.pcolormesh(xs_a, ys_a, va, shading="nearest", cmap="RdBu_r",
                         vmin=-scale, vmax=scale)
    levels = np.linspace(-scale, scale, 9)
    levels = levels[np.abs(levels) > 1e-3 * scale]
    ax.contour(xs_b, ys_b, vb, levels=levels, colors="k", linewidths=0.6)
    ax.set_xlabel(job.xlabel)
    ax.set_ylabel(job.ylabel)
    ax.set_aspect("equal")
    ax.set_title(job.title or f"max |A - B| = {diff:.3e}")
    fig.colorbar(mesh, ax=ax, label="sigma (A)")
    fig.savefig(job.output, **SAVEFIG_KW)
    plt.close(fig)
    return job.output


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("snapshot_a")
    ap.add_argument("snapshot_b")
    ap.add_argument("output")
    ap.add_argument("--title", default="")
    args = ap.parse_args()
    render(PlotJob(kind="overlay", inputs=(args.snapshot_a, args.snapshot_b),
                   output=args.output, title=args.title))
    print(f"wrote {args.output}")


if __name__ == "__main__":
    main()
