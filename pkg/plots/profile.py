"""Overlay amplitude profiles along a horizontal line from snapshot CSVs.

Usage:
    python profile.py SNAPSHOT_CSV [SNAPSHOT_CSV ...] OUTPUT_PNG --y Y
                      [--labels A,B,...] [--title TEXT]

Each snapshot contributes the row of grid values nearest to the requested
y, labelled in a legend: the classic two-solver amplitude comparison along
the midline is `python profile.py rbf.csv spectral.csv out.png --y 500`.
"""

import argparse

import numpy as np
import matplotlib.pyplot as plt

from common import PlotJob, SAVEFIG_KW, read_snapshot


def render(job: PlotJob):
    fig, ax = plt.subplots(figsize=(7.0, 4.0))
    y_line = job.options["y"]
    labels = job.options.get("labels") or [p for p in job.inputs]
    for path, label in zip(job.inputs, labels):
        xs, ys, vals = read_snapshot(path)
        iy = int(np.argmin(np.abs(ys - y_line)))
        ax.plot(xs, vals[iy], label=f"{label} (y = {ys[iy]:g})")
    ax.set_xlabel(job.xlabel)
    ax.set_ylabel("sigma")
    ax.set_title(job.title or f"amplitude along y = {y_line:g} m")
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.savefig(job.output, **SAVEFIG_KW)
    plt.close(fig)
    return job.output


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("paths", nargs="+",
                    help="snapshot CSVs followed by the output PNG")
    ap.add_argument("--y", type=float, required=True)
    ap.add_argument("--labels", default=None)
    ap.add_argument("--title", default="")
    args = ap.parse_args()
    if len(args.paths) < 2:
        ap.error("need at least one snapshot and the output path")
    inputs, output = tuple(args.paths[:-1]), args.paths[-1]
    labels = args.labels.split(",") if args.labels else None
    render(PlotJob(kind="profile", inputs=inputs, output=output,
                   title=args.title, options=dict(y=args.y, labels=labels)))
    print(f"wrote {output}")


if __name__ == "__main__":
    main()
