"""Render a wavefield snapshot CSV as a heatmap PNG.

Usage:
    python heatmap.py SNAPSHOT_CSV OUTPUT_PNG [--manifest MANIFEST]
                      [--vmin V] [--vmax V] [--title TEXT]

The snapshot rows are reshaped onto the regular evaluation grid; when a run
manifest is given, the declared grid size is cross-checked against the file.
A fixed symmetric color scale (--vmin/--vmax) keeps frame sequences
comparable.
"""

import argparse

import matplotlib.pyplot as plt

from common import PlotJob, SAVEFIG_KW, fail, read_manifest_grid, read_snapshot


def render(job: PlotJob):
    xs, ys, vals = read_snapshot(job.inputs[0])
    manifest = job.options.get("manifest")
    if manifest:
        nx, ny = read_manifest_grid(manifest)
        if nx is not None and (nx, ny) != (len(xs), len(ys)):
            fail(f"{job.inputs[0]}: grid {len(xs)} x {len(ys)} does not match "
                 f"manifest {nx} x {ny}")
    fig, ax = plt.subplots(figsize=(6.0, 5.0))
    mesh = ax.pcolormesh(xs, ys, vals, shading="nearest", cmap="RdBu_r",
                         vmin=job.options.get("vmin"), vmax=job.options.get("vmax"))
    ax.set_xlabel(job.xlabel)
    ax.set_ylabel(job.ylabel)
    ax.set_title(job.title or job.inputs[0])
    ax.set_aspect("equal")
    fig.colorbar(mesh, ax=ax, label="sigma")
    fig.savefig(job.output, **SAVEFIG_KW)
    plt.close(fig)
    return job.output


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("snapshot")
    ap.add_argument("output")
    ap.add_argument("--manifest", default=None)
    ap.add_argument("--vmin", type=float, default=None)
    ap.add_argument("--vmax", type=float, default=None)
    ap.add_argument("--title", default="")
    args = ap.parse_args()
    render(PlotJob(kind="heatmap", inputs=(args.snapshot,), output=args.output,
                   title=args.title,
                   options=dict(manifest=args.manifest, vmin=args.vmin,
                                vmax=args.vmax)))
    print(f"wrote {args.output}")


if __name__ == "__main__":
    main()
