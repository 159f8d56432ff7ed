"""Render a convergence-study CSV as error and CPU-time curves.

Usage:
    python error_curve.py STUDY_CSV OUTPUT_PNG [--title TEXT]

Left axis: maximum absolute and average relative error against the number
of collocation points, log-scaled. Right panel: assembly and solve wall
times. Failed study rows are skipped.
"""

import argparse

import matplotlib.pyplot as plt

from common import PlotJob, SAVEFIG_KW, read_study


def render(job: PlotJob):
    n, max_abs, avg_rel, t_asm, t_solve = read_study(job.inputs[0])
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9.5, 4.0))
    ax1.loglog(n, max_abs, "o-", label="max abs error")
    ax1.loglog(n, avg_rel, "s-", label="avg rel error")
    ax1.set_xlabel("collocation points M+N")
    ax1.set_ylabel("error")
    ax1.legend()
    ax1.grid(True, which="both", alpha=0.3)
    ax2.loglog(n, t_asm, "o-", label="operator assembly")
    ax2.loglog(n, t_solve, "s-", label="one direct solve")
    ax2.set_xlabel("collocation points M+N")
    ax2.set_ylabel("wall time [s]")
    ax2.legend()
    ax2.grid(True, which="both", alpha=0.3)
    fig.suptitle(job.title or job.inputs[0])
    fig.tight_layout()
    fig.savefig(job.output, **SAVEFIG_KW)
    plt.close(fig)
    return job.output


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("study_csv")
    ap.add_argument("output")
    ap.add_argument("--title", default="")
    args = ap.parse_args()
    render(PlotJob(kind="error_curve", inputs=(args.study_csv,),
                   output=args.output, title=args.title))
    print(f"wrote {args.output}")


if __name__ == "__main__":
    main()
