"""Convergence check against a manufactured solution.

A separable synthetic field that vanishes on the boundary is substituted
into the governing equation; the residual becomes the external force, so
the synthetic field is an exact solution of the forced problem. Marching
the solver and measuring the error on a fixed 10 x 10 interior lattice
shows the error falling as the cloud refines, while the recorded wall
times show the operator-assembly cost growing roughly like M (M + N).

Run:  python demos/convergence_study.py   (about a minute)
"""

from fracwave.harness import (ManufacturedCase, convergence_study,
                              write_study_csv, write_study_report)

case = ManufacturedCase()
print("manufactured case: c0 = 3000 m/s, Q = 10, omega0 = 60 rad/s")
print("errors at t = 1e-5 s on the 10 x 10 interior lattice\n")

rows = convergence_study(case, [121, 441, 961])
print(f"{'M+N':>6} {'max_abs':>12} {'avg_rel':>12} {'assembly s':>11} {'solve s':>9}")
for r in rows:
    print(f"{r.n_points:>6} {r.max_abs:>12.4e} {r.avg_rel:>12.4e} "
          f"{r.assembly_seconds:>11.2f} {r.solve_seconds:>9.3f}")

write_study_csv("study.csv", rows)
write_study_report("study.txt", rows, case)
print("\nwrote study.csv and study.txt (render with plots/error_curve.py)")
