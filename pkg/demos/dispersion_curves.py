"""Frequency-dependent phase velocity and attenuation for a few quality factors.

The constant-Q medium makes both the phase velocity and the attenuation
coefficient power laws of frequency:

    c(w)     = c0 (w / w0)^gamma
    alpha(w) = w0^gamma tan(pi gamma / 2) w^(1 - gamma) / c0

with gamma = arctan(1/Q)/pi. Smaller Q means larger gamma, stronger
attenuation, and more velocity dispersion. This script prints both curves
over two decades of frequency and writes them to dispersion_curves.csv for
plotting (see the plots/ package).

Run:  python demos/dispersion_curves.py
"""

import numpy as np

from fracwave.media import MediumParams, dispersion_curve, gamma_from_q

C0 = 2000.0      # reference velocity, m/s
OMEGA0 = 60.0    # reference angular frequency, rad/s

omegas = np.logspace(0.5, 2.5, 9)

print(f"reference velocity {C0} m/s at omega0 = {OMEGA0} rad/s\n")
rows = {}
for q in (10.0, 30.0, 100.0):
    params = MediumParams.from_quality(C0, q, OMEGA0)
    curve = dispersion_curve(params, C0, omegas)
    rows[q] = curve
    print(f"Q = {q:5.0f}  (gamma = {params.gamma:.5f})")
    print(f"  {'omega':>10} {'c(omega)':>12} {'alpha':>14}")
    for w, (c, a) in zip(omegas, curve):
        print(f"  {w:10.2f} {c:12.2f} {a:14.6e}")
    # the attenuation curve is a clean power law: slope 1 - gamma in log-log
    slope = (np.log(curve[-1][1]) - np.log(curve[0][1])) / \
            (np.log(omegas[-1]) - np.log(omegas[0]))
    print(f"  log-log attenuation slope: {slope:.6f} = 1 - gamma\n")

with open("dispersion_curves.csv", "w") as fh:
    fh.write("omega," + ",".join(f"c_q{q:g},alpha_q{q:g}" for q in rows) + "\n")
    for i, w in enumerate(omegas):
        cells = [f"{w:g}"]
        for q in rows:
            c, a = rows[q][i]
            cells += [f"{c:.8g}", f"{a:.8g}"]
        fh.write(",".join(cells) + "\n")
print("wrote dispersion_curves.csv")
