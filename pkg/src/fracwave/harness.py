"""Manufactured-solution validation: forced runs with a known exact field.

The synthetic field

    sigma_e(x, y, t) = exp(-t) x^3 (1000 - x)^3 y^3.6 (1000 - y)^3.6

on the square (0, 1000)^2 vanishes on the boundary (each factor has a zero on
the matching edge) and separates in time, so every time derivative is the
spatial factor times a power of -1. Substituting sigma_e into the governing
equation defines the force

    f = sigma_e_tt / c^2 - eta (-lap)^(gamma+1) sigma_e
        - tau d/dt (-lap)^(gamma+1/2) sigma_e
      = exp(-t) [ g / c^2 - eta A1 + tau A2 ]

with g the spatial factor and A1, A2 its fractional Laplacians, computed once
and reused for every time level. The operator settings for the force are
refined relative to the solver's (half the GL step, twice the directions) so
that the force is as accurate as the machinery allows.

The convergence study drives the full solver over a sequence of cloud sizes,
measures the error at t = 1e-5 s on a fixed 10 x 10 interior test lattice
(coordinates 1000 k / 11, k = 1..10), and records assembly and solve wall
times. Physical set: c0 = 3000 m/s, Q = 10, omega0 = 60 rad/s.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from . import fraclap, stepper
from .errors import ConfigurationError
from .fraclap import FracOpConfig
from .geometry import Domain2D, generate_cloud
from .media import MediumSpec, constant_velocity, derive_coefficients, gamma_from_q
from .rbf import RbfBasis

__all__ = [
    "ManufacturedCase",
    "StudyRow",
    "sigma_exact",
    "spatial_factor",
    "force_spatial",
    "force_term",
    "error_norms",
    "convergence_study",
    "evaluation_lattice",
    "write_study_csv",
    "write_study_report",
]


@dataclass(frozen=True)
class ManufacturedCase:
    """Physical and operator settings of the manufactured validation."""

    side: float = 1000.0
    c0: float = 3000.0
    q_factor: float = 10.0
    omega0: float = 60.0
    dt: float = 1e-7
    t_end: float = 1e-5
    solver_cfg: FracOpConfig = FracOpConfig(h=1.0, n_theta=20)
    force_cfg: FracOpConfig = FracOpConfig(h=0.5, n_theta=40)

    def domain(self):
        return Domain2D.rectangle(0.0, self.side, 0.0, self.side)

    def medium(self):
        return MediumSpec(velocity=constant_velocity(self.c0),
                          q_factor=self.q_factor, omega0=self.omega0)


def spatial_factor(case: ManufacturedCase, x, y):
    """g(x, y) = x^3 (L-x)^3 y^3.6 (L-y)^3.6, zero-extended outside the square.

    The fractional powers would produce NaN for negative arguments, so the
    evaluation clips to the closed square and masks the exterior to zero,
    which is the field's defining extension anyway.
    """
    L = case.side
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    inside = (x >= 0) & (x <= L) & (y >= 0) & (y <= L)
    xc = np.clip(x, 0.0, L)
    yc = np.clip(y, 0.0, L)
    vals = xc ** 3 * (L - xc) ** 3 * yc ** 3.6 * (L - yc) ** 3.6
    return np.where(inside, vals, 0.0)


def sigma_exact(case: ManufacturedCase, x, y, t):
    return np.exp(-t) * spatial_factor(case, x, y)


def force_spatial(case: ManufacturedCase, points):
    """Time-independent force factor at the given points.

    f(x, y, t) = exp(-t) * force_spatial(x, y); computed with the refined
    operator settings and the zero exterior extension of g.
    """
    gamma = gamma_from_q(case.q_factor)
    eta, tau, c_ph = derive_coefficients(case.c0, gamma, case.omega0)
    dom = case.domain()
    pts = np.asarray(points, dtype=float)
    fn = lambda xs, ys: spatial_factor(case, xs, ys)
    a1 = fraclap.frac_laplacian_of_function(fn, dom, pts, gamma + 1.0, case.force_cfg)
    if tau != 0.0:
        a2 = fraclap.frac_laplacian_of_function(fn, dom, pts, gamma + 0.5, case.force_cfg)
    else:
        a2 = np.zeros(len(pts))
    g = spatial_factor(case, pts[:, 0], pts[:, 1])
    return g / (c_ph * c_ph) - eta * a1 + tau * a2


def force_term(case: ManufacturedCase, x, y, t):
    """Pointwise force value f(x, y, t); the separable exp(-t) factor is exact."""
    return float(np.exp(-t) * force_spatial(case, [[x, y]])[0])


def error_norms(approx, exact):
    """(max absolute error, average relative error).

    max_abs = max|a - e|; avg_rel = ||a - e||_2 / ||e||_2, reported as None
    when the exact vector is identically zero.
    """
    approx = np.asarray(approx, dtype=float)
    exact = np.asarray(exact, dtype=float)
    if approx.shape != exact.shape:
        raise ConfigurationError("error_norms needs equal-length vectors")
    max_abs = float(np.max(np.abs(approx - exact)))
    denom = float(np.linalg.norm(exact))
    if denom == 0.0:
        return max_abs, None
    return max_abs, float(np.linalg.norm(approx - exact) / denom)


def evaluation_lattice(case: ManufacturedCase):
    """The fixed 10 x 10 interior evaluation lattice at coordinates L k / 11."""
    ticks = np.array([case.side * k / 11.0 for k in range(1, 11)])
    gx, gy = np.meshgrid(ticks, ticks)
    return np.column_stack([gx.ravel(), gy.ravel()])


@dataclass(frozen=True)
class StudyRow:
    n_points: int            # M + N of the cloud actually built
    max_abs: float
    avg_rel: float
    assembly_seconds: float  # wall time of the fractional operator matrices
    solve_seconds: float     # wall time of one direct factorization + solve
    failed: str = ""         # empty, or the failure reason for this entry


def convergence_study(case: ManufacturedCase, point_counts):
    """Run the manufactured case over increasing cloud sizes.

    point_counts are target M+N totals; each is realized as the n x n lattice
    cloud with n = round(sqrt(count)) over the square, which has exactly n^2
    points. An unstable or singular entry is recorded as failed, not skipped.
    """
    counts = list(point_counts)
    if any(b <= a for a, b in zip(counts, counts[1:])):
        raise ConfigurationError("point counts must be strictly increasing")
    fraclap.warm_up()

    dom = case.domain()
    med = case.medium()
    targets = evaluation_lattice(case)
    rows = []
    for count in counts:
        n = int(round(np.sqrt(count)))
        dx = case.side / (n - 1)
        try:
            rows.append(_study_entry(case, dom, med, dx, targets))
        except Exception as exc:  # record the failure, keep the study going
            rows.append(StudyRow(n_points=n * n, max_abs=float("nan"),
                                 avg_rel=float("nan"), assembly_seconds=float("nan"),
                                 solve_seconds=float("nan"), failed=str(exc)))
    return rows


def _study_entry(case, dom, med, dx, targets):
    basis = RbfBasis(shape=dx)
    cloud = generate_cloud(dom, dx)
    sysm = stepper.assemble(basis, cloud, dom, med, case.solver_cfg, case.dt)

    t0 = time.perf_counter()
    lhs = np.vstack([sysm.phi_d - case.dt * (sysm.tau_diag * sysm.c_diag ** 2)[:, None]
                     * sysm.phi_g12, sysm.phi_b])
    lu = sla.lu_factor(lhs)
    sla.lu_solve(lu, np.ones(cloud.m + cloud.n))
    solve_seconds = time.perf_counter() - t0

    fs = force_spatial(case, cloud.interior)
    sig0 = np.concatenate([
        spatial_factor(case, cloud.interior[:, 0], cloud.interior[:, 1]),
        np.zeros(cloud.n),
    ])
    state = stepper.initialize(sysm, basis, cloud, sig0)

    n_layers = int(round(case.t_end / case.dt)) + 1   # layer index with t = t_end
    while state.n < n_layers:
        fvals = np.exp(-state.time) * fs
        state = stepper.step(sysm, state, fvals)

    approx = stepper.evaluate(basis, cloud, state.lambda_curr, targets)
    exact = sigma_exact(case, targets[:, 0], targets[:, 1], state.time)
    max_abs, avg_rel = error_norms(approx, exact)
    return StudyRow(n_points=cloud.m + cloud.n, max_abs=max_abs, avg_rel=avg_rel,
                    assembly_seconds=sysm.assembly_seconds, solve_seconds=solve_seconds)


def write_study_csv(path, rows):
    with open(path, "w") as fh:
        fh.write("n_points,max_abs_error,avg_rel_error,assembly_seconds,solve_seconds,failed\n")
        for r in rows:
            fh.write(f"{r.n_points},{r.max_abs:.17g},{r.avg_rel:.17g},"
                     f"{r.assembly_seconds:.17g},{r.solve_seconds:.17g},{r.failed}\n")


def write_study_report(path, rows, case: ManufacturedCase):
    with open(path, "w") as fh:
        fh.write("Manufactured-solution convergence study\n")
        fh.write(f"c0 = {case.c0} m/s, Q = {case.q_factor}, omega0 = {case.omega0} rad/s\n")
        fh.write(f"dt = {case.dt} s, errors evaluated at t = {case.t_end} s\n")
        fh.write(f"solver operator: h = {case.solver_cfg.h} m, "
                 f"n_theta = {case.solver_cfg.n_theta}\n")
        fh.write(f"force operator: h = {case.force_cfg.h} m, "
                 f"n_theta = {case.force_cfg.n_theta}\n\n")
        fh.write(f"{'M+N':>8} {'max_abs':>14} {'avg_rel':>14} "
                 f"{'assembly_s':>12} {'solve_s':>10}\n")
        for r in rows:
            if r.failed:
                fh.write(f"{r.n_points:>8} FAILED: {r.failed}\n")
            else:
                fh.write(f"{r.n_points:>8} {r.max_abs:>14.6e} {r.avg_rel:>14.6e} "
                         f"{r.assembly_seconds:>12.3f} {r.solve_seconds:>10.3f}\n")
