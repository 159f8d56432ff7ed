"""System assembly and two-level time marching for the viscoacoustic solver.

Substituting the RBF expansion sigma ~ sum_j lambda_j(t) phi_ij into the
governing equation, enforcing it at the M interior points with a centered
second difference in time and a backward difference on the attenuation term,
and enforcing the zero boundary value at the N boundary points, gives one
dense linear solve per step:

    LHS lambda^{n+1} = RHS(lambda^n, lambda^{n-1}, f^n)

    LHS          = [Phi_d - dt diag(tau_i c_i^2) Phi_a ; Phi_b]
    RHS interior = [2 Phi_d + dt^2 diag(eta_i c_i^2) Phi_e
                    - dt diag(tau_i c_i^2) Phi_a] lambda^n
                   - Phi_d lambda^{n-1} + dt^2 diag(c_i^2) f^n
    RHS boundary = 0

where Phi_e and Phi_a are the fractional operator matrices of exponent
gamma + 1 (dispersion) and gamma + 1/2 (attenuation). The zero boundary rows
apply to lambda^{n+1}, which is the only reading that closes the square
system. LHS is time independent, so it is factorized once and reused.

Time layers are 1-based with t_n = (n - 1) dt. The start encodes a zero
initial time derivative: lambda^1 interpolates the initial field (boundary
entries forced to zero) and lambda^2 = lambda^1.

Equation modes:
    full        : both fractional terms with the medium's gamma
    attenuation : dispersion operator replaced by the classical Laplacian
    dispersion  : attenuation term dropped
    classical   : gamma forced to 0 (plain wave equation)
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import scipy.linalg as sla

from . import fraclap, rbf
from .errors import ConfigurationError, ConditioningError, InstabilityError
from .fraclap import FracOpConfig
from .geometry import Domain2D, PointCloud, generate_cloud
from .media import MediumSpec, derive_coefficients, sample_velocity
from .rbf import RbfBasis, kernel_matrix

__all__ = [
    "SystemMatrices",
    "StepperState",
    "SourceTerm",
    "SnapshotGrid",
    "Snapshot",
    "Scenario",
    "RunResult",
    "ricker_field",
    "assemble",
    "initialize",
    "step",
    "evaluate",
    "run",
    "write_snapshot_csv",
    "write_trace_csv",
]

MODES = ("full", "attenuation", "dispersion", "classical")


@dataclass(frozen=True, eq=False)
class SystemMatrices:
    """Assembled operators and the factorized left-hand side of one scenario."""

    phi_d: np.ndarray           # M x (M+N) kernel rows at interior points
    phi_b: np.ndarray           # N x (M+N) kernel rows at boundary points
    phi_g1: np.ndarray          # dispersion operator, exponent gamma + 1 (or 1)
    phi_g12: np.ndarray         # attenuation operator, exponent gamma + 1/2 (zeros if unused)
    c_diag: np.ndarray          # phase velocities at interior points, m/s
    eta_diag: np.ndarray        # per-point dispersion coefficients
    tau_diag: np.ndarray        # per-point attenuation coefficients
    gamma: float
    dt: float
    mode: str
    lhs_factorization: tuple
    rhs_op: np.ndarray          # precomputed interior RHS operator acting on lambda^n
    assembly_seconds: float = 0.0
    factor_seconds: float = 0.0

    @property
    def m(self):
        return self.phi_d.shape[0]

    @property
    def n(self):
        return self.phi_b.shape[0]


@dataclass(frozen=True, eq=False)
class StepperState:
    """Coefficient layers around the current time index n (t_n = (n-1) dt)."""

    lambda_prev: np.ndarray
    lambda_curr: np.ndarray
    n: int
    dt: float

    @property
    def time(self):
        return (self.n - 1) * self.dt


@dataclass(frozen=True)
class SourceTerm:
    """Initial wavefield and/or external force of a run.

    kind "none" starts from zero with no force; "initial_ricker" uses the
    radial pulse [1 - 2 (pi f0 r)^2] exp(-(pi f0 r)^2) centred at (x, y) with
    r in metres and f0 a raw coefficient; "force_function" supplies
    force(x_array, y_array, t) plus an optional initial(x_array, y_array).
    """

    kind: str = "none"
    f0: float = 5.0
    x: float = 0.0
    y: float = 0.0
    force: Optional[Callable] = None
    initial: Optional[Callable] = None


def ricker_field(points, f0, x_s, y_s):
    pts = np.asarray(points, dtype=float)
    r2 = (pts[:, 0] - x_s) ** 2 + (pts[:, 1] - y_s) ** 2
    arg = (math.pi * f0) ** 2 * r2
    return (1.0 - 2.0 * arg) * np.exp(-arg)


def assemble(basis, cloud, domain, medium: MediumSpec, cfg: FracOpConfig, dt,
             mode="full", engine="auto"):
    """Build all operator matrices and factorize the left-hand side."""
    if mode not in MODES:
        raise ConfigurationError(f"unknown mode {mode!r}; expected one of {MODES}")
    if cloud.m == 0:
        raise ConfigurationError("cloud has no interior points")
    if not dt > 0:
        raise ConfigurationError(f"time step must be positive, got {dt}")

    gamma = 0.0 if mode == "classical" else medium.gamma
    c0 = np.asarray(sample_velocity(medium.velocity,
                                    cloud.interior[:, 0], cloud.interior[:, 1]))
    eta = np.empty(cloud.m)
    tau = np.empty(cloud.m)
    c_ph = np.empty(cloud.m)
    for i, c0i in enumerate(c0):
        eta[i], tau[i], c_ph[i] = derive_coefficients(float(c0i), gamma, medium.omega0)
    if mode == "attenuation":
        eta[:] = -1.0
        beta1 = 1.0
    else:
        beta1 = gamma + 1.0
    if mode == "dispersion":
        tau[:] = 0.0
    beta2 = gamma + 0.5

    phi_d = kernel_matrix(basis, cloud.interior, cloud.all_points)
    phi_b = kernel_matrix(basis, cloud.boundary, cloud.all_points)

    t0 = time.perf_counter()
    need_att = bool(np.any(tau != 0.0))
    if need_att:
        phi_g1, phi_g12 = fraclap.frac_laplacian_matrices(
            basis, cloud, domain, [beta1, beta2], cfg, engine=engine)
    else:
        phi_g1 = fraclap.frac_laplacian_matrix(basis, cloud, domain, beta1, cfg,
                                               engine=engine)
        phi_g12 = np.zeros_like(phi_g1)
    assembly_seconds = time.perf_counter() - t0

    tc2 = (tau * c_ph * c_ph)[:, None]
    ec2 = (eta * c_ph * c_ph)[:, None]
    lhs = np.vstack([phi_d - dt * tc2 * phi_g12, phi_b])
    t0 = time.perf_counter()
    try:
        lu = sla.lu_factor(lhs)
    except (ValueError, sla.LinAlgError) as exc:
        raise ConditioningError(f"left-hand side factorization failed: {exc}") from exc
    factor_seconds = time.perf_counter() - t0

    # smoke check: the factorization must reproduce a known product
    rng = np.random.default_rng(12345)
    probe = rng.standard_normal(cloud.m + cloud.n)
    resid = np.max(np.abs(lhs @ sla.lu_solve(lu, lhs @ probe) - lhs @ probe))
    scale = np.max(np.abs(lhs @ probe)) + 1.0
    if not np.isfinite(resid) or resid > 1e-8 * scale:
        raise ConditioningError(
            f"left-hand side too ill-conditioned: probe residual {resid:.3e}")

    rhs_op = 2.0 * phi_d + dt * dt * ec2 * phi_g1 - dt * tc2 * phi_g12
    return SystemMatrices(
        phi_d=phi_d, phi_b=phi_b, phi_g1=phi_g1, phi_g12=phi_g12,
        c_diag=c_ph, eta_diag=eta, tau_diag=tau, gamma=gamma, dt=dt, mode=mode,
        lhs_factorization=lu, rhs_op=rhs_op,
        assembly_seconds=assembly_seconds, factor_seconds=factor_seconds,
    )


def initialize(sys: SystemMatrices, basis, cloud, sigma0) -> StepperState:
    """Interpolate the initial field and duplicate it into both start layers.

    Boundary entries of sigma0 are forced to zero first: the exterior field
    is identically zero, so a nonzero tail of the initial pulse may not leak
    onto the boundary nodes.
    """
    sigma0 = np.asarray(sigma0, dtype=float).copy()
    if sigma0.shape != (cloud.m + cloud.n,):
        raise ConfigurationError(
            f"initial field must have {cloud.m + cloud.n} entries, got {sigma0.shape}")
    if not np.all(np.isfinite(sigma0)):
        raise ConfigurationError("initial field contains non-finite values")
    sigma0[cloud.m:] = 0.0
    lam1 = rbf.interpolate(basis, cloud, sigma0)
    return StepperState(lambda_prev=lam1, lambda_curr=lam1.copy(), n=2, dt=sys.dt)


def step(sys: SystemMatrices, state: StepperState, force_values=None) -> StepperState:
    """Advance one time layer: solve for lambda^{n+1} and shift the window.

    force_values, when given, holds f(x_i, t_n) at the M interior points.
    Non-finite solution values raise InstabilityError carrying the step index
    and the largest magnitude reached.
    """
    if state.n < 2:
        raise ConfigurationError("stepper state must start at n = 2")
    rhs_int = sys.rhs_op @ state.lambda_curr - sys.phi_d @ state.lambda_prev
    if force_values is not None:
        rhs_int = rhs_int + sys.dt * sys.dt * (sys.c_diag ** 2) * np.asarray(force_values)
    if not np.all(np.isfinite(rhs_int)):
        finite = rhs_int[np.isfinite(rhs_int)]
        raise InstabilityError(
            f"non-finite right-hand side at time layer {state.n + 1}",
            step_index=state.n + 1,
            max_magnitude=float(np.abs(finite).max()) if len(finite) else math.inf)
    rhs = np.concatenate([rhs_int, np.zeros(sys.n)])
    lam_new = sla.lu_solve(sys.lhs_factorization, rhs)
    if not np.all(np.isfinite(lam_new)):
        finite = lam_new[np.isfinite(lam_new)]
        mx = float(np.abs(finite).max()) if len(finite) else math.inf
        raise InstabilityError(
            f"non-finite coefficients at time layer {state.n + 1}",
            step_index=state.n + 1, max_magnitude=mx)
    return StepperState(lambda_prev=state.lambda_curr, lambda_curr=lam_new,
                        n=state.n + 1, dt=state.dt)


def evaluate(basis, cloud, lam, targets):
    """Wavefield values sum_j lambda_j phi(|target - x_j|) at arbitrary points."""
    return kernel_matrix(basis, np.asarray(targets, dtype=float), cloud.all_points) @ lam


@dataclass(frozen=True, eq=False)
class SnapshotGrid:
    """Regular evaluation grid over a bounding box, x fastest (row-major in y)."""

    nx: int
    ny: int
    xs: np.ndarray
    ys: np.ndarray
    points: np.ndarray

    @classmethod
    def over_domain(cls, domain: Domain2D, nx, ny):
        xs = np.linspace(domain.x_min, domain.x_max, nx)
        ys = np.linspace(domain.y_min, domain.y_max, ny)
        gx, gy = np.meshgrid(xs, ys)
        return cls(nx=nx, ny=ny, xs=xs, ys=ys,
                   points=np.column_stack([gx.ravel(), gy.ravel()]))


@dataclass(frozen=True, eq=False)
class Snapshot:
    time: float
    grid: SnapshotGrid
    values: np.ndarray  # (ny, nx)


@dataclass(frozen=True, eq=False)
class Scenario:
    """Everything a solver run needs, already validated."""

    domain: Domain2D
    dx: float
    medium: MediumSpec
    source: SourceTerm
    dt: float
    t_end: float
    op_cfg: FracOpConfig
    mode: str = "full"
    shape: Optional[float] = None          # basis shape parameter, default dx
    diagonal_shift: float = 0.0
    snapshot_times: tuple = ()
    snapshot_nx: int = 101
    snapshot_ny: int = 101
    receivers: tuple = ()
    spectral_nx: int = 128
    spectral_ny: int = 128
    engine: str = "auto"


@dataclass(eq=False)
class RunResult:
    """Outputs of a marching run.

    snapshots are emitted at the requested times; traces hold the receiver
    values at every time layer; boundary_abs_max and interior_abs_max track
    max |sigma| over the boundary and interior collocation points per layer
    (empty for the spectral solver, which has no boundary nodes).
    """

    snapshots: list
    trace_times: np.ndarray
    trace_values: np.ndarray
    boundary_abs_max: np.ndarray
    interior_abs_max: np.ndarray
    initial_peak: float
    cloud: Optional[PointCloud] = None
    basis: Optional[RbfBasis] = None
    final_state: Optional[StepperState] = None
    field: str = "rbf"


def _initial_values(scenario, points, m):
    src = scenario.source
    total = len(points)
    if src.kind == "none":
        return np.zeros(total)
    if src.kind == "initial_ricker":
        return ricker_field(points, src.f0, src.x, src.y)
    if src.kind == "force_function":
        if src.initial is None:
            return np.zeros(total)
        return np.asarray(src.initial(points[:, 0], points[:, 1]), dtype=float)
    raise ConfigurationError(f"unknown source kind {src.kind!r}")


def run(scenario: Scenario) -> RunResult:
    """March the RBF collocation solver through round(t_end/dt) steps.

    Snapshots are emitted when a layer time matches a requested time within
    dt/2. On instability the error is re-raised with a `partial_result`
    attribute holding everything emitted so far plus a snapshot of the last
    finite layer.
    """
    basis = RbfBasis(shape=scenario.shape if scenario.shape else scenario.dx)
    cloud = generate_cloud(scenario.domain, scenario.dx)
    sysm = assemble(basis, cloud, scenario.domain, scenario.medium,
                    scenario.op_cfg, scenario.dt, mode=scenario.mode,
                    engine=scenario.engine)

    sigma0 = _initial_values(scenario, cloud.all_points, cloud.m)
    state = initialize(sysm, basis, cloud, sigma0)

    grid = SnapshotGrid.over_domain(scenario.domain, scenario.snapshot_nx,
                                    scenario.snapshot_ny)
    if scenario.domain.kind == "polygon":
        gmask = (np.atleast_1d(scenario.domain.contains(grid.points[:, 0], grid.points[:, 1]))
                 | np.atleast_1d(scenario.domain.on_boundary(grid.points[:, 0], grid.points[:, 1])))
    else:
        gmask = None

    receivers = np.asarray(scenario.receivers, dtype=float).reshape(-1, 2)
    rec_rows = (kernel_matrix(basis, receivers, cloud.all_points)
                if len(receivers) else None)

    n_steps = int(round(scenario.t_end / scenario.dt))
    pending = sorted(scenario.snapshot_times)

    snapshots = []
    trace_times = []
    trace_vals = []
    bmax = []
    imax = []

    def snap_values(lam):
        vals = evaluate(basis, cloud, lam, grid.points)
        if gmask is not None:
            vals = np.where(gmask, vals, 0.0)
        return vals.reshape(grid.ny, grid.nx)

    def record_layer(lam, t):
        interior_vals = sysm.phi_d @ lam
        boundary_vals = sysm.phi_b @ lam
        imax.append(float(np.abs(interior_vals).max()))
        bmax.append(float(np.abs(boundary_vals).max()))
        if rec_rows is not None:
            trace_times.append(t)
            trace_vals.append(rec_rows @ lam)
        else:
            trace_times.append(t)
            trace_vals.append(np.zeros(0))
        while pending and abs(t - pending[0]) <= scenario.dt / 2:
            snapshots.append(Snapshot(time=pending.pop(0), grid=grid,
                                      values=snap_values(lam)))

    force = scenario.source.force if scenario.source.kind == "force_function" else None
    interior_x = cloud.interior[:, 0]
    interior_y = cloud.interior[:, 1]

    record_layer(state.lambda_prev, 0.0)              # layer 1, t = 0
    record_layer(state.lambda_curr, state.dt)         # layer 2, t = dt
    initial_peak = imax[0]

    try:
        for _ in range(n_steps):
            fvals = None
            if force is not None:
                fvals = np.asarray(force(interior_x, interior_y, state.time))
            state = step(sysm, state, fvals)
            record_layer(state.lambda_curr, state.time)
    except InstabilityError as exc:
        snapshots.append(Snapshot(time=(state.n - 1) * state.dt, grid=grid,
                                  values=snap_values(state.lambda_curr)))
        exc.partial_result = RunResult(
            snapshots=snapshots, trace_times=np.array(trace_times),
            trace_values=np.array(trace_vals), boundary_abs_max=np.array(bmax),
            interior_abs_max=np.array(imax), initial_peak=initial_peak,
            cloud=cloud, basis=basis, final_state=state)
        raise

    return RunResult(
        snapshots=snapshots, trace_times=np.array(trace_times),
        trace_values=np.array(trace_vals), boundary_abs_max=np.array(bmax),
        interior_abs_max=np.array(imax), initial_peak=initial_peak,
        cloud=cloud, basis=basis, final_state=state)


def _fmt(v):
    return repr(float(v))


def write_snapshot_csv(path, snapshot: Snapshot):
    """Write one snapshot as CSV rows "x,y,sigma", x varying fastest."""
    grid = snapshot.grid
    vals = snapshot.values.reshape(grid.ny, grid.nx)
    with open(path, "w") as fh:
        fh.write("x,y,sigma\n")
        for iy in range(grid.ny):
            for ix in range(grid.nx):
                fh.write(f"{_fmt(grid.xs[ix])},{_fmt(grid.ys[iy])},{_fmt(vals[iy, ix])}\n")


def snapshot_filename(time_s):
    """Snapshot naming convention: snap_<time in ms>ms.csv."""
    ms = time_s * 1000.0
    return f"snap_{ms:g}ms.csv"


def write_trace_csv(path, trace_times, trace_values):
    """Write receiver traces as CSV "t,receiver_0,receiver_1,..."."""
    values = np.asarray(trace_values)
    n_rec = values.shape[1] if values.ndim == 2 else 0
    with open(path, "w") as fh:
        fh.write("t" + "".join(f",receiver_{i}" for i in range(n_rec)) + "\n")
        for t, row in zip(trace_times, values):
            fh.write(_fmt(t) + "".join("," + _fmt(v) for v in row) + "\n")
