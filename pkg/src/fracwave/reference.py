"""Fourier pseudospectral reference solver on periodic rectangles.

Spatial fractional Laplacians become wavenumber multiplications: on a
periodic grid, (-lap)^s maps a Fourier mode with wavevector k to |k|^(2s)
times itself, with the k = 0 mode sent to zero for s > 0. Wavenumbers follow
the standard DFT layout (numpy fftfreq): for even n the Nyquist mode carries
the negative frequency -n/2, and |k| uses its magnitude.

The time recurrence is shared with the collocation stepper so that solver
comparisons isolate the spatial discretization. Because the attenuation term
is diagonal in Fourier space, the implicit solve is a pointwise division:

    S^{n+1} = (2 S^n - S^{n-1} + eta dt^2 c^2 |k|^(2 gamma + 2) S^n
               - tau dt c^2 |k|^(2 gamma + 1) S^n + dt^2 c^2 F^n)
              / (1 - tau dt c^2 |k|^(2 gamma + 1))

which is well posed since tau <= 0. Periodic boundaries mean the exterior is
a copy of the interior, not zero, so amplitudes near reflections legitimately
differ from the collocation solver; phases of the outgoing front agree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, InstabilityError
from .media import derive_coefficients, sample_velocity
from .stepper import (RunResult, Scenario, Snapshot, SnapshotGrid,
                      ricker_field)

__all__ = ["SpectralGrid", "spectral_frac_laplacian", "spectral_run"]


@dataclass(frozen=True, eq=False)
class SpectralGrid:
    """Periodic grid: nodes x0 + i lx/nx, i = 0..nx-1 (right edge wraps to left)."""

    nx: int
    ny: int
    lx: float
    ly: float
    x0: float = 0.0
    y0: float = 0.0

    def __post_init__(self):
        if self.nx < 2 or self.ny < 2:
            raise ConfigurationError("spectral grid needs at least 2 nodes per axis")
        if not (self.lx > 0 and self.ly > 0):
            raise ConfigurationError("spectral grid periods must be positive")

    @property
    def xs(self):
        return self.x0 + np.arange(self.nx) * (self.lx / self.nx)

    @property
    def ys(self):
        return self.y0 + np.arange(self.ny) * (self.ly / self.ny)

    def wavenumbers(self):
        """(kx, ky) 1-d arrays in rad/m, standard DFT ordering."""
        kx = 2.0 * math.pi * np.fft.fftfreq(self.nx, d=self.lx / self.nx)
        ky = 2.0 * math.pi * np.fft.fftfreq(self.ny, d=self.ly / self.ny)
        return kx, ky

    def k_magnitude(self):
        """|k| on the (ny, nx) field layout (rows sweep y)."""
        kx, ky = self.wavenumbers()
        return np.sqrt(kx[None, :] ** 2 + ky[:, None] ** 2)


def spectral_frac_laplacian(field, order, grid: SpectralGrid):
    """Apply (-lap)^order to a real (ny, nx) field; returns the real part.

    order is the Laplacian exponent, so the multiplier is |k|^(2 order); the
    zero mode is annihilated for any positive order and preserved for
    order = 0 (identity up to transform round-trip error).
    """
    field = np.asarray(field, dtype=float)
    if not np.all(np.isfinite(field)):
        raise ConfigurationError("field contains non-finite values")
    kmag = grid.k_magnitude()
    if order == 0:
        mult = np.ones_like(kmag)
    else:
        with np.errstate(divide="ignore"):
            mult = kmag ** (2.0 * order)
        mult[0, 0] = 0.0
    return np.real(np.fft.ifft2(np.fft.fft2(field) * mult))


def _bilinear_periodic(field, grid: SpectralGrid, x, y):
    """Sample a periodic grid field at arbitrary points by bilinear interpolation."""
    gx = (np.asarray(x, dtype=float) - grid.x0) / (grid.lx / grid.nx)
    gy = (np.asarray(y, dtype=float) - grid.y0) / (grid.ly / grid.ny)
    ix = np.floor(gx).astype(int)
    iy = np.floor(gy).astype(int)
    fx = gx - ix
    fy = gy - iy
    ix0 = np.mod(ix, grid.nx)
    ix1 = np.mod(ix + 1, grid.nx)
    iy0 = np.mod(iy, grid.ny)
    iy1 = np.mod(iy + 1, grid.ny)
    return (field[iy0, ix0] * (1 - fx) * (1 - fy)
            + field[iy0, ix1] * fx * (1 - fy)
            + field[iy1, ix0] * (1 - fx) * fy
            + field[iy1, ix1] * fx * fy)


def spectral_run(scenario: Scenario) -> RunResult:
    """March the pseudospectral solver on the scenario's rectangle.

    Requires a rectangle domain and a uniform medium. Snapshots are emitted
    on the scenario's snapshot grid (resampled bilinearly with periodic
    wrap), traces at the receivers every layer, matching the collocation
    solver's output format.
    """
    dom = scenario.domain
    if dom.kind != "rectangle":
        raise ConfigurationError("the spectral reference needs a rectangle domain")
    if scenario.medium.velocity.kind != "constant":
        raise ConfigurationError("the spectral reference needs a uniform medium")

    gamma = 0.0 if scenario.mode == "classical" else scenario.medium.gamma
    c0 = sample_velocity(scenario.medium.velocity, dom.x_min, dom.y_min)
    eta, tau, c_ph = derive_coefficients(c0, gamma, scenario.medium.omega0)
    if scenario.mode == "attenuation":
        eta, beta1 = -1.0, 1.0
    else:
        beta1 = gamma + 1.0
    if scenario.mode == "dispersion":
        tau = 0.0
    beta2 = gamma + 0.5

    grid = SpectralGrid(nx=scenario.spectral_nx, ny=scenario.spectral_ny,
                        lx=dom.x_max - dom.x_min, ly=dom.y_max - dom.y_min,
                        x0=dom.x_min, y0=dom.y_min)
    gx, gy = np.meshgrid(grid.xs, grid.ys)
    pts = np.column_stack([gx.ravel(), gy.ravel()])

    src = scenario.source
    if src.kind == "none":
        sig0 = np.zeros(len(pts))
    elif src.kind == "initial_ricker":
        sig0 = ricker_field(pts, src.f0, src.x, src.y)
    elif src.kind == "force_function":
        sig0 = (np.zeros(len(pts)) if src.initial is None
                else np.asarray(src.initial(pts[:, 0], pts[:, 1]), dtype=float))
    else:
        raise ConfigurationError(f"unknown source kind {src.kind!r}")
    sig0 = sig0.reshape(grid.ny, grid.nx)

    kmag = grid.k_magnitude()
    with np.errstate(divide="ignore"):
        kg1 = kmag ** (2.0 * beta1)
        kg12 = kmag ** (2.0 * beta2) if tau != 0.0 else np.zeros_like(kmag)
    kg1[0, 0] = 0.0
    kg12[0, 0] = 0.0

    dt = scenario.dt
    c2 = c_ph * c_ph
    denom = 1.0 - tau * dt * c2 * kg12

    snap_grid = SnapshotGrid.over_domain(dom, scenario.snapshot_nx, scenario.snapshot_ny)
    receivers = np.asarray(scenario.receivers, dtype=float).reshape(-1, 2)
    force = src.force if src.kind == "force_function" else None

    s_prev = np.fft.fft2(sig0)
    s_curr = s_prev.copy()

    n_steps = int(round(scenario.t_end / dt))
    pending = sorted(scenario.snapshot_times)
    snapshots = []
    trace_times = []
    trace_vals = []
    imax = []

    def real_field(s_hat):
        return np.real(np.fft.ifft2(s_hat))

    def record_layer(s_hat, t):
        f = real_field(s_hat)
        imax.append(float(np.abs(f).max()))
        trace_times.append(t)
        if len(receivers):
            trace_vals.append(_bilinear_periodic(f, grid, receivers[:, 0], receivers[:, 1]))
        else:
            trace_vals.append(np.zeros(0))
        while pending and abs(t - pending[0]) <= dt / 2:
            vals = _bilinear_periodic(f, grid, snap_grid.points[:, 0], snap_grid.points[:, 1])
            snapshots.append(Snapshot(time=pending.pop(0), grid=snap_grid,
                                      values=vals.reshape(snap_grid.ny, snap_grid.nx)))

    record_layer(s_prev, 0.0)
    record_layer(s_curr, dt)
    initial_peak = imax[0]

    n = 2
    for _ in range(n_steps):
        t_n = (n - 1) * dt
        rhs = (2.0 * s_curr - s_prev
               + eta * dt * dt * c2 * kg1 * s_curr
               - tau * dt * c2 * kg12 * s_curr)
        if force is not None:
            fv = np.asarray(force(gx.ravel(), gy.ravel(), t_n)).reshape(grid.ny, grid.nx)
            rhs = rhs + dt * dt * c2 * np.fft.fft2(fv)
        s_new = rhs / denom
        if not np.all(np.isfinite(s_new)):
            raise InstabilityError(f"non-finite spectrum at time layer {n + 1}",
                                   step_index=n + 1, max_magnitude=math.inf)
        s_prev, s_curr = s_curr, s_new
        n += 1
        record_layer(s_curr, (n - 1) * dt)

    return RunResult(
        snapshots=snapshots, trace_times=np.array(trace_times),
        trace_values=np.array(trace_vals), boundary_abs_max=np.zeros(0),
        interior_abs_max=np.array(imax), initial_peak=initial_peak,
        cloud=None, basis=None, final_state=None, field="spectral")
