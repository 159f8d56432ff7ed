"""Physical parameter model for nearly constant-Q viscoacoustic media.

Converts user inputs (reference velocity, quality factor Q, reference angular
frequency) into the coefficients of the governing wave equation

    (1/c^2) sigma_tt = eta (-lap)^(gamma+1) sigma + tau d/dt (-lap)^(gamma+1/2) sigma

with

    gamma = arctan(1/Q) / pi                      (dimensionless, in [0, 0.5))
    eta   = -c0^(2 gamma) w0^(-2 gamma) cos(pi gamma)
    tau   = -c0^(2 gamma - 1) w0^(-2 gamma) sin(pi gamma)
    c     = c0 cos(pi gamma / 2)                  (phase velocity, m/s)

where c0 is the reference velocity at the reference angular frequency w0.
Infinite Q is a first-class input: it gives gamma = 0, eta = -1, tau = 0 and
the equation reduces to the classical wave equation.

Units: c0 in m/s, w0 in rad/s, density in g/cm^3. The density is carried for
provenance only; it enters no solved equation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, CoverageError, DomainError

__all__ = [
    "MediumParams",
    "MediumSpec",
    "VelocityField",
    "gamma_from_q",
    "derive_coefficients",
    "dispersion_curve",
    "sample_velocity",
    "constant_velocity",
    "layered_velocity",
    "raster_velocity",
    "read_velocity_raster",
]


def gamma_from_q(q):
    """Fractional exponent gamma = arctan(1/Q)/pi for quality factor Q > 0.

    Infinite Q returns exactly 0 (no attenuation). gamma is strictly
    decreasing in Q and lies in (0, 0.25] for Q >= 1.
    """
    if math.isinf(q) and q > 0:
        return 0.0
    if not q > 0 or math.isnan(q):
        raise DomainError(f"quality factor must be positive or infinite, got {q}")
    return math.atan(1.0 / q) / math.pi


def derive_coefficients(c0, gamma, omega0):
    """Coefficients (eta, tau, c_phase) of the governing equation.

    Parameters
    ----------
    c0 : float
        Reference velocity at omega0, m/s. Must be positive.
    gamma : float
        Fractional exponent in [0, 0.5).
    omega0 : float
        Reference angular frequency, rad/s. Must be positive.
    """
    if not c0 > 0:
        raise DomainError(f"reference velocity must be positive, got {c0}")
    if not omega0 > 0:
        raise DomainError(f"reference frequency must be positive, got {omega0}")
    if not (0.0 <= gamma <= 0.5):
        raise DomainError(f"gamma must lie in [0, 0.5], got {gamma}")
    eta = -(c0 ** (2 * gamma)) * omega0 ** (-2 * gamma) * math.cos(math.pi * gamma)
    tau = -(c0 ** (2 * gamma - 1)) * omega0 ** (-2 * gamma) * math.sin(math.pi * gamma)
    c_phase = c0 * math.cos(math.pi * gamma / 2)
    return eta, tau, c_phase


@dataclass(frozen=True)
class MediumParams:
    """Derived equation coefficients at one point of the medium.

    Attributes
    ----------
    q_factor : float
        Quality factor Q (math.inf for the lossless limit).
    omega0 : float
        Reference angular frequency, rad/s.
    gamma : float
        Fractional exponent arctan(1/Q)/pi.
    eta : float
        Dispersion-term coefficient, units c0^(2 gamma) w0^(-2 gamma).
    tau : float
        Attenuation-term coefficient, units c0^(2 gamma - 1) w0^(-2 gamma).
    rho0 : float
        Acoustic density in g/cm^3. Stored for provenance, never used by
        the solved equation.
    """

    q_factor: float
    omega0: float
    gamma: float
    eta: float
    tau: float
    rho0: float = 1.0

    @classmethod
    def from_quality(cls, c0, q, omega0, rho0=1.0):
        """Build the parameter set for local reference velocity c0 and quality Q."""
        gamma = gamma_from_q(q)
        eta, tau, _ = derive_coefficients(c0, gamma, omega0)
        return cls(q_factor=q, omega0=omega0, gamma=gamma, eta=eta, tau=tau, rho0=rho0)


def dispersion_curve(params: MediumParams, c0, omegas):
    """Frequency-dependent phase velocity and attenuation coefficient.

    Returns a list of (c(w), alpha(w)) pairs with

        c(w)     = c0 (w/w0)^gamma
        alpha(w) = w0^gamma tan(pi gamma / 2) w^(1 - gamma) / c0

    valid in the regime |gamma ln(w/w0)| << 1. alpha vanishes identically
    for gamma = 0 and scales like w^(1 - gamma) otherwise.
    """
    g = params.gamma
    w0 = params.omega0
    out = []
    for w in omegas:
        if not w > 0:
            raise DomainError(f"angular frequency must be positive, got {w}")
        c = c0 * (w / w0) ** g
        alpha = (w0 ** g) * math.tan(math.pi * g / 2) * w ** (1 - g) / c0
        out.append((c, alpha))
    return out


@dataclass(frozen=True, eq=False)
class VelocityField:
    """Reference velocity c0(x, y) in m/s.

    kind is one of:
      "constant" : value everywhere
      "layered"  : horizontal layers, each (y_low, y_high, c0) with lookup on
                   half-open intervals [y_low, y_high)
      "raster"   : regular grid of node values, bilinear interpolation inside
                   the covered box

    Raster node (i, j) sits at (x0 + j*dx, y0 + i*dy); values are row-major,
    row i sweeping x. The text file format is a header line
    "rows cols dx dy x0 y0" followed by rows*cols whitespace-separated values.
    """

    kind: str
    value: float = 0.0
    layers: tuple = ()
    rows: int = 0
    cols: int = 0
    dx: float = 0.0
    dy: float = 0.0
    x0: float = 0.0
    y0: float = 0.0
    values: np.ndarray = None

    def coverage(self):
        """Covered box (x_min, x_max, y_min, y_max); infinite axes use inf."""
        if self.kind == "constant":
            return (-math.inf, math.inf, -math.inf, math.inf)
        if self.kind == "layered":
            lo = min(l[0] for l in self.layers)
            hi = max(l[1] for l in self.layers)
            return (-math.inf, math.inf, lo, hi)
        return (
            self.x0,
            self.x0 + (self.cols - 1) * self.dx,
            self.y0,
            self.y0 + (self.rows - 1) * self.dy,
        )


def constant_velocity(c0):
    if not c0 > 0:
        raise ConfigurationError(f"velocity must be positive, got {c0}")
    return VelocityField(kind="constant", value=float(c0))


def layered_velocity(layers):
    """Layered field from (y_low, y_high, c0) triples; intervals must not overlap."""
    layers = tuple((float(a), float(b), float(c)) for a, b, c in layers)
    if not layers:
        raise ConfigurationError("layered velocity needs at least one layer")
    for a, b, c in layers:
        if not b > a:
            raise ConfigurationError(f"layer interval [{a}, {b}) is empty")
        if not c > 0:
            raise ConfigurationError(f"layer velocity must be positive, got {c}")
    srt = sorted(layers)
    for (a1, b1, _), (a2, _, _) in zip(srt, srt[1:]):
        if a2 < b1:
            raise ConfigurationError("layer intervals overlap")
    return VelocityField(kind="layered", layers=srt)


def raster_velocity(rows, cols, dx, dy, x0, y0, values):
    values = np.asarray(values, dtype=float).reshape(rows, cols)
    if rows < 2 or cols < 2:
        raise ConfigurationError("raster needs at least 2x2 nodes")
    if not (dx > 0 and dy > 0):
        raise ConfigurationError("raster cell sizes must be positive")
    if not np.all(values > 0):
        raise ConfigurationError("raster velocities must all be positive")
    return VelocityField(
        kind="raster", rows=rows, cols=cols, dx=float(dx), dy=float(dy),
        x0=float(x0), y0=float(y0), values=values,
    )


def read_velocity_raster(path):
    """Read a raster velocity file: header "rows cols dx dy x0 y0", then values."""
    with open(path) as fh:
        tokens = fh.read().split()
    if len(tokens) < 6:
        raise ConfigurationError(f"raster file {path}: missing header")
    rows, cols = int(tokens[0]), int(tokens[1])
    dx, dy, x0, y0 = (float(t) for t in tokens[2:6])
    vals = [float(t) for t in tokens[6:]]
    if len(vals) != rows * cols:
        raise ConfigurationError(
            f"raster file {path}: expected {rows * cols} values, got {len(vals)}"
        )
    return raster_velocity(rows, cols, dx, dy, x0, y0, vals)


def sample_velocity(field: VelocityField, x, y):
    """Sample c0 at (x, y); accepts scalars or broadcastable arrays.

    Constant fields return the constant; layered fields look up the layer
    containing y (lower boundary inclusive); rasters interpolate bilinearly
    and reproduce node values exactly at the nodes. Points outside coverage
    raise CoverageError.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    scalar = x.ndim == 0 and y.ndim == 0
    x, y = np.atleast_1d(x), np.atleast_1d(y)

    if field.kind == "constant":
        out = np.full(np.broadcast(x, y).shape, field.value)
    elif field.kind == "layered":
        out = np.full(np.broadcast(x, y).shape, np.nan)
        yb = np.broadcast_to(y, out.shape)
        for (ylo, yhi, c) in field.layers:
            out[(yb >= ylo) & (yb < yhi)] = c
        # topmost boundary belongs to the last layer so the covered box is closed
        top = max(l[1] for l in field.layers)
        ctop = [l[2] for l in field.layers if l[1] == top][0]
        out[yb == top] = ctop
        if np.any(np.isnan(out)):
            bad = yb[np.isnan(out)].ravel()[0]
            raise CoverageError(f"y = {bad} outside layered coverage")
    else:
        gx = (x - field.x0) / field.dx
        gy = (y - field.y0) / field.dy
        eps = 1e-9
        if np.any(gx < -eps) or np.any(gx > field.cols - 1 + eps) or \
           np.any(gy < -eps) or np.any(gy > field.rows - 1 + eps):
            raise CoverageError("point outside raster coverage")
        gx = np.clip(gx, 0.0, field.cols - 1)
        gy = np.clip(gy, 0.0, field.rows - 1)
        jx = np.minimum(gx.astype(int), field.cols - 2)
        iy = np.minimum(gy.astype(int), field.rows - 2)
        fx = gx - jx
        fy = gy - iy
        v = field.values
        out = (
            v[iy, jx] * (1 - fx) * (1 - fy)
            + v[iy, jx + 1] * fx * (1 - fy)
            + v[iy + 1, jx] * (1 - fx) * fy
            + v[iy + 1, jx + 1] * fx * fy
        )
    return float(out[()]) if scalar else out


@dataclass(frozen=True)
class MediumSpec:
    """A complete medium description: velocity field plus Q and omega0.

    The fractional exponent gamma is spatially constant (Q is a single
    number); only the velocity may vary, so the equation coefficients
    eta, tau, c become per-point values derived from the local c0.
    """

    velocity: VelocityField
    q_factor: float
    omega0: float
    rho0: float = 1.0

    @property
    def gamma(self):
        return gamma_from_q(self.q_factor)

    def params_at(self, x, y):
        c0 = sample_velocity(self.velocity, x, y)
        return MediumParams.from_quality(c0, self.q_factor, self.omega0, self.rho0)
