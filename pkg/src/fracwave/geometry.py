"""Domain geometry: rectangles, simple polygons, collocation clouds, ray queries.

The solver needs three geometric services:

  * an inside/outside predicate, total over the plane,
  * collocation point clouds (lattice interior nodes plus boundary nodes
    resampled along the boundary at roughly the lattice spacing),
  * the distance from a point to the boundary along a given direction,
    which truncates the one-sided memory sums of the fractional operator.

Curved boundaries are represented as dense polygons; polygons admit exact
segment intersection for the ray queries. The inside test is even-odd ray
casting with a deterministic perturbation rule: when the test ray grazes a
vertex, the ray direction is rotated by a fixed tiny angle and the test is
repeated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, DomainError

__all__ = [
    "Domain2D",
    "PointCloud",
    "generate_cloud",
    "ray_exit_distance",
    "exit_distances",
    "read_polygon_file",
]

# Relative tolerances, scaled by the domain diameter where they are applied.
_BOUNDARY_TOL = 1e-9
_RAY_EPS = 1e-12
_GRAZE_ANGLE = 1e-7   # fixed perturbation when a cast ray hits a vertex


@dataclass(frozen=True, eq=False)
class Domain2D:
    """A rectangle or a simple (non-self-intersecting) closed polygon.

    Rectangles keep their bounds; polygons keep an ordered vertex array of
    shape (n, 2), implicitly closed. Both expose the same query surface.
    """

    kind: str
    x_min: float = 0.0
    x_max: float = 0.0
    y_min: float = 0.0
    y_max: float = 0.0
    vertices: np.ndarray = None

    @classmethod
    def rectangle(cls, x_min, x_max, y_min, y_max):
        if not (x_max > x_min and y_max > y_min):
            raise ConfigurationError(
                f"rectangle must have positive area, got x [{x_min}, {x_max}], "
                f"y [{y_min}, {y_max}]"
            )
        return cls(kind="rectangle", x_min=float(x_min), x_max=float(x_max),
                   y_min=float(y_min), y_max=float(y_max))

    @classmethod
    def polygon(cls, vertices):
        v = np.asarray(vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or len(v) < 3:
            raise ConfigurationError("polygon needs at least 3 (x, y) vertices")
        if np.allclose(v[0], v[-1]):
            v = v[:-1]
        if len(v) < 3:
            raise ConfigurationError("polygon needs at least 3 distinct vertices")
        area2 = np.sum(v[:, 0] * np.roll(v[:, 1], -1) - np.roll(v[:, 0], -1) * v[:, 1])
        if abs(area2) < 1e-30:
            raise ConfigurationError("polygon has zero area")
        dom = cls(kind="polygon",
                  x_min=float(v[:, 0].min()), x_max=float(v[:, 0].max()),
                  y_min=float(v[:, 1].min()), y_max=float(v[:, 1].max()),
                  vertices=v)
        if _polygon_self_intersects(v):
            raise ConfigurationError("polygon is self-intersecting")
        return dom

    @property
    def diameter(self):
        return math.hypot(self.x_max - self.x_min, self.y_max - self.y_min)

    def edges(self):
        """Edge start points A and edge vectors E = B - A, both (n, 2)."""
        v = self.vertices
        a = v
        e = np.roll(v, -1, axis=0) - v
        return a, e

    def contains(self, x, y):
        """Strict interior test, vectorized; boundary points report False."""
        res = self._contains_array(np.atleast_1d(np.asarray(x, dtype=float)),
                                   np.atleast_1d(np.asarray(y, dtype=float)))
        return res if res.size > 1 else bool(res[0])

    def _contains_array(self, x, y):
        if self.kind == "rectangle":
            tol = _BOUNDARY_TOL * self.diameter
            return ((x > self.x_min + tol) & (x < self.x_max - tol)
                    & (y > self.y_min + tol) & (y < self.y_max - tol))
        res = _polygon_contains(self.vertices, x, y, self.diameter)
        return res & ~self._on_boundary_array(x, y, _BOUNDARY_TOL * self.diameter)

    def on_boundary(self, x, y, tol=None):
        """True where (x, y) lies on the boundary within the placement tolerance."""
        if tol is None:
            tol = _BOUNDARY_TOL * self.diameter
        res = self._on_boundary_array(np.atleast_1d(np.asarray(x, dtype=float)),
                                      np.atleast_1d(np.asarray(y, dtype=float)), tol)
        return res if res.size > 1 else bool(res[0])

    def _on_boundary_array(self, x, y, tol):
        if self.kind == "rectangle":
            in_x = (x >= self.x_min - tol) & (x <= self.x_max + tol)
            in_y = (y >= self.y_min - tol) & (y <= self.y_max + tol)
            edge = ((np.abs(x - self.x_min) <= tol) | (np.abs(x - self.x_max) <= tol)
                    | (np.abs(y - self.y_min) <= tol) | (np.abs(y - self.y_max) <= tol))
            return in_x & in_y & edge
        a, e = self.edges()
        px = x[:, None] - a[None, :, 0]
        py = y[:, None] - a[None, :, 1]
        ee = np.einsum("ij,ij->i", e, e)
        t = np.clip((px * e[None, :, 0] + py * e[None, :, 1]) / ee[None, :], 0.0, 1.0)
        dx = px - t * e[None, :, 0]
        dy = py - t * e[None, :, 1]
        return np.min(dx * dx + dy * dy, axis=1) <= tol * tol

    def boundary_chain(self):
        """Closed vertex chain describing the boundary, for resampling."""
        if self.kind == "rectangle":
            return np.array([
                [self.x_min, self.y_min],
                [self.x_max, self.y_min],
                [self.x_max, self.y_max],
                [self.x_min, self.y_max],
            ])
        return self.vertices


def read_polygon_file(path):
    """Read a polygon domain: one "x y" vertex pair per line, implicitly closed."""
    verts = []
    with open(path) as fh:
        for ln, line in enumerate(fh, start=1):
            line = line.split("#")[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ConfigurationError(f"{path}:{ln}: expected 'x y', got {line!r}")
            verts.append((float(parts[0]), float(parts[1])))
    return Domain2D.polygon(verts)


def _polygon_self_intersects(v):
    n = len(v)
    a = v
    b = np.roll(v, -1, axis=0)
    for i in range(n):
        for j in range(i + 1, n):
            if j == i or (j + 1) % n == i or (i + 1) % n == j:
                continue  # shared endpoint with a neighbour is not a crossing
            if _segments_cross(a[i], b[i], a[j], b[j]):
                return True
    return False


def _segments_cross(p1, p2, q1, q2):
    d1 = _orient(q1, q2, p1)
    d2 = _orient(q1, q2, p2)
    d3 = _orient(p1, p2, q1)
    d4 = _orient(p1, p2, q2)
    return ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0))


def _orient(a, b, c):
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def _polygon_contains(v, x, y, diam):
    """Even-odd crossing count along a cast ray, vectorized over query points.

    The ray starts along +x; any query whose ray passes within a tiny band of
    a vertex is re-tested with the ray rotated by a fixed small angle.
    """
    res = np.zeros(x.shape, dtype=bool)
    pending = np.ones(x.shape, dtype=bool)
    angle = 0.0
    for _ in range(12):
        if not pending.any():
            break
        inside, grazed = _cast(v, x[pending], y[pending], angle, diam)
        idx = np.flatnonzero(pending)
        ok = ~grazed
        res[idx[ok]] = inside[ok]
        still = np.zeros(x.shape, dtype=bool)
        still[idx[grazed]] = True
        pending = still
        angle += _GRAZE_ANGLE
    if pending.any():
        # every retry grazed; accept the last parity rather than loop forever
        inside, _ = _cast(v, x[pending], y[pending], angle, diam)
        res[pending] = inside
    return res


def _cast(v, x, y, angle, diam):
    c, s = math.cos(angle), math.sin(angle)
    a = v
    e = np.roll(v, -1, axis=0) - v
    rx = x[:, None] - a[None, :, 0]
    ry = y[:, None] - a[None, :, 1]
    denom = c * e[None, :, 1] - s * e[None, :, 0]
    tiny = 1e-14 * max(diam, 1.0)
    safe = np.abs(denom) > tiny
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (rx * e[None, :, 1] - ry * e[None, :, 0]) / denom
        u = (rx * s - ry * c) / (-denom)
    hit = safe & (t > 0) & (u >= 0.0) & (u < 1.0)
    crossings = np.sum(hit, axis=1)
    vert_eps = 1e-9
    grazed = np.any(safe & (t > 0) & ((np.abs(u) < vert_eps) | (np.abs(u - 1.0) < vert_eps)), axis=1)
    grazed |= np.any(~safe & (np.abs(rx * e[None, :, 1] - ry * e[None, :, 0]) < tiny * diam), axis=1)
    return (crossings % 2).astype(bool), grazed


@dataclass(frozen=True, eq=False)
class PointCloud:
    """Collocation points: M interior nodes first, then N boundary nodes.

    interior and boundary are (M, 2) and (N, 2) arrays; all_points stacks
    them in that order, which fixes the global index convention used by
    every assembled matrix. spacing records the generating lattice step.
    """

    interior: np.ndarray
    boundary: np.ndarray
    spacing: float
    all_points: np.ndarray = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "interior", np.ascontiguousarray(self.interior, dtype=float))
        object.__setattr__(self, "boundary", np.ascontiguousarray(self.boundary, dtype=float))
        object.__setattr__(self, "all_points",
                           np.ascontiguousarray(np.vstack([self.interior, self.boundary])))

    @property
    def m(self):
        return len(self.interior)

    @property
    def n(self):
        return len(self.boundary)


def generate_cloud(domain: Domain2D, dx) -> PointCloud:
    """Lattice interior nodes plus arc-length resampled boundary nodes.

    Interior points are the nodes of the axis-aligned lattice of spacing dx
    anchored at the bounding-box corner that fall strictly inside the domain
    (for polygons, also at least dx/2 away from the boundary, which keeps the
    interpolation matrix well separated from the boundary nodes). Boundary
    points are placed along the boundary chain with spacing perimeter/N where
    N = round(perimeter/dx). Ordering is deterministic: row-major interior,
    then boundary traversal order.
    """
    if not dx > 0:
        raise ConfigurationError(f"lattice spacing must be positive, got {dx}")
    nx = int(round((domain.x_max - domain.x_min) / dx))
    ny = int(round((domain.y_max - domain.y_min) / dx))
    if nx < 2 or ny < 2:
        raise ConfigurationError("lattice spacing too large for the domain")
    xs = domain.x_min + dx * np.arange(nx + 1)
    ys = domain.y_min + dx * np.arange(ny + 1)
    X, Y = np.meshgrid(xs, ys)
    px, py = X.ravel(), Y.ravel()

    inside = np.atleast_1d(domain.contains(px, py))
    if domain.kind == "polygon":
        inside &= ~np.atleast_1d(domain.on_boundary(px, py, tol=0.5 * dx))
    interior = np.column_stack([px[inside], py[inside]])
    if len(interior) == 0:
        raise ConfigurationError("no interior points; reduce the lattice spacing")

    boundary = _resample_boundary(domain.boundary_chain(), dx)
    return PointCloud(interior=interior, boundary=boundary, spacing=float(dx))


def _resample_boundary(chain, dx):
    closed = np.vstack([chain, chain[:1]])
    seg = np.diff(closed, axis=0)
    seglen = np.hypot(seg[:, 0], seg[:, 1])
    perimeter = seglen.sum()
    n = max(int(round(perimeter / dx)), 3)
    s_targets = perimeter * np.arange(n) / n
    cum = np.concatenate([[0.0], np.cumsum(seglen)])
    idx = np.searchsorted(cum, s_targets, side="right") - 1
    idx = np.clip(idx, 0, len(seg) - 1)
    local = (s_targets - cum[idx]) / seglen[idx]
    pts = closed[idx] + local[:, None] * seg[idx]
    return pts


def ray_exit_distance(domain: Domain2D, x, y, theta):
    """Distance from (x, y) along direction (cos theta, sin theta) to the first exit.

    The point must lie inside the domain or on its boundary; a boundary point
    whose ray immediately leaves the domain gets 0. For rectangles this is the
    closed-form slab test; for polygons the first boundary crossing that
    actually leads outside (so a ray across a notch of a non-convex polygon
    stops at the notch, not at the far side).
    """
    c, s = math.cos(theta), math.sin(theta)
    inside = np.atleast_1d(domain.contains(x, y))[0]
    onb = np.atleast_1d(domain.on_boundary(x, y))[0]
    if not (inside or onb):
        raise DomainError(f"point ({x}, {y}) is outside the domain")
    if domain.kind == "rectangle":
        return float(_slab_exit(domain, np.array([x]), np.array([y]), c, s)[0])
    return float(_polygon_exit(domain, x, y, c, s))


def exit_distances(domain: Domain2D, points, theta):
    """Vectorized ray_exit_distance for an array of interior points."""
    c, s = math.cos(theta), math.sin(theta)
    return exit_distances_cs(domain, points, c, s)


def exit_distances_cs(domain: Domain2D, points, c, s):
    """Exit distances along the exact direction cosines (c, s)."""
    pts = np.asarray(points, dtype=float)
    if domain.kind == "rectangle":
        return _slab_exit(domain, pts[:, 0], pts[:, 1], c, s)
    return np.array([_polygon_exit(domain, p[0], p[1], c, s) for p in pts])


def _slab_exit(domain, x, y, c, s):
    tx = np.full(x.shape, np.inf)
    ty = np.full(y.shape, np.inf)
    if c > 0:
        tx = (domain.x_max - x) / c
    elif c < 0:
        tx = (domain.x_min - x) / c
    if s > 0:
        ty = (domain.y_max - y) / s
    elif s < 0:
        ty = (domain.y_min - y) / s
    return np.maximum(np.minimum(tx, ty), 0.0)


def _polygon_exit(domain, x, y, c, s):
    v = domain.vertices
    diam = domain.diameter
    zero_band = 1e-9 * diam   # crossings this close to the start sit on the boundary
    a = v
    e = np.roll(v, -1, axis=0) - v
    ts = np.empty(0)
    for attempt in range(12):
        ca, sa = c, s
        if attempt:
            rot = attempt * _GRAZE_ANGLE
            ca = c * math.cos(rot) - s * math.sin(rot)
            sa = c * math.sin(rot) + s * math.cos(rot)
        rx = x - a[:, 0]
        ry = y - a[:, 1]
        denom = ca * e[:, 1] - sa * e[:, 0]
        safe = np.abs(denom) > 1e-14 * max(diam, 1.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            t = (rx * e[:, 1] - ry * e[:, 0]) / denom
            u = (rx * sa - ry * ca) / (-denom)
        vert_eps = 1e-9
        hit = safe & (t > -zero_band) & (u >= -vert_eps) & (u < 1 + vert_eps)
        if np.any(hit & ((np.abs(u) < vert_eps) | (np.abs(u - 1.0) < vert_eps)) & (t > zero_band)):
            continue  # vertex graze ahead on the ray: rotate and retry
        ts = np.sort(t[hit])
        if len(ts) == 0:
            return 0.0
        first = ts[0]
        if first > zero_band:
            # strictly interior start: crossing an edge transversally from the
            # inside always leads outside, so the first crossing is the exit
            return float(first)
        # start sits on the boundary: does the ray leave immediately?
        probe = 1e-7 * diam
        if not np.atleast_1d(_polygon_contains(v, np.array([x + probe * ca]),
                                               np.array([y + probe * sa]), diam))[0]:
            return 0.0
        ahead = ts[ts > zero_band]
        return float(ahead[0]) if len(ahead) else 0.0
    return float(ts[0]) if len(ts) else 0.0
