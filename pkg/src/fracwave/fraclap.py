"""Fractional Laplacian of the RBFs via directional Grunwald-Letnikov sums.

The operator (-lap)^beta on the plane is decomposed over directions:

    (-lap)^beta u(x) = C_{2 beta, 2} * integral_0^{2 pi} D_theta^{2 beta} u(x) dtheta

where D_theta^a is the one-sided fractional directional derivative of order
a = 2 beta with memory running along -theta, and the scaling constant is

    C_{alpha, d} = Gamma((1 - alpha)/2) Gamma((d + alpha)/2) / (2 pi^((1 + d)/2)).

The exponent doubling matters: the order-a directional derivative has Fourier
symbol (i k.theta)^a, and averaging that symbol over the unit circle against
C_{a,2} yields exactly |k|^a, the symbol of (-lap)^(a/2). With beta = 1 this
machinery must and does reduce to the classical -lap (a = 2, C_{2,2} = -1/pi).

Each directional derivative is approximated by the vector Grunwald-Letnikov
sum with signed binomial weights on equispaced samples along -theta,

    D_theta^a u(x) ~ h^(-a) sum_k w_k u(x - k h theta),  w_k = (-1)^k binom(a, k),

truncated at the index [d/h] where d is the exit distance of the ray from the
domain (the field is zero-extended outside, so dropped samples contribute
nothing) and [.] rounds half up. The truncation error is O(h). The direction
integral uses the compound trapezoid rule, which for a periodic integrand is
a plain average over n_theta equally spaced angles.

Directions are tabulated with exact reflection symmetry (mirror pairs share
bit-identical cosines up to sign), so symmetric clouds produce exactly
symmetric matrices and odd-order error terms cancel in the direction sum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DomainError
from .geometry import Domain2D, PointCloud, exit_distances_cs
from .rbf import RbfBasis

try:
    from numba import njit, prange

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    _HAVE_NUMBA = False

__all__ = [
    "FracOpConfig",
    "GlWeights",
    "scaling_constant",
    "gl_weights",
    "gl_directional",
    "gl_directional_fn",
    "frac_laplacian_matrix",
    "frac_laplacian_matrices",
    "frac_laplacian_of_function",
    "direction_table",
]


@dataclass(frozen=True)
class FracOpConfig:
    """Discretization knobs for the directional fractional Laplacian.

    h is the Grunwald-Letnikov step in metres; n_theta the number of
    trapezoid directions (the compound rule on a periodic integrand reduces
    to n_theta distinct angles theta_l = 2 pi l / n_theta).
    """

    h: float = 1.0
    n_theta: int = 20

    def __post_init__(self):
        if not self.h > 0:
            raise ConfigurationError(f"GL step must be positive, got {self.h}")
        if self.n_theta < 4 or self.n_theta % 2:
            raise ConfigurationError(
                f"n_theta must be even and at least 4, got {self.n_theta}"
            )


@dataclass(frozen=True, eq=False)
class GlWeights:
    """Signed binomial weights w_k = (-1)^k binom(beta, k), k = 0..K."""

    beta: float
    w: np.ndarray


def scaling_constant(alpha, d=2):
    """C_{alpha,d} = Gamma((1-alpha)/2) Gamma((d+alpha)/2) / (2 pi^((1+d)/2)).

    Gamma at negative non-integer arguments is computed with the reflection
    formula Gamma(z) Gamma(1-z) = pi / sin(pi z). Arguments at a Gamma pole
    raise DomainError naming the offending value.
    """
    za = (1.0 - alpha) / 2.0
    zb = (d + alpha) / 2.0
    for z, label in ((za, "(1-alpha)/2"), (zb, "(d+alpha)/2")):
        if z <= 0 and abs(z - round(z)) < 1e-12:
            raise DomainError(
                f"scaling constant pole: Gamma argument {label} = {z} for alpha = {alpha}"
            )
    return _gamma(za) * _gamma(zb) / (2.0 * math.pi ** ((1.0 + d) / 2.0))


def _gamma(z):
    if z > 0:
        return math.gamma(z)
    # reflection: Gamma(z) = pi / (sin(pi z) Gamma(1 - z)), valid off the poles
    return math.pi / (math.sin(math.pi * z) * math.gamma(1.0 - z))


def gl_weights(beta, count):
    """Weights by the stable recurrence w_0 = 1, w_k = w_{k-1} (k - 1 - beta)/k."""
    if count < 0:
        raise DomainError(f"weight count must be non-negative, got {count}")
    w = np.empty(count + 1)
    w[0] = 1.0
    for k in range(1, count + 1):
        w[k] = w[k - 1] * (k - 1 - beta) / k
    return GlWeights(beta=beta, w=w)


def direction_table(n_theta):
    """Unit direction cosines (cos, sin) at theta_l = 2 pi l / n_theta.

    Built by quadrant reflection so that mirror pairs (theta -> pi - theta)
    and antipodes (theta -> theta + pi) have exactly negated/equal entries;
    axis directions are exact. Requires even n_theta.
    """
    c = np.empty(n_theta)
    s = np.empty(n_theta)
    half = n_theta // 2
    for l in range(half + 1):
        if 4 * l < n_theta:
            if l == 0:
                c[l], s[l] = 1.0, 0.0
            else:
                ang = 2.0 * math.pi * l / n_theta
                c[l], s[l] = math.cos(ang), math.sin(ang)
        elif 4 * l == n_theta:
            c[l], s[l] = 0.0, 1.0
        else:
            m = half - l
            c[l], s[l] = -c[m], s[m]
    for l in range(half + 1, n_theta):
        m = n_theta - l
        c[l], s[l] = c[m], -s[m]
    return c, s


def _round_half_up(x):
    return int(math.floor(x + 0.5))


def gl_directional(basis: RbfBasis, source, eval_point, theta, beta, h, cutoff):
    """Order-beta GL directional derivative of phi(|. - source|) at eval_point.

    cutoff is the exit distance of the ray along -theta supplied by the
    geometry layer; the sum runs to [cutoff/h] with half rounding up. phi is
    defined on the whole plane, so the trailing sample may fall just outside
    the domain without harm.
    """
    if not h > 0:
        raise DomainError(f"GL step must be positive, got {h}")
    kk = max(_round_half_up(cutoff / h), 0)
    w = gl_weights(beta, kk).w
    k = np.arange(kk + 1)
    sx = eval_point[0] - k * h * math.cos(theta) - source[0]
    sy = eval_point[1] - k * h * math.sin(theta) - source[1]
    vals = np.sqrt(sx * sx + sy * sy + basis.shape * basis.shape)
    return h ** (-beta) * float(w @ vals)


def gl_directional_fn(fn, eval_point, theta, beta, h, cutoff, inside=None):
    """Order-beta GL directional derivative of a sampled function.

    fn(x_array, y_array) -> values. When an inside(x, y) predicate is given,
    samples outside it contribute zero (the zero exterior extension); use
    this whenever fn is only defined on the domain.
    """
    if not h > 0:
        raise DomainError(f"GL step must be positive, got {h}")
    kk = max(_round_half_up(cutoff / h), 0)
    w = gl_weights(beta, kk).w
    k = np.arange(kk + 1)
    sx = eval_point[0] - k * h * math.cos(theta)
    sy = eval_point[1] - k * h * math.sin(theta)
    if inside is None:
        vals = np.asarray(fn(sx, sy), dtype=float)
    else:
        mask = np.atleast_1d(inside(sx, sy))
        vals = np.zeros(kk + 1)
        if mask.any():
            vals[mask] = fn(sx[mask], sy[mask])
    return h ** (-beta) * float(w @ vals)


def _truncation_indices(domain, points, cos_t, sin_t, h):
    """K[i, l] = [exit distance along -theta_l from point i / h], half up."""
    m = len(points)
    n_t = len(cos_t)
    kmat = np.empty((m, n_t), dtype=np.int64)
    for l in range(n_t):
        d = exit_distances_cs(domain, points, -cos_t[l], -sin_t[l])
        kmat[:, l] = np.floor(d / h + 0.5).astype(np.int64)
    return kmat


def frac_laplacian_matrix(basis, cloud, domain, beta, cfg, engine="auto"):
    """Dense M x (M+N) matrix of (-lap)^beta applied to each basis column.

    Rows are the interior points, columns all M+N sources. Entry (i, j) is
    (2 pi C_{2 beta,2} / n_theta) sum_l of the order-(2 beta) GL directional
    derivative of phi(|. - x_j|) at x_i along theta_l, each sum truncated at
    the domain exit distance along -theta_l.
    """
    return frac_laplacian_matrices(basis, cloud, domain, [beta], cfg, engine=engine)[0]


def frac_laplacian_matrices(basis, cloud, domain, betas, cfg, engine="auto"):
    """Assemble matrices for several operator exponents in one sweep.

    The GL sample geometry depends only on (h, n_theta, cloud, domain), so
    all exponents share the kernel evaluations; only the weight tables and
    scaling constants differ. This halves the cost of building the pair of
    operators the time stepper needs.
    """
    for b in betas:
        if not (0.0 < b < 2.0):
            raise DomainError(f"operator exponent must lie in (0, 2), got {b}")
    consts = [scaling_constant(2.0 * b) for b in betas]  # may raise: poles propagate
    if cloud.m == 0:
        raise ConfigurationError("cloud has no interior points")

    cos_t, sin_t = direction_table(cfg.n_theta)
    kmat = _truncation_indices(domain, cloud.interior, cos_t, sin_t, cfg.h)
    kmax = int(kmat.max())
    weights = np.zeros((len(betas), kmax + 1))
    for bi, b in enumerate(betas):
        weights[bi] = gl_weights(2.0 * b, kmax).w

    if engine == "auto":
        engine = "numba" if _HAVE_NUMBA else "numpy"
    if engine == "numba" and not _HAVE_NUMBA:
        raise ConfigurationError("numba engine requested but numba is unavailable")

    if engine == "numba":
        raw = _assemble_numba(cloud, basis.shape, cos_t, sin_t, cfg.h, kmat, weights)
    else:
        raw = _assemble_numpy(cloud, basis.shape, cos_t, sin_t, cfg.h, kmat, weights)

    out = []
    for bi, b in enumerate(betas):
        a = 2.0 * b
        scale = (2.0 * math.pi * consts[bi] / cfg.n_theta) * cfg.h ** (-a)
        out.append(scale * raw[bi])
    return out


def _mirror_pairs(n_theta):
    """Directions grouped as (l, mirror(l)) about the vertical axis.

    theta -> pi - theta maps index l to (n/2 - l) mod n. Accumulating each
    pair with one commutative two-term addition makes assembled matrices on
    mirror-symmetric clouds exactly symmetric, since swapping the operands
    of a float addition never changes the rounded result.
    """
    half = n_theta // 2
    pairs = []
    seen = set()
    for l in range(n_theta):
        if l in seen:
            continue
        m = (half - l) % n_theta
        seen.add(l)
        if m == l:
            pairs.append((l, -1))
        else:
            seen.add(m)
            pairs.append((l, m))
    return pairs


def _one_direction_numpy(cloud, ax, ay, p2, c, s, h, kl, weights, out):
    """Accumulate one direction's weighted GL kernel sums into out (nb, M, M+N)."""
    m = cloud.m
    order = np.argsort(-kl, kind="stable")
    ks = kl[order]
    pts = cloud.interior[order]
    kmax_l = int(ks[0])
    m_at = np.searchsorted(-ks, -np.arange(kmax_l + 1), side="right")
    nb = len(weights)
    acc = np.zeros_like(out)
    for k in range(kmax_l + 1):
        rows = m_at[k]
        if rows == 0:
            break
        if not np.any(weights[:, k]):
            continue
        sx = pts[:rows, 0] - k * h * c
        sy = pts[:rows, 1] - k * h * s
        blk = np.sqrt(
            (sx[:, None] - ax[None, :]) ** 2
            + (sy[:, None] - ay[None, :]) ** 2
            + p2
        )
        for bi in range(nb):
            if weights[bi, k]:
                acc[bi, :rows] += weights[bi, k] * blk
    inv = np.empty(m, dtype=np.int64)
    inv[order] = np.arange(m)
    out += acc[:, inv]


def _assemble_numpy(cloud, p, cos_t, sin_t, h, kmat, weights):
    """Pure numpy assembly; rows sorted by truncation length so the active
    set at each lag k is a contiguous prefix. Directions are combined in
    mirror pairs (see _mirror_pairs)."""
    m, total = cloud.m, cloud.m + cloud.n
    nb = len(weights)
    ax = cloud.all_points[:, 0]
    ay = cloud.all_points[:, 1]
    p2 = p * p
    outs = np.zeros((nb, m, total))
    buf_a = np.zeros((nb, m, total))
    buf_b = np.zeros((nb, m, total))
    for (la, lb) in _mirror_pairs(len(cos_t)):
        buf_a[:] = 0.0
        _one_direction_numpy(cloud, ax, ay, p2, cos_t[la], sin_t[la], h,
                             kmat[:, la], weights, buf_a)
        if lb < 0:
            outs += buf_a
        else:
            buf_b[:] = 0.0
            _one_direction_numpy(cloud, ax, ay, p2, cos_t[lb], sin_t[lb], h,
                                 kmat[:, lb], weights, buf_b)
            outs += buf_a + buf_b
    return outs


if _HAVE_NUMBA:

    @njit(parallel=True, fastmath=True, cache=True)
    def _gl_kernel_pair(pts, ax, ay, p2, cos_t, sin_t, h, kmat, w1, w2, out1, out2):
        m = pts.shape[0]
        total = ax.shape[0]
        n_t = cos_t.shape[0]
        for i in prange(m):
            xi = pts[i, 0]
            yi = pts[i, 1]
            for l in range(n_t):
                kk = kmat[i, l]
                c = cos_t[l]
                s = sin_t[l]
                for k in range(kk + 1):
                    wk1 = w1[k]
                    wk2 = w2[k]
                    if wk1 == 0.0 and wk2 == 0.0:
                        continue
                    sx = xi - k * h * c
                    sy = yi - k * h * s
                    for j in range(total):
                        dx = sx - ax[j]
                        dy = sy - ay[j]
                        ph = np.sqrt(dx * dx + dy * dy + p2)
                        out1[i, j] += wk1 * ph
                        out2[i, j] += wk2 * ph

    @njit(parallel=True, fastmath=True, cache=True)
    def _gl_kernel_single(pts, ax, ay, p2, cos_t, sin_t, h, kmat, w1, out1):
        m = pts.shape[0]
        total = ax.shape[0]
        n_t = cos_t.shape[0]
        for i in prange(m):
            xi = pts[i, 0]
            yi = pts[i, 1]
            for l in range(n_t):
                kk = kmat[i, l]
                c = cos_t[l]
                s = sin_t[l]
                for k in range(kk + 1):
                    wk1 = w1[k]
                    if wk1 == 0.0:
                        continue
                    sx = xi - k * h * c
                    sy = yi - k * h * s
                    for j in range(total):
                        dx = sx - ax[j]
                        dy = sy - ay[j]
                        ph = np.sqrt(dx * dx + dy * dy + p2)
                        out1[i, j] += wk1 * ph


def _assemble_numba(cloud, p, cos_t, sin_t, h, kmat, weights):
    m, total = cloud.m, cloud.m + cloud.n
    nb = len(weights)
    ax = np.ascontiguousarray(cloud.all_points[:, 0])
    ay = np.ascontiguousarray(cloud.all_points[:, 1])
    pts = np.ascontiguousarray(cloud.interior)

    def one_direction(l, outs_l):
        ct = cos_t[l:l + 1].copy()
        st = sin_t[l:l + 1].copy()
        kl = np.ascontiguousarray(kmat[:, l:l + 1])
        idx = 0
        while idx < nb:
            if idx + 1 < nb:
                _gl_kernel_pair(pts, ax, ay, p * p, ct, st, float(h), kl,
                                weights[idx], weights[idx + 1],
                                outs_l[idx], outs_l[idx + 1])
                idx += 2
            else:
                _gl_kernel_single(pts, ax, ay, p * p, ct, st, float(h), kl,
                                  weights[idx], outs_l[idx])
                idx += 1

    outs = np.zeros((nb, m, total))
    buf_a = np.zeros((nb, m, total))
    buf_b = np.zeros((nb, m, total))
    for (la, lb) in _mirror_pairs(len(cos_t)):
        buf_a[:] = 0.0
        one_direction(la, buf_a)
        if lb < 0:
            outs += buf_a
        else:
            buf_b[:] = 0.0
            one_direction(lb, buf_b)
            outs += buf_a + buf_b
    return outs


def warm_up():
    """Trigger JIT compilation of the assembly kernels on a tiny problem.

    Call once before timing assembly; a no-op on the numpy path.
    """
    if not _HAVE_NUMBA:
        return
    pts = np.array([[0.5, 0.5]])
    ax = np.array([0.5, 0.0])
    ay = np.array([0.5, 0.0])
    kmat = np.array([[1, 1, 1, 1]], dtype=np.int64)
    cos_t, sin_t = direction_table(4)
    w = np.array([1.0, -2.0, 1.0])
    out = np.zeros((1, 1, 2))
    _gl_kernel_single(pts, ax, ay, 0.01, cos_t, sin_t, 0.25, kmat, w, out[0])
    out2 = np.zeros((2, 1, 2))
    _gl_kernel_pair(pts, ax, ay, 0.01, cos_t, sin_t, 0.25, kmat, w, w, out2[0], out2[1])


def _closed_domain_mask(domain, x, y):
    """Samples eligible for evaluation: the closed domain, nothing outside.

    Rectangles use exact closed-box comparisons so fn is never called past
    the boundary; polygons include the hairline on-boundary band, which fn
    must tolerate.
    """
    if domain.kind == "rectangle":
        return ((x >= domain.x_min) & (x <= domain.x_max)
                & (y >= domain.y_min) & (y <= domain.y_max))
    return (np.atleast_1d(domain.contains(x, y))
            | np.atleast_1d(domain.on_boundary(x, y)))


def frac_laplacian_of_function(fn, domain, points, beta, cfg):
    """(-lap)^beta of a sampled function at the given points.

    fn(x_array, y_array) -> values, defined on the closed domain and
    zero-extended outside it: samples beyond the boundary contribute
    nothing. Used for force terms where the operator must act on a known
    field rather than on the basis functions.
    """
    if not (0.0 < beta < 2.0):
        raise DomainError(f"operator exponent must lie in (0, 2), got {beta}")
    const = scaling_constant(2.0 * beta)
    a = 2.0 * beta
    points = np.asarray(points, dtype=float)
    m = len(points)
    cos_t, sin_t = direction_table(cfg.n_theta)
    kmat = _truncation_indices(domain, points, cos_t, sin_t, cfg.h)
    kmax = int(kmat.max())
    w = gl_weights(a, kmax).w
    h = cfg.h

    tot = np.zeros(m)
    for l in range(cfg.n_theta):
        kl = kmat[:, l]
        order = np.argsort(-kl, kind="stable")
        ks = kl[order]
        pts = points[order]
        kmax_l = int(ks[0])
        m_at = np.searchsorted(-ks, -np.arange(kmax_l + 1), side="right")
        acc = np.zeros(m)
        for k in range(kmax_l + 1):
            rows = m_at[k]
            if rows == 0:
                break
            if w[k] == 0.0:
                continue
            sx = pts[:rows, 0] - k * h * cos_t[l]
            sy = pts[:rows, 1] - k * h * sin_t[l]
            ins = _closed_domain_mask(domain, sx, sy)
            vals = np.zeros(rows)
            if ins.any():
                vals[ins] = fn(sx[ins], sy[ins])
            acc[:rows] += w[k] * vals
        inv = np.empty(m, dtype=np.int64)
        inv[order] = np.arange(m)
        tot += acc[inv]
    return (2.0 * math.pi * const / cfg.n_theta) * h ** (-a) * tot
