"""Multiquadric radial basis function, kernel matrices, and interpolation.

The basis is phi(r) = sqrt(r^2 + p^2) with shape parameter p > 0, evaluated
exactly as written. The default p equals the cloud's generating spacing.
Interpolation solves the dense square system [Phi_d; Phi_b] lambda = values
with one LU factorization plus a single iterative-refinement pass;
multiquadric systems are ill-conditioned enough that the cheap refinement
step is worth it. No regularization is applied unless a diagonal shift is
requested explicitly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
from scipy.linalg import get_lapack_funcs

from .errors import ConditioningError, DomainError
from .geometry import PointCloud

__all__ = ["RbfBasis", "phi", "kernel_matrix", "interpolate"]

RESIDUAL_RTOL = 1e-8


@dataclass(frozen=True)
class RbfBasis:
    """Multiquadric basis with shape parameter p (same length unit as the points)."""

    shape: float
    kind: str = "multiquadric"

    def __post_init__(self):
        if not self.shape > 0:
            raise DomainError(f"shape parameter must be positive, got {self.shape}")
        if self.kind != "multiquadric":
            raise DomainError(f"unsupported basis kind {self.kind!r}")


def phi(basis: RbfBasis, r):
    """phi(r) = sqrt(r^2 + p^2); strictly increasing, phi(0) = p."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise DomainError("radius must be non-negative")
    return np.sqrt(r * r + basis.shape * basis.shape)


def kernel_matrix(basis: RbfBasis, rows, cols):
    """Dense matrix of phi(|rows_i - cols_j|).

    Used with rows = interior points for the PDE block and rows = boundary
    points for the boundary block, against all M+N source columns.
    """
    rows = np.asarray(rows, dtype=float)
    cols = np.asarray(cols, dtype=float)
    dx = rows[:, 0, None] - cols[None, :, 0]
    dy = rows[:, 1, None] - cols[None, :, 1]
    return np.sqrt(dx * dx + dy * dy + basis.shape * basis.shape)


def interpolate(basis: RbfBasis, cloud: PointCloud, values, diagonal_shift=0.0):
    """Solve the collocation interpolation system for the coefficient vector.

    Returns lambda with [Phi_d; Phi_b] lambda = values, solved by LU with
    partial pivoting plus one iterative-refinement pass. Raises
    ConditioningError (with an rcond estimate) if the matrix is singular or
    the refined residual exceeds RESIDUAL_RTOL * (1 + max|values|).
    """
    values = np.asarray(values, dtype=float)
    total = cloud.m + cloud.n
    if values.shape != (total,):
        raise DomainError(f"expected {total} values, got shape {values.shape}")
    a = kernel_matrix(basis, cloud.all_points, cloud.all_points)
    if diagonal_shift:
        a = a + diagonal_shift * np.eye(total)
    return solve_with_refinement(a, values)


def solve_with_refinement(a, b):
    """LU solve with one refinement pass and a residual acceptance check."""
    anorm = np.linalg.norm(a, 1)
    try:
        lu, piv = sla.lu_factor(a)
    except (ValueError, sla.LinAlgError) as exc:
        raise ConditioningError(f"factorization failed: {exc}") from exc
    def fail(resid, bound):
        gecon = get_lapack_funcs("gecon", (a,))
        rcond = float(gecon(lu, anorm)[0])
        raise ConditioningError(
            f"linear system too ill-conditioned: residual {resid:.3e} "
            f"exceeds {bound:.3e} (rcond ~ {rcond:.3e})",
            rcond=rcond,
        )

    bound = RESIDUAL_RTOL * (1.0 + np.max(np.abs(b)))
    x = sla.lu_solve((lu, piv), b)
    if not np.all(np.isfinite(x)):
        fail(math.inf, bound)
    x += sla.lu_solve((lu, piv), b - a @ x)
    resid = np.max(np.abs(b - a @ x))
    if not np.all(np.isfinite(x)) or resid > bound:
        fail(resid, bound)
    return x
