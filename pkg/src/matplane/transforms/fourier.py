"""Matrix-space Fourier transform and the slice identity.

The forward transform uses the kernel exp(+i tr(y'x)) with no 2 pi
factor; the inverse carries (2 pi)^(-nm).  The slice identity equates
the ambient transform at y = xi b with the offset-variable transform of
the plane data at frame xi.
"""

from __future__ import annotations

import numpy as np

from ..errors import InjectivityViolated, RankDeficient
from ..matspace import (complete_to_rotation, polar_decompose, spd_sqrt,
                        standard_frame, transpose)
from ..quadrature import IntegralResult, QuadratureSpec, integrate_matrix_space
from .fields import FieldFunction
from .radon import in_plane_rule, radon_at_offsets

_TINY = 1e-300


def fourier(f: FieldFunction, y: np.ndarray, spec: QuadratureSpec) -> IntegralResult:
    """Fourier transform of f at the matrix frequency y."""
    n, m = f.dims
    y = np.asarray(y, dtype=float)

    def integrand(x):
        phase = np.sum(y * x, axis=(-2, -1))
        return np.exp(1j * phase) * f.evaluate(x)

    return integrate_matrix_space(integrand, n, m, spec)


def slice_decompose(y: np.ndarray, dims) -> tuple:
    """Factor a full-rank frequency as y = xi b.

    Returns (xi, b) with xi an n x (n-k) frame and b an (n-k) x m matrix,
    built from the polar factorization of y and the deterministic frame
    completion.  Requires the injective regime n - k >= m.
    """
    n, m, k = dims.n, dims.m, dims.k
    if n - k < m:
        raise InjectivityViolated(f"slice factorization needs n-k >= m, got {n - k} < {m}")
    y = np.asarray(y, dtype=float)
    v, r = polar_decompose(y)  # raises RankDeficient when degenerate
    g_v = complete_to_rotation(v, standard_frame(n, m))
    xi = g_v @ standard_frame(n, n - k)
    b = standard_frame(n - k, m) @ spd_sqrt(r)
    resid = np.max(np.abs(xi @ b - y))
    if resid > 1e-9 * max(1.0, float(np.max(np.abs(y)))):
        raise RankDeficient(f"slice factorization residual {resid:.3e} too large")
    return xi, b


def slice_decompose_batch(ys: np.ndarray, dims, rank_tol: float = 1e-8):
    """Vectorized slice factorization over a stack of frequencies.

    Returns (xi (B, n, n-k), b (B, n-k, m), good (B,) bool); entries with
    smallest singular value below ``rank_tol`` are flagged bad and left
    unspecified.
    """
    n, m, k = dims.n, dims.m, dims.k
    if n - k < m:
        raise InjectivityViolated(f"slice factorization needs n-k >= m, got {n - k} < {m}")
    ys = np.asarray(ys, dtype=float)
    u, s, vt = np.linalg.svd(ys, full_matrices=False)
    good = s[:, -1] > rank_tol
    s_safe = np.where(good[:, None], s, 1.0)
    v = u @ vt
    r_sqrt = (transpose(vt) * s_safe[:, None, :]) @ vt
    g_v = complete_to_rotation(v, standard_frame(n, m))
    xi = g_v @ standard_frame(n, n - k)
    b = standard_frame(n - k, m) @ r_sqrt
    return xi, b, good


def slice_check(f: FieldFunction, y: np.ndarray, dims, spec: QuadratureSpec,
                radon_spec: QuadratureSpec | None = None,
                t_spec: QuadratureSpec | None = None,
                factorization: tuple | None = None) -> float:
    """Relative discrepancy of the slice identity at frequency y.

    The left side is the ambient transform; the right side transforms the
    plane data in the offset variable through an independent nested rule.
    ``factorization`` may supply an alternative (xi, b) pair with
    xi b = y; by default the canonical factorization from
    :func:`slice_decompose` is used.
    """
    y = np.asarray(y, dtype=float)
    lhs = fourier(f, y, spec).value
    xi, b = factorization if factorization is not None else slice_decompose(y, dims)
    rhs = slice_transform_side(f, xi, b, t_spec or spec, radon_spec or spec)
    return abs(lhs - rhs) / max(abs(lhs), abs(rhs), _TINY)


def slice_transform_side(f: FieldFunction, xi: np.ndarray, b: np.ndarray,
                         t_spec: QuadratureSpec, radon_spec: QuadratureSpec) -> complex:
    """Offset-side of the slice identity: int exp(i tr(b't)) fhat(xi, t) dt."""
    n, m = f.dims
    p = xi.shape[-1]
    u_points, u_weights = in_plane_rule(radon_spec, n - p, m)
    g = complete_to_rotation(xi, standard_frame(n, p))

    def integrand(ts):
        phase = np.exp(1j * np.sum(b * ts, axis=(-2, -1)))
        return radon_at_offsets(f, g, ts, u_points, u_weights, phase=phase)

    return integrate_matrix_space(integrand, p, m, t_spec).value
