"""The plane transform, its dual (backprojection), and mass bookkeeping.

The transform of f at a plane (xi, t) is the integral of f over the
plane, computed as int f(g [u; t]) du where g is any rotation carrying
the standard coframe onto xi; results are independent of that choice up
to quadrature error.  The dual transform averages a plane function over
all planes through a point with the normalized invariant measure on
SO(n), or equivalently over frames.
"""

from __future__ import annotations

import numpy as np

from ..errors import BadSpec, BudgetExceeded, DivergenceSuspected
from ..matspace import (MatrixPlane, complete_to_rotation, plane_rotation,
                        standard_frame, transpose)
from ..quadrature import (DET_CHUNK, IntegralResult, QuadratureSpec, budget_cap,
                          gauss_hermite_rule, integrate_group,
                          integrate_matrix_space, midpoint_rule)
from ..specialfn import stiefel_volume
from .fields import FieldFunction, PlaneFunction

_TINY = 1e-300


def in_plane_rule(spec: QuadratureSpec, k: int, m: int):
    """Deterministic quadrature nodes/weights on the k x m coordinate patch.

    Returns (points (N, k, m), weights (N,)).  Monte Carlo specs are not
    usable here; batched plane evaluation needs a fixed rule.
    """
    d = k * m
    if spec.scheme == "gauss_hermite_tensor":
        x, w = gauss_hermite_rule(spec.order_or_samples)
        if len(x) ** d > budget_cap():
            raise BudgetExceeded("in-plane rule larger than budget cap")
        grids = np.meshgrid(*([x] * d), indexing="ij")
        pts = np.stack([g.ravel() for g in grids], axis=-1)
        wgrids = np.meshgrid(*([w] * d), indexing="ij")
        ww = np.prod(np.stack([g.ravel() for g in wgrids], axis=-1), axis=-1)
        return pts.reshape(-1, k, m), ww
    if spec.scheme == "truncated_grid":
        x, w = midpoint_rule(spec.order_or_samples, -spec.truncation_radius,
                             spec.truncation_radius)
        if len(x) ** d > budget_cap():
            raise BudgetExceeded("in-plane rule larger than budget cap")
        grids = np.meshgrid(*([x] * d), indexing="ij")
        pts = np.stack([g.ravel() for g in grids], axis=-1)
        inside = np.sum(pts * pts, axis=-1) <= spec.truncation_radius ** 2
        ww = np.full(pts.shape[0], np.prod([w[0]] * d))
        return pts[inside].reshape(-1, k, m), ww[inside]
    raise BadSpec("plane-batched evaluation needs a deterministic scheme")


def radon_at_offsets(f: FieldFunction, rotation: np.ndarray, offsets: np.ndarray,
                     u_points: np.ndarray, u_weights: np.ndarray,
                     phase: np.ndarray | None = None) -> np.ndarray:
    """Transform values at many offsets t for one fixed frame rotation.

    ``offsets`` has shape (T, n-k, m); the optional ``phase`` (T,) array
    multiplies each offset's value (used by the slice identities).
    """
    n, m = f.dims
    nu = u_points.shape[0]
    t_count = offsets.shape[0]
    block = max(1, DET_CHUNK // max(nu, 1))
    out = None
    for start in range(0, t_count, block):
        stop = min(start + block, t_count)
        b = stop - start
        u_rep = np.broadcast_to(u_points[None], (b,) + u_points.shape)
        t_rep = np.broadcast_to(offsets[start:stop, None], (b, nu) + offsets.shape[1:])
        stacked = np.concatenate((u_rep, t_rep), axis=2)
        x = rotation @ stacked
        vals = f.evaluate(x.reshape(-1, n, m)).reshape(b, nu)
        blockvals = vals @ u_weights
        if out is None:
            out = np.zeros(t_count, dtype=np.result_type(blockvals.dtype, float))
        out[start:stop] = blockvals
    if phase is not None:
        out = out * phase
    return out


def radon(f: FieldFunction, plane: MatrixPlane, spec: QuadratureSpec,
          rotation: np.ndarray | None = None) -> IntegralResult:
    """Integral of f over one matrix plane.

    With the truncated-grid scheme a Cauchy ladder over the radii R/4,
    R/2, R is run first and DivergenceSuspected is raised when the last
    relative change still exceeds ``spec.target_rel_tol``; callers
    probing genuinely divergent integrands should use the demo ladders
    in :mod:`matplane.phantoms` instead.
    """
    n, m = f.dims
    g = plane_rotation(plane) if rotation is None else rotation
    t = plane.t
    k = plane.k

    def integrand(u):
        t_rep = np.broadcast_to(t, u.shape[:-2] + t.shape)
        x = g @ np.concatenate((u, t_rep), axis=-2)
        return f.evaluate(x)

    if spec.scheme == "truncated_grid":
        ladder = [spec.truncation_radius / 4, spec.truncation_radius / 2,
                  spec.truncation_radius]
        results = [integrate_matrix_space(integrand, k, m, spec.with_(truncation_radius=r))
                   for r in ladder]
        tail = abs(results[2].value - results[1].value) / max(abs(results[2].value), _TINY)
        if tail > spec.target_rel_tol:
            raise DivergenceSuspected(
                f"truncation ladder not Cauchy: relative change {tail:.3e} "
                f"over radii {ladder[1]:g} -> {ladder[2]:g}")
        total = sum(r.samples_used for r in results)
        err = max(results[2].error_estimate,
                  abs(results[2].value - results[1].value))
        return IntegralResult(results[2].value, err, total)
    return integrate_matrix_space(integrand, k, m, spec)


def radon_plane_function(f: FieldFunction, k: int, spec: QuadratureSpec) -> PlaneFunction:
    """The transform of f packaged as a batched function of planes."""
    n, m = f.dims
    u_points, u_weights = in_plane_rule(spec, k, m)
    anchor = standard_frame(n, n - k)
    nu = u_points.shape[0]

    def evaluate(xi, t):
        xi = np.asarray(xi, dtype=float)
        t = np.asarray(t, dtype=float)
        lead = xi.shape[:-2]
        xi_flat = xi.reshape((-1,) + xi.shape[-2:])
        t_flat = np.broadcast_to(t, lead + t.shape[-2:]).reshape((-1,) + t.shape[-2:])
        g = complete_to_rotation(xi_flat, anchor)
        count = xi_flat.shape[0]
        out = np.empty(count)
        block = max(1, DET_CHUNK // max(nu, 1))
        for start in range(0, count, block):
            stop = min(start + block, count)
            b = stop - start
            u_rep = np.broadcast_to(u_points[None], (b, nu, k, m))
            t_rep = np.broadcast_to(t_flat[start:stop, None], (b, nu, n - k, m))
            stacked = np.concatenate((u_rep, t_rep), axis=2)
            x = g[start:stop, None] @ stacked
            vals = f.evaluate(x.reshape(-1, n, m)).reshape(b, nu)
            out[start:stop] = vals @ u_weights
        return out.reshape(lead)

    return PlaneFunction(evaluate=evaluate, dims=(n, m, k))


def radon_mass(f: FieldFunction, xi: np.ndarray, spec: QuadratureSpec,
               radon_spec: QuadratureSpec | None = None) -> IntegralResult:
    """Integral of the transform over all offsets at one fixed frame.

    Equals the total mass of f for every frame when f is integrable.
    """
    n, m = f.dims
    p = xi.shape[-1]
    k = n - p
    u_points, u_weights = in_plane_rule(radon_spec or spec, k, m)
    g = complete_to_rotation(xi, standard_frame(n, p))

    def integrand(ts):
        return radon_at_offsets(f, g, ts, u_points, u_weights)

    return integrate_matrix_space(integrand, p, m, spec)


def dual_radon(phi: PlaneFunction, x: np.ndarray, spec: QuadratureSpec,
               via: str = "rotations") -> IntegralResult:
    """Mean of a plane function over all planes through x.

    ``via="rotations"`` averages phi(g xi0, xi0' g' x) over Haar
    rotations; ``via="frames"`` averages phi(xi, xi' x) over uniform
    frames.  Both estimate the same mean value.
    """
    n, m, k = phi.dims
    x = np.asarray(x, dtype=float)
    xi0 = standard_frame(n, n - k)
    if via == "rotations":
        def fg(g_batch):
            xi = g_batch @ xi0
            t = transpose(xi) @ x
            return phi.evaluate(xi, t)

        return integrate_group(fg, "SOn", n, spec=spec)
    if via == "frames":
        def fv(v_batch):
            t = transpose(v_batch) @ x
            return phi.evaluate(v_batch, t)

        res = integrate_group(fv, "stiefel", n, p=n - k, spec=spec)
        mass = stiefel_volume(n, n - k)
        return IntegralResult(res.value / mass, res.error_estimate / mass,
                              res.samples_used)
    raise BadSpec(f"unknown dual transform route {via!r}")
