"""Matrix-argument potentials of fractional and small integer order.

Two evaluation branches are implemented, matching the two displays of
the defining formula:

* branch A (Re alpha > m-1, alpha off the excluded ladder): normalized
  convolution with the kernel det(y'y)^((alpha-n)/2);
* branch B (integer alpha = k with 1 <= k <= min(m-1, n-m), m >= 2):
  the rotation-average formula c * int du int f(x - g [u; 0]) dg.

Order zero returns f(x) itself.  Anything else raises UnsupportedOrder;
no silent analytic continuation is attempted.

Branch A defaults to polar coordinates y = v r^(1/2): the singular
kernel is absorbed exactly into the cone weight det(r)^((alpha-m-1)/2),
leaving a bounded integrand (frame average times cone rule).  The
truncated-grid scheme instead integrates the kernel on a Frobenius-ball
lattice that skips a thin tube around the rank-deficient set; it
converges much more slowly near the singular set and is kept for
convergence studies.
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import BudgetExceeded, ExcludedOrder, OutOfRange, UnsupportedOrder
from ..matspace import (det_root, haar_rotations, haar_stiefels, mix_seed,
                        spd_sqrt, transpose)
from ..quadrature import (DET_CHUNK, MC_CHUNK, IntegralResult, QuadratureSpec,
                          budget_cap, gauss_hermite_rule, midpoint_rule,
                          spd_cone_rule)
from ..specialfn import (dual_rep_const, fuglede_const, riesz_const,
                         riesz_excluded, stiefel_volume)
from .fields import FieldFunction
from .radon import in_plane_rule

_TINY = 1e-300


def _near_int(a: complex, tol: float = 1e-9):
    if abs(a.imag) > tol:
        return None
    r = round(a.real)
    return int(r) if abs(a.real - r) <= tol else None


def riesz(f: FieldFunction, alpha, x: np.ndarray, spec: QuadratureSpec,
          group_samples: int | None = None) -> IntegralResult:
    """Potential of order alpha of f, evaluated at the point x.

    ``spec`` drives the deterministic side (cone rule order for branch A
    with the Gauss-Hermite scheme, grid resolution with the
    truncated-grid scheme, in-plane rule for branch B) while
    ``group_samples`` (default 8192) sizes the frame or rotation
    averages; all streams derive from ``spec.seed``.
    """
    n, m = f.dims
    x = np.asarray(x, dtype=float)
    a = complex(alpha)
    as_int = _near_int(a)

    if as_int == 0:
        return IntegralResult(float(f.evaluate(x[None])[0]), 0.0, 1)

    if riesz_excluded(n, m, a if a.imag else a.real):
        raise ExcludedOrder(f"alpha={alpha} is an excluded order for (n,m)=({n},{m})")

    k0 = min(m - 1, n - m) if m >= 2 else 0
    if as_int is not None and 1 <= as_int <= k0:
        return _riesz_group(f, as_int, x, spec, group_samples or 8192)
    if a.real > m - 1:
        if spec.scheme == "truncated_grid":
            return _riesz_convolution_grid(f, a, x, spec)
        return _riesz_convolution_polar(f, a, x, spec, group_samples or 8192)
    raise UnsupportedOrder(
        f"alpha={alpha} matches neither the convolution branch (Re alpha > {m - 1}) "
        f"nor the integer branch 1..{k0}")


def _frame_mean_result(per_frame: np.ndarray, prefactor: float | complex,
                       samples_total: int) -> IntegralResult:
    count = per_frame.shape[0]
    mean = np.mean(per_frame)
    spread = np.mean(np.abs(per_frame - mean) ** 2)
    se = math.sqrt(max(spread, 0.0) / count)
    value = prefactor * mean
    return IntegralResult(value, abs(prefactor) * se, samples_total)


def _riesz_convolution_polar(f: FieldFunction, alpha: complex, x: np.ndarray,
                             spec: QuadratureSpec, frame_samples: int) -> IntegralResult:
    """Branch A in polar coordinates: frame average of a weighted cone rule."""
    n, m = f.dims
    coeff = 1.0 / riesz_const(n, m, alpha if alpha.imag else alpha.real)
    cone_spec = spec if spec.scheme == "gauss_hermite_tensor" else spec.with_(
        scheme="gauss_hermite_tensor", order_or_samples=24)
    r_nodes, r_w = spd_cone_rule(m, (alpha - m - 1) / 2.0, cone_spec)
    rsq = spd_sqrt(r_nodes)
    nr = rsq.shape[0]
    if nr * frame_samples > budget_cap():
        raise BudgetExceeded("polar convolution exceeds budget cap")
    vs = haar_stiefels(n, m, frame_samples, mix_seed(spec.seed, 31))
    per_frame = np.empty(frame_samples, dtype=np.result_type(r_w.dtype, float))
    block = max(1, DET_CHUNK // max(nr, 1))
    for s in range(0, frame_samples, block):
        e = min(s + block, frame_samples)
        vr = np.einsum("snm,cml->scnl", vs[s:e], rsq)
        vals = f.evaluate((x[None, None] - vr).reshape(-1, n, m)).reshape(e - s, nr)
        per_frame[s:e] = vals @ r_w
    prefactor = coeff * 2.0 ** (-m) * stiefel_volume(n, m)
    res = _frame_mean_result(per_frame, prefactor, nr * frame_samples)
    if abs(alpha.imag) == 0.0:
        return IntegralResult(float(np.real(res.value)), res.error_estimate,
                              res.samples_used)
    return res


def _ball_nodes(d: int, npts: int, radius: float):
    """Cell-centered nodes of the Frobenius ball, chunked."""
    x, w = midpoint_rule(npts, -radius, radius)
    cell = w[0] ** d
    sizes = [npts] * d
    total = npts ** d
    for start in range(0, total, DET_CHUNK):
        stop = min(start + DET_CHUNK, total)
        idx = np.unravel_index(np.arange(start, stop), sizes)
        pts = np.stack([x[idx[ax]] for ax in range(d)], axis=-1)
        inside = np.sum(pts * pts, axis=-1) <= radius * radius
        if np.any(inside):
            yield pts[inside], cell


def _riesz_convolution_grid(f: FieldFunction, alpha: complex, x: np.ndarray,
                            spec: QuadratureSpec) -> IntegralResult:
    """Branch A on a tube-excluded Frobenius-ball lattice."""
    n, m = f.dims
    coeff = 1.0 / riesz_const(n, m, alpha if alpha.imag else alpha.real)
    d = n * m
    npts = spec.order_or_samples
    if 2 * npts ** d > budget_cap():
        raise BudgetExceeded("convolution grid exceeds budget cap")

    def grid_value(npts_run):
        cellsize = 2 * spec.truncation_radius / npts_run
        tube = 1e-12 * max(1.0, spec.truncation_radius) ** m
        total = 0.0
        count = 0
        for pts, cell in _ball_nodes(d, npts_run, spec.truncation_radius):
            y = pts.reshape(-1, n, m)
            droot = det_root(y)
            keep = droot > tube
            if not np.any(keep):
                continue
            y = y[keep]
            kern = np.exp((alpha - n) * np.log(droot[keep]))
            vals = f.evaluate(x[None] - y) * kern
            total = total + np.sum(vals) * cell
            count += int(np.sum(keep))
        return total, count

    hi, count_hi = grid_value(npts)
    lo, count_lo = grid_value(max(2, npts // 2))
    value = coeff * hi
    err = abs(coeff) * abs(hi - lo)
    if abs(complex(alpha).imag) == 0.0:
        value = float(np.real(value))
    return IntegralResult(value, float(err), count_hi + count_lo)


def _riesz_group(f: FieldFunction, k: int, x: np.ndarray, spec: QuadratureSpec,
                 group_samples: int) -> IntegralResult:
    """Branch B: c * int_{k x m} du (mean over rotations of f(x - g [u; 0]))."""
    n, m = f.dims
    c = fuglede_const(n, m, k)
    u_spec = spec if spec.scheme != "monte_carlo" else spec.with_(
        scheme="gauss_hermite_tensor", order_or_samples=20)
    u_points, u_weights = in_plane_rule(u_spec, k, m)
    nu = u_points.shape[0]
    if nu * group_samples > budget_cap():
        raise BudgetExceeded("group-average branch exceeds budget cap")
    pad = np.zeros((nu, n - k, m))
    stacked = np.concatenate((u_points, pad), axis=1)  # (nu, n, m)
    per_rot = np.empty(group_samples)
    done = 0
    chunk_idx = 0
    block = max(1, MC_CHUNK // max(nu, 1))
    while done < group_samples:
        b = min(block, group_samples - done)
        gam = haar_rotations(n, b, mix_seed(spec.seed, chunk_idx))
        pts = x[None, None] - gam[:, None] @ stacked[None]
        vals = f.evaluate(pts.reshape(-1, n, m)).reshape(b, nu)
        per_rot[done:done + b] = vals @ u_weights
        done += b
        chunk_idx += 1
    return _frame_mean_result(per_rot, c, done * nu)


def riesz_alt(f: FieldFunction, k: int, x: np.ndarray, spec: QuadratureSpec,
              z_order: int = 24, frame_samples: int | None = None) -> IntegralResult:
    """Alternate small-integer-order representation.

    Evaluates c1 * int_{n x k} det(y'y)^((m-n)/2) dy int f(x - [y, y z]) dz
    with z over k x (m-k) matrices, in polar coordinates y = v r^(1/2).
    The kernel merges with the polar Jacobian into the single cone weight
    det(r)^((m-k-1)/2), which the materialized rule absorbs exactly.  The
    distribution acts on the translate f(x - .), the same convention as
    :func:`riesz`.  The inner z-rule is a Gauss-Hermite rule recentered
    on the least-squares minimizer of |x_tail - y z| and rescaled by the
    smallest singular value of y, which tracks the integrand's
    sharpening as y degenerates.
    """
    n, m = f.dims
    if m < 2:
        raise OutOfRange("alternate representation needs m >= 2")
    k0 = min(m - 1, n - m)
    if not (1 <= k <= k0):
        raise OutOfRange(f"need 1 <= k <= k0={k0}, got k={k}")
    x = np.asarray(x, dtype=float)
    c1 = dual_rep_const(n, m, k)
    x_tail = x[:, k:]  # n x (m-k)
    frame_samples = frame_samples or 4096

    cone_spec = spec if spec.scheme == "gauss_hermite_tensor" else spec.with_(
        scheme="gauss_hermite_tensor", order_or_samples=32)
    # polar measure exponent (n-k-1)/2 plus kernel exponent (m-n)/2
    r_nodes, r_w = spd_cone_rule(k, (m - k - 1) / 2.0, cone_spec)
    rsq = spd_sqrt(r_nodes)  # (nr, k, k)
    nr = rsq.shape[0]
    smin = np.sqrt(np.linalg.eigvalsh(r_nodes)[:, 0])  # smallest singular value of y

    gh_x, gh_w = gauss_hermite_rule(z_order)
    dz = k * (m - k)
    zgrids = np.meshgrid(*([gh_x] * dz), indexing="ij")
    z_nodes = np.stack([g.ravel() for g in zgrids], axis=-1).reshape(-1, k, m - k)
    wgrids = np.meshgrid(*([gh_w] * dz), indexing="ij")
    z_weights = np.prod(np.stack([g.ravel() for g in wgrids], axis=-1), axis=-1)
    nz = z_nodes.shape[0]

    if nr * nz * frame_samples > budget_cap():
        raise BudgetExceeded("alternate representation exceeds budget cap")

    vs = haar_stiefels(n, k, frame_samples, mix_seed(spec.seed, 41))
    rsq_inv = np.linalg.inv(rsq)
    scale = 1.0 / smin
    z_jac = scale ** dz  # (nr,)

    per_frame = np.empty(frame_samples)
    block = max(1, DET_CHUNK // max(nr * nz, 1))
    for s in range(0, frame_samples, block):
        e = min(s + block, frame_samples)
        b = e - s
        y = np.einsum("snk,ckl->scnl", vs[s:e], rsq)  # (b, nr, n, k)
        z_center = rsq_inv[None] @ (transpose(vs[s:e])[:, None] @ x_tail[None, None])
        z = z_center[:, :, None] + scale[None, :, None, None, None] * z_nodes[None, None]
        yz = y[:, :, None] @ z  # (b, nr, nz, n, m-k)
        head = np.broadcast_to(y[:, :, None], (b, nr, nz, n, k))
        pts = x[None, None, None] - np.concatenate((head, yz), axis=-1)
        vals = f.evaluate(pts.reshape(-1, n, m)).reshape(b, nr, nz)
        inner = (vals @ z_weights) * z_jac[None, :]
        per_frame[s:e] = inner @ r_w
    prefactor = c1 * 2.0 ** (-k) * stiefel_volume(n, k)
    return _frame_mean_result(per_frame, prefactor, nr * nz * frame_samples)
