"""Integration engines for the three measure classes used by the transforms.

* Lebesgue measure on p x q matrix space: tensor Gauss-Hermite for
  integrands with Gaussian-type decay, a cell-centered midpoint grid over
  a Frobenius ball for non-smooth kernels, and Gaussian importance-sampled
  Monte Carlo.
* Invariant measure on SO(n) (normalized) and on Stiefel manifolds
  (total mass sigma_{n,p}): seeded Monte Carlo.
* The positive definite cone: triangular-factor coordinates r = u'u with
  Jacobian 2^m prod_i u_ii^(m-i+1), certified against the closed-form
  cone gamma function by the test suite.

Deterministic rules report a Richardson-style error estimate (difference
against a lower-order rule); Monte Carlo reports the standard error.
Monte Carlo accumulation runs in fixed-size chunks with one child seed
per chunk, so results do not depend on how work is distributed.
"""

from __future__ import annotations

import math
import os
from dataclasses import asdict, dataclass

import numpy as np

from .errors import BadSpec, BudgetExceeded, OutOfRange
from .matspace import haar_rotations, haar_stiefels, mix_seed, rng_for, transpose
from .specialfn import stiefel_volume

SCHEMES = ("gauss_hermite_tensor", "truncated_grid", "monte_carlo")

MC_CHUNK = 1 << 16
DET_CHUNK = 1 << 18

DEFAULT_BUDGET_CAP = 100_000_000


def budget_cap() -> int:
    """Evaluation cap; override with the MATPLANE_BUDGET_CAP variable."""
    raw = os.environ.get("MATPLANE_BUDGET_CAP")
    if raw is None:
        return DEFAULT_BUDGET_CAP
    return int(float(raw))


def _check_budget(planned: int, context: str):
    cap = budget_cap()
    if planned > cap:
        raise BudgetExceeded(f"{context}: {planned} evaluations exceed cap {cap}")


@dataclass
class QuadratureSpec:
    """Scheme selector plus budget for one integral.

    ``order_or_samples`` is the per-axis rule order for deterministic
    schemes and the total sample count for Monte Carlo.
    """

    scheme: str
    order_or_samples: int
    truncation_radius: float = 6.0
    seed: int = 0
    target_rel_tol: float = 1e-6

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise BadSpec(f"unknown scheme {self.scheme!r}; expected one of {SCHEMES}")
        if self.order_or_samples < 1:
            raise BadSpec("order_or_samples must be >= 1")
        if self.truncation_radius <= 0:
            raise BadSpec("truncation_radius must be positive")
        if self.target_rel_tol <= 0:
            raise BadSpec("target_rel_tol must be positive")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "QuadratureSpec":
        return cls(**d)

    def with_(self, **kw) -> "QuadratureSpec":
        d = self.to_dict()
        d.update(kw)
        return QuadratureSpec.from_dict(d)


@dataclass
class IntegralResult:
    value: complex | float
    error_estimate: float
    samples_used: int

    @property
    def real(self) -> float:
        return float(np.real(self.value))


def gauss_hermite_rule(order: int):
    """Nodes and plain-Lebesgue weights: int f = sum w_i f(x_i)."""
    x, w = np.polynomial.hermite.hermgauss(order)
    return x, w * np.exp(x * x)


def gauss_legendre_rule(order: int, lo: float, hi: float):
    x, w = np.polynomial.legendre.leggauss(order)
    half = 0.5 * (hi - lo)
    return lo + half * (x + 1.0), half * w


def midpoint_rule(npts: int, lo: float, hi: float):
    h = (hi - lo) / npts
    x = lo + (np.arange(npts) + 0.5) * h
    return x, np.full(npts, h)


def _product_chunks(nodes, weights, chunk=DET_CHUNK):
    """Iterate the tensor product of 1-D rules in flat chunks.

    Yields (points (c, d), weights (c,)) with a deterministic ordering.
    """
    sizes = [len(x) for x in nodes]
    total = int(np.prod(sizes))
    d = len(nodes)
    for start in range(0, total, chunk):
        stop = min(start + chunk, total)
        flat = np.arange(start, stop)
        idx = np.unravel_index(flat, sizes)
        pts = np.empty((stop - start, d))
        w = np.ones(stop - start)
        for ax in range(d):
            pts[:, ax] = nodes[ax][idx[ax]]
            w *= weights[ax][idx[ax]]
        yield pts, w


def _rule_size(nodes) -> int:
    return int(np.prod([len(x) for x in nodes]))


def _sum_product_rule(f_flat, nodes, weights):
    """Accumulate sum(w * f(points)) over the tensor rule."""
    total = 0.0
    count = 0
    for pts, w in _product_chunks(nodes, weights):
        vals = f_flat(pts)
        total = total + np.sum(w * vals)
        count += len(w)
    return total, count


def _matrix_axes_rules(scheme_nodes, d):
    nodes = [scheme_nodes[0]] * d
    weights = [scheme_nodes[1]] * d
    return nodes, weights


def integrate_matrix_space(f, p: int, q: int, spec: QuadratureSpec) -> IntegralResult:
    """Lebesgue integral of f over the space of p x q matrices.

    ``f`` must accept a stacked argument of shape (batch, p, q) and
    return (batch,) values (real or complex).

    The Gauss-Hermite scheme assumes Gaussian-type decay of the
    integrand; the truncated grid integrates over the Frobenius ball of
    radius ``truncation_radius`` with a cell-centered midpoint rule;
    Monte Carlo importance-samples from a Gaussian proposal.
    """
    d = p * q

    def f_flat(pts):
        return f(pts.reshape(pts.shape[0], p, q))

    if spec.scheme == "gauss_hermite_tensor":
        order = spec.order_or_samples
        order_lo = max(1, (2 * order) // 3) if order > 2 else max(1, order - 1)
        _check_budget(order ** d + order_lo ** d, "integrate_matrix_space")
        hi, count = _sum_product_rule(f_flat, *_matrix_axes_rules(gauss_hermite_rule(order), d))
        if order_lo == order:
            return IntegralResult(hi, 0.0, count)
        lo, count_lo = _sum_product_rule(f_flat, *_matrix_axes_rules(gauss_hermite_rule(order_lo), d))
        return IntegralResult(hi, abs(hi - lo), count + count_lo)

    if spec.scheme == "truncated_grid":
        value_hi, n_hi = _ball_grid_integral(f_flat, d, spec.order_or_samples, spec.truncation_radius)
        npts_lo = max(2, spec.order_or_samples // 2)
        if npts_lo == spec.order_or_samples:
            return IntegralResult(value_hi, 0.0, n_hi)
        value_lo, n_lo = _ball_grid_integral(f_flat, d, npts_lo, spec.truncation_radius)
        return IntegralResult(value_hi, abs(value_hi - value_lo), n_hi + n_lo)

    return _monte_carlo_matrix(f_flat, d, spec)


def _ball_grid_integral(f_flat, d, npts, radius):
    _check_budget(npts ** d, "integrate_matrix_space/truncated_grid")
    x, w = midpoint_rule(npts, -radius, radius)
    nodes, weights = [x] * d, [w] * d
    total = 0.0
    count = 0
    for pts, ww in _product_chunks(nodes, weights):
        inside = np.sum(pts * pts, axis=1) <= radius * radius
        if not np.any(inside):
            continue
        vals = f_flat(pts[inside])
        total = total + np.sum(ww[inside] * vals)
        count += int(np.sum(inside))
    return total, count


def _monte_carlo_matrix(f_flat, d, spec):
    n_samples = spec.order_or_samples
    _check_budget(n_samples, "integrate_matrix_space/monte_carlo")
    sigma = 1.0 / math.sqrt(2.0)
    log_norm = 0.5 * d * math.log(math.pi)
    total = 0.0
    total_sq = 0.0
    count = 0
    chunk_idx = 0
    while count < n_samples:
        c = min(MC_CHUNK, n_samples - count)
        rng = rng_for(mix_seed(spec.seed, chunk_idx))
        pts = sigma * rng.standard_normal((c, d))
        logw = np.sum(pts * pts, axis=1) + log_norm
        vals = f_flat(pts) * np.exp(logw)
        total = total + np.sum(vals)
        total_sq = total_sq + np.sum(np.abs(vals) ** 2)
        count += c
        chunk_idx += 1
    mean = total / count
    var = max(float(total_sq / count - abs(mean) ** 2), 0.0)
    se = math.sqrt(var / count)
    return IntegralResult(mean, se, count)


def integrate_group(f, which: str, n: int, p: int | None = None,
                    spec: QuadratureSpec | None = None) -> IntegralResult:
    """Monte Carlo integral over SO(n) or a Stiefel manifold.

    ``which`` is "SOn" (normalized invariant measure, total mass 1) or
    "stiefel" (invariant measure of total mass sigma_{n,p}).  ``f`` maps
    a stacked batch of group elements to (batch,) values.
    """
    if spec is None or spec.scheme != "monte_carlo":
        raise BadSpec("integrate_group requires a monte_carlo QuadratureSpec")
    if which not in ("SOn", "stiefel"):
        raise BadSpec(f"unknown manifold {which!r}")
    if which == "stiefel":
        if p is None:
            raise BadSpec("stiefel integration needs p")
        mass = stiefel_volume(n, p)
    else:
        mass = 1.0
    n_samples = spec.order_or_samples
    _check_budget(n_samples, "integrate_group")
    total = 0.0
    total_sq = 0.0
    count = 0
    chunk_idx = 0
    while count < n_samples:
        c = min(MC_CHUNK, n_samples - count)
        seed = mix_seed(spec.seed, chunk_idx)
        if which == "SOn":
            g = haar_rotations(n, c, seed)
        else:
            g = haar_stiefels(n, p, c, seed)
        vals = f(g)
        total = total + np.sum(vals)
        total_sq = total_sq + np.sum(np.abs(vals) ** 2)
        count += c
        chunk_idx += 1
    mean = total / count
    var = max(float(total_sq / count - abs(mean) ** 2), 0.0)
    se = math.sqrt(var / count)
    return IntegralResult(mass * mean, mass * se, count)


def _upper_triangle_axes(m: int):
    """Row-major upper-triangle coordinate list [(i, j), ...]."""
    return [(i, j) for i in range(m) for j in range(i, m)]


def _cone_rules(m: int, spec: QuadratureSpec):
    axes = _upper_triangle_axes(m)
    nodes, weights = [], []
    if spec.scheme == "gauss_hermite_tensor":
        gx, gw = gauss_hermite_rule(spec.order_or_samples)
        lx, lw = gauss_legendre_rule(spec.order_or_samples, 0.0, spec.truncation_radius)
        for (i, j) in axes:
            if i == j:
                nodes.append(lx)
                weights.append(lw)
            else:
                nodes.append(gx)
                weights.append(gw)
    elif spec.scheme == "truncated_grid":
        dx, dw = midpoint_rule(spec.order_or_samples, 0.0, spec.truncation_radius)
        ox, ow = midpoint_rule(spec.order_or_samples, -spec.truncation_radius, spec.truncation_radius)
        for (i, j) in axes:
            if i == j:
                nodes.append(dx)
                weights.append(dw)
            else:
                nodes.append(ox)
                weights.append(ow)
    else:
        raise BadSpec("cone Monte Carlo is handled separately")
    return axes, nodes, weights


def _cone_integrand(f, m, weight_exponent, axes):
    def f_flat(pts):
        batch = pts.shape[0]
        u = np.zeros((batch, m, m))
        for ax, (i, j) in enumerate(axes):
            u[:, i, j] = pts[:, ax]
        diag = np.stack([pts[:, axes.index((i, i))] for i in range(m)], axis=1)
        r = transpose(u) @ u
        detr = np.prod(diag, axis=1) ** 2
        jac = (2.0 ** m) * np.prod(diag ** (m - np.arange(m)), axis=1)
        vals = f(r)
        return vals * np.where(detr > 0, detr, 1.0) ** weight_exponent * jac * (detr > 0)

    return f_flat


def integrate_spd_cone(f, m: int, weight_exponent: float,
                       spec: QuadratureSpec) -> IntegralResult:
    """Integral of f(r) |det r|^weight_exponent over positive definite r.

    Uses the triangular-factor coordinates r = u'u (u upper triangular
    with positive diagonal) and Jacobian 2^m prod_i u_ii^(m-i+1).  ``f``
    maps a stacked batch (batch, m, m) of positive definite matrices to
    (batch,) values.  Deterministic schemes truncate the diagonal axes at
    ``truncation_radius``.
    """
    if m < 1:
        raise OutOfRange("m must be >= 1")
    if spec.scheme == "monte_carlo":
        return _monte_carlo_cone(f, m, weight_exponent, spec)
    axes, nodes, weights = _cone_rules(m, spec)
    f_flat = _cone_integrand(f, m, weight_exponent, axes)
    order = spec.order_or_samples
    d = len(axes)
    order_lo = max(1, (2 * order) // 3) if order > 2 else max(1, order - 1)
    _check_budget(order ** d + order_lo ** d, "integrate_spd_cone")
    hi, count = _sum_product_rule(f_flat, nodes, weights)
    if order_lo == order:
        return IntegralResult(hi, 0.0, count)
    spec_lo = spec.with_(order_or_samples=order_lo)
    _, nodes_lo, weights_lo = _cone_rules(m, spec_lo)
    lo, count_lo = _sum_product_rule(f_flat, nodes_lo, weights_lo)
    return IntegralResult(hi, abs(hi - lo), count + count_lo)


def spd_cone_rule(m: int, weight_exponent, spec: QuadratureSpec):
    """Materialized cone rule: (matrices (N, m, m), weights (N,)).

    Weights absorb the triangular-coordinate Jacobian and the factor
    det(r)^weight_exponent, so sum(w * f(r)) approximates the weighted
    cone integral directly.  The exponent may be complex.
    """
    if spec.scheme == "monte_carlo":
        raise BadSpec("materialized cone rule needs a deterministic scheme")
    axes, nodes, weights = _cone_rules(m, spec)
    size = _rule_size(nodes)
    _check_budget(size, "spd_cone_rule")
    pts_list, w_list = [], []
    for pts, w in _product_chunks(nodes, weights):
        pts_list.append(pts)
        w_list.append(w)
    pts = np.concatenate(pts_list)
    w = np.concatenate(w_list)
    u = np.zeros((pts.shape[0], m, m))
    for ax, (i, j) in enumerate(axes):
        u[:, i, j] = pts[:, ax]
    diag = np.stack([pts[:, axes.index((i, i))] for i in range(m)], axis=1)
    r = transpose(u) @ u
    detr = np.prod(diag, axis=1) ** 2
    jac = (2.0 ** m) * np.prod(diag ** (m - np.arange(m)), axis=1)
    if np.iscomplexobj(np.asarray(weight_exponent)) or isinstance(weight_exponent, complex):
        factor = np.exp(complex(weight_exponent) * np.log(detr))
    else:
        factor = detr ** float(weight_exponent)
    return r, w * jac * factor


def _monte_carlo_cone(f, m, weight_exponent, spec):
    axes = _upper_triangle_axes(m)
    f_flat = _cone_integrand(f, m, weight_exponent, axes)
    n_samples = spec.order_or_samples
    _check_budget(n_samples, "integrate_spd_cone/monte_carlo")
    sigma = 1.0 / math.sqrt(2.0)
    diag_mask = np.array([i == j for (i, j) in axes])
    # proposal density: half-normal on diagonal axes, normal elsewhere
    log_norm = 0.5 * len(axes) * math.log(math.pi) - np.sum(diag_mask) * math.log(2.0)
    total = 0.0
    total_sq = 0.0
    count = 0
    chunk_idx = 0
    while count < n_samples:
        c = min(MC_CHUNK, n_samples - count)
        rng = rng_for(mix_seed(spec.seed, chunk_idx))
        pts = sigma * rng.standard_normal((c, len(axes)))
        pts[:, diag_mask] = np.abs(pts[:, diag_mask])
        logw = np.sum(pts * pts, axis=1) + log_norm
        vals = f_flat(pts) * np.exp(logw)
        total = total + np.sum(vals)
        total_sq = total_sq + np.sum(np.abs(vals) ** 2)
        count += c
        chunk_idx += 1
    mean = total / count
    var = max(float(total_sq / count - abs(mean) ** 2), 0.0)
    se = math.sqrt(var / count)
    return IntegralResult(mean, se, count)
