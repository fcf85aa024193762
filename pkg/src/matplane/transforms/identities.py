"""Cross-checks pairing two independently computed sides of an identity.

Every check here evaluates its left and right sides through disjoint
quadrature pipelines (different seeds, and different rules where
possible) so that correlated numerical error cannot fake agreement.
"""

from __future__ import annotations

import numpy as np

from ..lattice import LatticeField, centered_dft, centered_idft, sample_on_lattice
from ..matspace import (complete_to_rotation, det_root, haar_rotations,
                        haar_stiefels, mix_seed, standard_frame, transpose)
from ..quadrature import MC_CHUNK, QuadratureSpec
from ..specialfn import fuglede_const
from .fields import FieldFunction, PlaneFunction
from .radon import dual_radon, in_plane_rule, radon_at_offsets, radon_plane_function
from .riesz import riesz

_TINY = 1e-300


def fuglede_check(f: FieldFunction, x: np.ndarray, k: int, spec: QuadratureSpec,
                  radon_order: int = 16, rhs_u_order: int = 20,
                  rhs_group_samples: int | None = None):
    """Backprojected transform against the potential of order k at x.

    Returns (lhs, rhs, residual).  The left side backprojects the plane
    transform (in-plane rule of order ``radon_order``, rotation average
    of ``spec.order_or_samples`` samples); the right side evaluates the
    potential through its own branch with fresh seeds and a different
    in-plane order, never reusing left-side samples.
    """
    n, m = f.dims
    x = np.asarray(x, dtype=float)
    c = fuglede_const(n, m, k)

    phi = radon_plane_function(
        f, k, spec.with_(scheme="gauss_hermite_tensor", order_or_samples=radon_order))
    lhs_spec = spec.with_(scheme="monte_carlo", seed=mix_seed(spec.seed, 101))
    lhs = c * dual_radon(phi, x, lhs_spec).value

    rhs_spec = spec.with_(
        scheme="gauss_hermite_tensor", order_or_samples=rhs_u_order,
        seed=mix_seed(spec.seed, 202))
    samples = rhs_group_samples or spec.order_or_samples
    rhs = riesz(f, k, x, rhs_spec, group_samples=samples).value

    residual = abs(lhs - rhs) / max(abs(rhs), _TINY)
    return float(lhs), float(rhs), float(residual)


def duality_check(f: FieldFunction, phi: PlaneFunction, spec: QuadratureSpec,
                  x_order: int = 8, dual_samples: int = 256,
                  frame_samples: int = 96, t_order: int = 8,
                  radon_order: int = 12) -> float:
    """Relative discrepancy of the pairing duality.

    Left side: int f(x) (dual transform of phi)(x) dx over an x-rule of
    order ``x_order``.  Right side: the frame average of
    int phi(xi, t) fhat(xi, t) dt.  All randomness is derived from
    ``spec.seed`` with disjoint child streams.
    """
    n, m, k = phi.dims
    xi0 = standard_frame(n, n - k)

    # left: x-rule and rotation-averaged dual values at the x nodes
    x_pts, x_w = in_plane_rule(
        spec.with_(scheme="gauss_hermite_tensor", order_or_samples=x_order), n, m)
    nx = x_pts.shape[0]
    acc = np.zeros(nx)
    done = 0
    chunk_idx = 0
    block = max(1, MC_CHUNK // max(nx, 1))
    while done < dual_samples:
        b = min(block, dual_samples - done)
        gam = haar_rotations(n, b, mix_seed(spec.seed, 303 + chunk_idx))
        xi = gam @ xi0
        t = np.einsum("bnp,cnm->bcpm", xi, x_pts)
        xi_rep = np.broadcast_to(xi[:, None], (b, nx, n, n - k))
        acc += np.sum(phi.evaluate(xi_rep, t), axis=0)
        done += b
        chunk_idx += 1
    dual_vals = acc / done
    lhs = float((f.evaluate(x_pts) * dual_vals) @ x_w)

    # right: frame-averaged offset integral of phi * fhat
    t_pts, t_w = in_plane_rule(
        spec.with_(scheme="gauss_hermite_tensor", order_or_samples=t_order), n - k, m)
    u_pts, u_w = in_plane_rule(
        spec.with_(scheme="gauss_hermite_tensor", order_or_samples=radon_order), k, m)
    frames = haar_stiefels(n, n - k, frame_samples, mix_seed(spec.seed, 404))
    completions = complete_to_rotation(frames, xi0)
    total = 0.0
    for idx in range(frame_samples):
        xi = frames[idx]
        fhat_vals = radon_at_offsets(f, completions[idx], t_pts, u_pts, u_w)
        xi_rep = np.broadcast_to(xi, (t_pts.shape[0], n, n - k))
        phi_vals = phi.evaluate(xi_rep, t_pts)
        total += float((phi_vals * fhat_vals) @ t_w)
    rhs = total / frame_samples

    return abs(lhs - rhs) / max(abs(lhs), abs(rhs), _TINY)


def make_phi_test(dims, shape, spacing: float, det_cutoff: float,
                  envelope_scale: float = 4.0, ramp: str = "smooth") -> LatticeField:
    """Lattice test function whose discrete Fourier data avoids small det.

    Built on the frequency side as exp(-tr(y'y)/envelope_scale) cut to
    zero where det(y'y)^(1/2) < det_cutoff, then transformed back to a
    real lattice field with the requested primal spacing.

    ``ramp`` selects how the cutoff reaches zero: "smooth" (default)
    uses an infinitely flat ramp over [cutoff, 2 cutoff], "hard" is a
    sharp indicator.  Both leave the Fourier data exactly zero below the
    cutoff; the sharp variant makes the field ring badly in space, which
    wrecks lattice pairings at desk resolutions, so the smooth ramp is
    the default.
    """
    n, m = dims.n, dims.m
    d = n * m
    shape = tuple(shape) if np.ndim(shape) else (int(shape),) * d
    spacings = (float(spacing),) * d
    dual = tuple(2.0 * np.pi / (npts * h) for npts, h in zip(shape, spacings))
    if ramp not in ("smooth", "hard"):
        raise ValueError(f"unknown ramp {ramp!r}")

    def gfun(y):
        e = np.exp(-np.sum(y * y, axis=(-2, -1)) / envelope_scale)
        droot = det_root(y)
        if ramp == "hard":
            return e * (droot >= det_cutoff)
        from .inversion import _smoothstep
        return e * _smoothstep((droot - det_cutoff) / max(det_cutoff, 1e-12))

    gfield = sample_on_lattice(gfun, shape, dual, (n, m))
    vals, spac = centered_idft(gfield.values, dual)
    return LatticeField(np.real(vals), spac, (n, m))


def phi_pairing_check(f: FieldFunction, phi_test: LatticeField, k: int,
                      group_samples: int = 48, radon_order: int = 10,
                      seed: int = 0) -> float:
    """Pairing inversion residual on a lattice.

    Computes A = <f, phi> by lattice quadrature and
    B = c <(fhat)-backprojection, multiplier-inverted phi>, where the
    multiplier inversion applies det(y'y)^(k/2) to the discrete Fourier
    data of phi, and returns |A - B| / max(|A|, tiny).
    """
    n, m = f.dims
    c = fuglede_const(n, m, k)
    vol = phi_test.cell_volume()
    shape = phi_test.shape
    total_pts = int(np.prod(shape))

    f_field = sample_on_lattice(f.evaluate, shape, phi_test.spacings, (n, m))
    a_side = float(np.sum(f_field.values * phi_test.values)) * vol

    # multiplier inversion of phi on the dual lattice
    fphi, dual = centered_dft(phi_test.values, phi_test.spacings)
    mult = _det_root_lattice(shape, dual, (n, m)) ** k
    w_vals = np.real(centered_idft(fphi * mult, dual)[0])

    # backprojection of the plane transform of f at every lattice point
    u_pts, u_w = in_plane_rule(
        QuadratureSpec("gauss_hermite_tensor", radon_order), k, m)
    xi0 = standard_frame(n, n - k)
    gams = haar_rotations(n, group_samples, mix_seed(seed, 606))
    gcheck = np.zeros(total_pts)
    chunk = 1 << 16
    for start in range(0, total_pts, chunk):
        stop = min(start + chunk, total_pts)
        x_blk = phi_test.point_matrices(np.arange(start, stop))
        acc = np.zeros(stop - start)
        for s in range(group_samples):
            xi = gams[s] @ xi0
            ts = transpose(xi) @ x_blk
            acc += radon_at_offsets(f, gams[s], ts, u_pts, u_w)
        gcheck[start:stop] = acc / group_samples
    b_side = c * float(np.sum(gcheck * w_vals.ravel())) * vol

    return abs(a_side - b_side) / max(abs(a_side), _TINY)


def _det_root_lattice(shape, spacings, dims, chunk: int = 1 << 18) -> np.ndarray:
    """det(y'y)^(1/2) evaluated at every lattice point."""
    field = sample_on_lattice(det_root, shape, spacings, dims, chunk=chunk)
    return field.values
