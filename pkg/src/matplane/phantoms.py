"""Closed-form test fields with attached transform oracles.

The Gaussian family carries every transform in closed form and anchors
most identity checks; the determinant-decay and critical-integrability
families probe the convergence boundary of the plane transform; the
rank-supported field is the witness used in the non-injective regime.

Closed forms attached to a field (keys of ``closed_forms``):

* ``mass``            total integral (float)
* ``radon``           plane transform, callable (xi, t) batched
* ``fourier``         ambient Fourier transform, callable (y) batched
* ``radon_t_fourier`` offset-variable transform of the plane data,
                      callable (xi, b) batched
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BadSpec, WrongRegime
from .matspace import Dims, transpose
from .quadrature import QuadratureSpec, integrate_matrix_space
from .transforms.fields import FieldFunction, PlaneFunction

PHANTOM_KINDS = ("gaussian", "shifted_gaussian", "det_decay", "boundary_lp",
                 "rank_supported")


@dataclass(frozen=True)
class PhantomSpec:
    """Recipe for a test field."""

    kind: str
    dims: tuple  # (n, m)
    shift: tuple | None = None      # shifted_gaussian: peak location (n x m, nested tuples)
    lam: float | None = None        # det_decay exponent
    p: float | None = None          # boundary_lp integrability index
    epsilon: float | None = None    # rank_supported spectral cutoff
    k: int | None = None            # rank_supported plane parameter
    lattice_points: int = 16        # rank_supported mode lattice
    freq_spacing: float = 0.45      # rank_supported mode spacing

    def __post_init__(self):
        if self.kind not in PHANTOM_KINDS:
            raise BadSpec(f"unknown phantom kind {self.kind!r}")
        if self.kind == "shifted_gaussian" and self.shift is None:
            raise BadSpec("shifted_gaussian needs a shift")
        if self.kind == "det_decay" and (self.lam is None or self.lam <= 0):
            raise BadSpec("det_decay needs lambda > 0")
        if self.kind == "boundary_lp" and (self.p is None or self.p < 1):
            raise BadSpec("boundary_lp needs p >= 1")
        if self.kind == "rank_supported":
            if self.epsilon is None or self.epsilon <= 0:
                raise BadSpec("rank_supported needs epsilon > 0")
            if self.k is None:
                raise BadSpec("rank_supported needs the plane parameter k")

    def to_dict(self) -> dict:
        from dataclasses import asdict
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "PhantomSpec":
        d = dict(d)
        if d.get("dims") is not None:
            d["dims"] = tuple(d["dims"])
        if d.get("shift") is not None:
            d["shift"] = tuple(tuple(row) for row in d["shift"])
        return cls(**d)


def _gaussian_forms(n: int, m: int, y0: np.ndarray | None = None) -> dict:
    """Closed transforms of exp(-tr((x - y0)'(x - y0)))."""
    shift = np.zeros((n, m)) if y0 is None else np.asarray(y0, dtype=float)

    def radon_form(xi, t):
        # peak moves to the offset xi' y0 within each plane
        k = n - np.shape(xi)[-1]
        t0 = transpose(xi) @ shift
        diff = t - t0
        return math.pi ** (k * m / 2.0) * np.exp(-np.sum(diff * diff, axis=(-2, -1)))

    def fourier_form(y):
        y = np.asarray(y, dtype=float)
        phase = np.sum(y * shift, axis=(-2, -1))
        return (math.pi ** (n * m / 2.0)
                * np.exp(-np.sum(y * y, axis=(-2, -1)) / 4.0)
                * np.exp(1j * phase))

    def radon_t_fourier(xi, b):
        # transform of the plane data in the offset variable at frequency b
        k = n - np.shape(xi)[-1]
        y = xi @ b
        phase = np.sum(y * shift, axis=(-2, -1))
        return (math.pi ** (n * m / 2.0)
                * np.exp(-np.sum(b * b, axis=(-2, -1)) / 4.0)
                * np.exp(1j * phase))

    return {
        "mass": math.pi ** (n * m / 2.0),
        "radon": radon_form,
        "fourier": fourier_form,
        "radon_t_fourier": radon_t_fourier,
    }


def make_phantom(spec: PhantomSpec) -> FieldFunction:
    """Build the field described by ``spec`` with its oracles attached."""
    n, m = spec.dims

    if spec.kind == "gaussian":
        def evaluate(x):
            return np.exp(-np.sum(x * x, axis=(-2, -1)))

        return FieldFunction(evaluate=evaluate, dims=(n, m), decay_lambda=None,
                             closed_forms=_gaussian_forms(n, m))

    if spec.kind == "shifted_gaussian":
        y0 = np.asarray(spec.shift, dtype=float)
        if y0.shape != (n, m):
            raise BadSpec(f"shift must be {n} x {m}")

        def evaluate(x):
            d = x - y0
            return np.exp(-np.sum(d * d, axis=(-2, -1)))

        return FieldFunction(evaluate=evaluate, dims=(n, m), decay_lambda=None,
                             closed_forms=_gaussian_forms(n, m, y0))

    if spec.kind == "det_decay":
        lam = float(spec.lam)

        def evaluate(x):
            g = transpose(x) @ x + np.eye(m)
            return np.linalg.det(g) ** (-lam / 2.0)

        return FieldFunction(evaluate=evaluate, dims=(n, m), decay_lambda=lam)

    if spec.kind == "boundary_lp":
        p = float(spec.p)
        expo = (n + m - 1) / (2.0 * p)

        def evaluate(x):
            g = transpose(x) @ x + 2.0 * np.eye(m)
            d = np.linalg.det(g)
            return d ** (-expo) / np.log(d)

        return FieldFunction(evaluate=evaluate, dims=(n, m),
                             decay_lambda=2.0 * expo)

    # rank-supported witness, band-limited on its construction lattice
    from .transforms.inversion import witness_field_function
    dims3 = Dims(n, m, int(spec.k))
    if dims3.n - dims3.k >= m:
        raise WrongRegime("rank_supported phantom lives in the regime n-k < m")
    evaluate, _field = witness_field_function(
        dims3, float(spec.epsilon), spec.lattice_points, spec.freq_spacing)
    return FieldFunction(evaluate=evaluate, dims=(n, m))


def _critical_index(dims: Dims) -> float:
    n, m, k = dims.n, dims.m, dims.k
    return (n + m - 1) / (k + m - 1)


RADIUS_LADDER = (1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0)


def _truncated_radon_ladder(dims: Dims, p: float, spec: QuadratureSpec):
    """Plane-transform integrals of the critical field over growing balls.

    The plane is the standard one through the origin; its points are
    [u; 0], so the integrand depends on the in-plane coordinates alone.
    """
    n, m, k = dims.n, dims.m, dims.k
    f = make_phantom(PhantomSpec(kind="boundary_lp", dims=(n, m), p=p))
    g = np.eye(n)  # the standard plane completes to the identity rotation
    pad = np.zeros((n - k, m))

    out = []
    for radius in RADIUS_LADDER:
        def integrand(u):
            t_rep = np.broadcast_to(pad, u.shape[:-2] + pad.shape)
            x = g @ np.concatenate((u, t_rep), axis=-2)
            return f.evaluate(x)

        res = integrate_matrix_space(
            integrand, k, m,
            spec.with_(scheme="truncated_grid", truncation_radius=radius))
        out.append((radius, float(res.value)))
    return out


def divergence_demo(dims: Dims, p: float, spec: QuadratureSpec):
    """Truncated transform ladder in the divergent regime p >= critical index.

    Returns the list of (radius, partial integral) pairs; the sequence
    grows without stabilizing when the claim holds.
    """
    p0 = _critical_index(dims)
    if p < p0:
        raise WrongRegime(
            f"p={p} is below the critical index {p0}; use convergence_demo")
    return _truncated_radon_ladder(dims, p, spec)


def convergence_demo(dims: Dims, p: float, spec: QuadratureSpec):
    """Truncated transform ladder in the convergent regime p < critical index."""
    p0 = _critical_index(dims)
    if p >= p0:
        raise WrongRegime(
            f"p={p} is at or above the critical index {p0}; use divergence_demo")
    return _truncated_radon_ladder(dims, p, spec)


def phantom_radon_data(f: FieldFunction, k: int) -> PlaneFunction:
    """Closed-form plane data of a phantom, as a batched plane function."""
    if "radon" not in f.closed_forms:
        raise BadSpec("phantom carries no closed-form plane transform")
    n, m = f.dims
    radon_form = f.closed_forms["radon"]
    t_fourier = f.closed_forms.get("radon_t_fourier")
    return PlaneFunction(evaluate=radon_form, dims=(n, m, k), t_fourier=t_fourier)
