"""Function-on-matrix-space and function-on-planes value types.

``FieldFunction.evaluate`` must accept stacked points of shape
(..., n, m) and return values of shape (...); ``PlaneFunction.evaluate``
takes stacked (frame, offset) pairs.  Both are plain callables bundled
with metadata; closed-form companions, when known, live in
``closed_forms`` under the keys "mass", "radon", "fourier" and
"radon_t_fourier" and are used by oracle tests and semi-analytic modes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..matspace import gram, mix_seed, rng_for


@dataclass(frozen=True)
class FieldFunction:
    """A scalar function on the space of n x m matrices."""

    evaluate: object  # callable (..., n, m) -> (...)
    dims: tuple
    decay_lambda: float | None = None
    closed_forms: dict = field(default_factory=dict)

    def __call__(self, x):
        return self.evaluate(np.asarray(x, dtype=float))


@dataclass(frozen=True)
class PlaneFunction:
    """A scalar function of matrix planes, given on (frame, offset) pairs.

    ``t_fourier``, when present, is the closed-form Fourier transform in
    the offset variable, callable as t_fourier(xi, b).
    """

    evaluate: object  # callable (xi (..., n, n-k), t (..., n-k, m)) -> (...)
    dims: tuple  # (n, m, k)
    t_fourier: object | None = None

    def __call__(self, xi, t):
        return self.evaluate(np.asarray(xi, dtype=float), np.asarray(t, dtype=float))


def shift_field(f: FieldFunction, y0: np.ndarray) -> FieldFunction:
    """The translate x -> f(x + y0), with decay metadata preserved."""
    y0 = np.asarray(y0, dtype=float)

    def evaluate(x):
        return f.evaluate(x + y0)

    return FieldFunction(evaluate=evaluate, dims=f.dims, decay_lambda=f.decay_lambda)


def compose_affine(f: FieldFunction, gamma: np.ndarray, beta: np.ndarray,
                   y0: np.ndarray) -> FieldFunction:
    """The composition x -> f(gamma x beta + y0) for orthogonal gamma, beta."""
    gamma = np.asarray(gamma, dtype=float)
    beta = np.asarray(beta, dtype=float)
    y0 = np.asarray(y0, dtype=float)

    def evaluate(x):
        return f.evaluate(gamma @ x @ beta + y0)

    return FieldFunction(evaluate=evaluate, dims=f.dims, decay_lambda=f.decay_lambda)


def decay_audit(f: FieldFunction, num_rays: int = 20, seed: int = 0,
                t_max: float = 50.0, num_t: int = 60) -> float:
    """Largest sampled value of |f(x)| |I + x'x|^(lambda/2) along random rays.

    Requires ``decay_lambda`` metadata; the returned supremum should stay
    bounded (equal to the ray maximum of the normalized profile) when the
    advertised decay rate holds.
    """
    if f.decay_lambda is None:
        raise ValueError("field carries no decay_lambda metadata")
    n, m = f.dims
    rng = rng_for(mix_seed(seed, 77))
    dirs = rng.standard_normal((num_rays, n, m))
    dirs /= np.sqrt(np.sum(dirs * dirs, axis=(-2, -1)))[:, None, None]
    ts = np.geomspace(1e-2, t_max, num_t)
    pts = dirs[:, None, :, :] * ts[None, :, None, None]
    pts = pts.reshape(-1, n, m)
    vals = np.abs(f.evaluate(pts))
    g = gram(pts) + np.eye(m)
    envelope = np.linalg.det(g) ** (f.decay_lambda / 2.0)
    return float(np.max(vals * envelope))
