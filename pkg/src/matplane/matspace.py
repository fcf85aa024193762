"""Geometry core for spaces of n x m real matrices.

Points of the ambient space are plain ``numpy`` arrays of shape
``(n, m)``; batched operations accept stacks of shape ``(..., n, m)``.
Orthonormal frames, rotations and symmetric positive definite matrices
are likewise arrays, validated by the ``check_*`` helpers below.

All samplers are pure functions of their seed.  Callers that need
several independent streams should derive child seeds with
:func:`mix_seed` (the documented convention is ``seed_i = mix_seed(base,
i)``).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import RankDeficient, ShapeMismatch

FRAME_TOL = 1e-12
ROTATION_DET_TOL = 1e-10

_MASK64 = (1 << 64) - 1


def mix_seed(base: int, index: int) -> int:
    """Derive the ``index``-th child seed from ``base`` (splitmix64 step)."""
    z = (int(base) + 0x9E3779B97F4A7C15 * (int(index) + 1)) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def rng_for(seed: int) -> np.random.Generator:
    """Counter-based generator for a 64-bit seed (stable across runs)."""
    return np.random.Generator(np.random.Philox(key=seed & _MASK64))


@dataclass(frozen=True)
class Dims:
    """Dimension triple (n, m, k): ambient n x m matrices, plane parameter k."""

    n: int
    m: int
    k: int

    def __post_init__(self):
        if not (0 < self.k < self.n):
            raise ValueError(f"require 0 < k < n, got k={self.k}, n={self.n}")
        if self.m < 1:
            raise ValueError(f"require m >= 1, got m={self.m}")

    @property
    def injective(self) -> bool:
        """Whether the plane transform is injective in this regime."""
        return self.n - self.k >= self.m

    @property
    def k0(self):
        """Largest small integer order min(m-1, n-m); None for m = 1."""
        if self.m < 2:
            return None
        return min(self.m - 1, self.n - self.m)


def transpose(x: np.ndarray) -> np.ndarray:
    return np.swapaxes(x, -2, -1)


def gram(x: np.ndarray) -> np.ndarray:
    """x'x, batched over leading axes."""
    return transpose(x) @ x


def frob_norm(x: np.ndarray) -> np.ndarray:
    return np.sqrt(np.sum(np.square(x), axis=(-2, -1)))


def det_root(x: np.ndarray) -> np.ndarray:
    """det(x'x)^(1/2), clamped at 0 against negative round-off.

    Vanishes exactly when the columns of ``x`` are dependent.
    """
    d = np.linalg.det(gram(np.asarray(x, dtype=float)))
    return np.sqrt(np.clip(d, 0.0, None))


def check_frame(v: np.ndarray, tol: float = FRAME_TOL) -> np.ndarray:
    """Validate v'v = I within ``tol`` (max-abs); returns ``v``."""
    v = np.asarray(v, dtype=float)
    p = v.shape[-1]
    resid = np.max(np.abs(gram(v) - np.eye(p)))
    if resid > tol:
        raise ShapeMismatch(f"not an orthonormal frame: |v'v - I| = {resid:.3e}")
    return v

def check_rotation(g: np.ndarray, tol: float = FRAME_TOL) -> np.ndarray:
    """Validate g'g = I within ``tol`` and det g = 1 within 1e-10; returns ``g``."""
    g = check_frame(g, tol)
    if g.shape[-2] != g.shape[-1]:
        raise ShapeMismatch("rotation must be square")
    ddet = np.max(np.abs(np.linalg.det(g) - 1.0))
    if ddet > ROTATION_DET_TOL:
        raise ShapeMismatch(f"determinant deviates from +1 by {ddet:.3e}")
    return g


def check_spd(r: np.ndarray, sym_rtol: float = 1e-12) -> np.ndarray:
    """Validate symmetry (relative) and strict positive definiteness."""
    r = np.asarray(r, dtype=float)
    scale = max(float(np.max(np.abs(r))), 1e-300)
    asym = float(np.max(np.abs(r - transpose(r)))) / scale
    if asym > sym_rtol:
        raise ShapeMismatch(f"matrix not symmetric: relative asymmetry {asym:.3e}")
    w = np.linalg.eigvalsh(0.5 * (r + transpose(r)))
    if np.min(w) <= 0.0:
        raise RankDeficient(f"matrix not positive definite: min eigenvalue {np.min(w):.3e}")
    return r


def standard_frame(rows: int, cols: int) -> np.ndarray:
    """The frame [0; I_cols] whose columns span the last ``cols`` coordinates."""
    if cols > rows:
        raise ShapeMismatch(f"frame needs cols <= rows, got {cols} > {rows}")
    f = np.zeros((rows, cols))
    f[rows - cols:, :] = np.eye(cols)
    return f


def spd_sqrt(r: np.ndarray) -> np.ndarray:
    """Symmetric square root of a positive definite matrix (batched)."""
    w, q = np.linalg.eigh(r)
    w = np.clip(w, 0.0, None)
    return (q * np.sqrt(w)[..., None, :]) @ transpose(q)


def spd_inv_sqrt(r: np.ndarray) -> np.ndarray:
    w, q = np.linalg.eigh(r)
    return (q * (1.0 / np.sqrt(w))[..., None, :]) @ transpose(q)


def polar_decompose(x: np.ndarray, rel_threshold: float = 1e-10):
    """Factor a full-column-rank x as v r^(1/2) with v'v = I, r = x'x.

    Parameters
    ----------
    x : array (..., n, m) with n >= m
    rel_threshold : smallest admissible ratio of extreme singular values

    Returns
    -------
    (v, r) : frame of shape (..., n, m) and positive definite (..., m, m)

    Raises
    ------
    RankDeficient
        when the smallest singular value is below ``rel_threshold`` times
        the largest.
    """
    x = np.asarray(x, dtype=float)
    n, m = x.shape[-2:]
    if n < m:
        raise ShapeMismatch(f"polar decomposition needs n >= m, got {n} < {m}")
    u, s, vt = np.linalg.svd(x, full_matrices=False)
    smin = np.min(s, axis=-1)
    smax = np.max(s, axis=-1)
    if np.any(smin < rel_threshold * smax) or np.any(smax == 0.0):
        raise RankDeficient(
            f"singular value ratio below threshold {rel_threshold:g}")
    v = u @ vt
    r = gram(x)
    r = 0.5 * (r + transpose(r))
    return v, r


def _complete_frames(frames: np.ndarray) -> np.ndarray:
    """Extend orthonormal frames (..., n, p) to elements of SO(n).

    The first p columns of the result equal the input exactly (up to
    sign-fixed Householder QR round-off); the completion is deterministic
    and any determinant fix is applied to the last completed column.
    """
    frames = np.asarray(frames, dtype=float)
    n, p = frames.shape[-2:]
    q, r = np.linalg.qr(frames, mode="complete")
    d = np.sign(np.diagonal(r, axis1=-2, axis2=-1))
    d = np.where(d == 0.0, 1.0, d)
    q = q.copy()
    q[..., :p] *= d[..., None, :]
    det = np.linalg.det(q)
    if p < n:
        flip = det < 0
        q[..., -1] = np.where(flip[..., None], -q[..., -1], q[..., -1])
    elif np.any(det < 0):
        raise ShapeMismatch("cannot complete a full negative-determinant frame inside SO(n)")
    return q


def complete_to_rotation(frame: np.ndarray, anchor: np.ndarray) -> np.ndarray:
    """Deterministic g in SO(n) with g @ anchor = frame.

    Both arguments must be orthonormal frames of identical shape (n, p).
    Batched frames of shape (..., n, p) are mapped against a single
    anchor.
    """
    frame = np.asarray(frame, dtype=float)
    anchor = np.asarray(anchor, dtype=float)
    if frame.shape[-2:] != anchor.shape[-2:]:
        raise ShapeMismatch(
            f"frame shape {frame.shape[-2:]} != anchor shape {anchor.shape[-2:]}")
    g_frame = _complete_frames(frame)
    g_anchor = _complete_frames(anchor)
    return g_frame @ transpose(g_anchor)


def haar_rotations(n: int, count: int, seed: int) -> np.ndarray:
    """``count`` independent Haar-distributed elements of SO(n).

    QR of a standard Gaussian matrix with the R-diagonal sign fix; a
    draw with determinant -1 has its last column negated.
    """
    if n < 1:
        raise ShapeMismatch("n must be >= 1")
    rng = rng_for(seed)
    a = rng.standard_normal((count, n, n))
    q, r = np.linalg.qr(a)
    d = np.sign(np.diagonal(r, axis1=-2, axis2=-1))
    d = np.where(d == 0.0, 1.0, d)
    q = q * d[..., None, :]
    flip = np.linalg.det(q) < 0
    q[..., -1] = np.where(flip[..., None], -q[..., -1], q[..., -1])
    return q


def haar_rotation(n: int, seed: int) -> np.ndarray:
    """One Haar-distributed element of SO(n), deterministic in ``seed``."""
    return haar_rotations(n, 1, seed)[0]


def haar_stiefels(n: int, p: int, count: int, seed: int) -> np.ndarray:
    """``count`` frames drawn uniformly on the Stiefel manifold V_{n,p}."""
    if p > n:
        raise ShapeMismatch(f"need p <= n, got p={p} > n={n}")
    rng = rng_for(seed)
    a = rng.standard_normal((count, n, p))
    q, r = np.linalg.qr(a)
    d = np.sign(np.diagonal(r, axis1=-2, axis2=-1))
    d = np.where(d == 0.0, 1.0, d)
    return q * d[..., None, :]


def haar_stiefel(n: int, p: int, seed: int) -> np.ndarray:
    """One uniform frame on V_{n,p}, deterministic in ``seed``."""
    return haar_stiefels(n, p, 1, seed)[0]


def haar_orthogonals(n: int, count: int, seed: int) -> np.ndarray:
    """Haar samples on the full orthogonal group O(n).

    A rotation is drawn first; a fair coin (same stream) decides whether
    the last column is negated, which visits both determinant components.
    """
    q = haar_rotations(n, count, mix_seed(seed, 0))
    coin = rng_for(mix_seed(seed, 1)).integers(0, 2, size=count).astype(bool)
    q[..., -1] = np.where(coin[..., None], -q[..., -1], q[..., -1])
    return q


@dataclass(frozen=True, eq=False)
class MatrixPlane:
    """A matrix k-plane {x : xi'x = t}, stored as one (xi, t) representative.

    The pair is only defined up to the simultaneous substitution
    ``(xi, t) -> (xi q', q t)`` for orthogonal q; equality must therefore
    go through :func:`planes_equal` (which compares canonical forms),
    never through the raw fields — no ``__eq__`` is generated.
    """

    xi: np.ndarray
    t: np.ndarray

    def __post_init__(self):
        xi = check_frame(self.xi)
        t = np.asarray(self.t, dtype=float)
        if t.shape[0] != xi.shape[1]:
            raise ShapeMismatch(
                f"offset rows {t.shape[0]} != frame columns {xi.shape[1]}")
        object.__setattr__(self, "xi", xi)
        object.__setattr__(self, "t", t)

    @property
    def n(self) -> int:
        return self.xi.shape[0]

    @property
    def m(self) -> int:
        return self.t.shape[1]

    @property
    def k(self) -> int:
        return self.xi.shape[0] - self.xi.shape[1]


def plane_canonical(plane: MatrixPlane):
    """Canonical form (projector xi xi', offset xi t) of a plane.

    Invariant under the O(n-k) ambiguity of the (xi, t) parameterization.
    """
    proj = plane.xi @ transpose(plane.xi)
    lam = plane.xi @ plane.t
    return proj, lam


def planes_equal(a: MatrixPlane, b: MatrixPlane, tol: float = 1e-10) -> bool:
    """Plane equality through the canonical form."""
    pa, la = plane_canonical(a)
    pb, lb = plane_canonical(b)
    return bool(np.max(np.abs(pa - pb)) <= tol and np.max(np.abs(la - lb)) <= tol)


def plane_rotation(plane: MatrixPlane) -> np.ndarray:
    """The deterministic rotation carrying the standard coframe onto plane.xi."""
    anchor = standard_frame(plane.n, plane.n - plane.k)
    return complete_to_rotation(plane.xi, anchor)


def plane_point(plane: MatrixPlane, u: np.ndarray, rotation: np.ndarray | None = None) -> np.ndarray:
    """The point of the plane with in-plane coordinates ``u`` (k x m).

    Returns g [u; t] where g is the plane's completion rotation; the
    result satisfies xi' x = t.
    """
    u = np.asarray(u, dtype=float)
    if u.shape[-2:] != (plane.k, plane.m):
        raise ShapeMismatch(
            f"coordinates must be {plane.k} x {plane.m}, got {u.shape[-2:]}")
    g = plane_rotation(plane) if rotation is None else rotation
    t = np.broadcast_to(plane.t, u.shape[:-2] + plane.t.shape)
    stacked = np.concatenate((u, t), axis=-2)
    return g @ stacked
