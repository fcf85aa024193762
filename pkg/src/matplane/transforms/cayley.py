"""Determinant-of-second-derivatives operator on lattice fields.

The operator is det(D'D) where (D'D)_ij = sum_a d^2 / dx_{a,i} dx_{a,j};
its Fourier multiplier is (-1)^m det(y'y).  Two lattice realizations are
provided: a spectral one (multiply the discrete transform by the
multiplier) and a stencil one (expand the determinant over permutations
into compositions of centered differences).
"""

from __future__ import annotations

import itertools

import numpy as np

from ..errors import BadSpec
from ..lattice import LatticeField
from ..matspace import gram

_SECOND = {
    2: ([-1, 0, 1], np.array([1.0, -2.0, 1.0])),
    4: ([-2, -1, 0, 1, 2], np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0),
    6: ([-3, -2, -1, 0, 1, 2, 3],
        np.array([2.0, -27.0, 270.0, -490.0, 270.0, -27.0, 2.0]) / 180.0),
}
_FIRST = {
    2: ([-1, 1], np.array([-0.5, 0.5])),
    4: ([-2, -1, 1, 2], np.array([1.0, -8.0, 8.0, -1.0]) / 12.0),
    6: ([-3, -2, -1, 1, 2, 3],
        np.array([-1.0, 9.0, -45.0, 45.0, -9.0, 1.0]) / 60.0),
}


def cayley_laplace_multiplier(y: np.ndarray, m: int) -> np.ndarray:
    """The Fourier symbol (-1)^m det(y'y) at stacked frequencies."""
    return ((-1.0) ** m) * np.linalg.det(gram(np.asarray(y, dtype=float)))


def _multiplier_grid(freqs, n: int, m: int) -> np.ndarray:
    """(-1)^m det(y'y) on the tensor frequency grid, without materializing y.

    Builds the m x m Gram entries G_ij = sum_a y_{a,i} y_{a,j} by
    broadcasting the per-axis frequency vectors (axis a*m + i carries
    entry (a, i)), then expands the determinant over permutations.
    """
    d = n * m
    shape = tuple(len(f) for f in freqs)

    def axis_view(ax):
        view = [1] * d
        view[ax] = shape[ax]
        return freqs[ax].reshape(view)

    gram_entries = {}
    for i in range(m):
        for j in range(i, m):
            g = np.zeros(shape)
            for a in range(n):
                g = g + axis_view(a * m + i) * axis_view(a * m + j)
            gram_entries[(i, j)] = g

    def entry(i, j):
        return gram_entries[(i, j) if i <= j else (j, i)]

    det = np.zeros(shape)
    for perm in itertools.permutations(range(m)):
        term = np.ones(shape)
        for i in range(m):
            term = term * entry(i, perm[i])
        det += _permutation_sign(perm) * term
    return ((-1.0) ** m) * det


def _shift(vals: np.ndarray, axis: int, offset: int, periodic: bool) -> np.ndarray:
    """out[i] = vals[i + offset] along ``axis`` (zero fill unless periodic)."""
    if offset == 0:
        return vals.copy()
    if periodic:
        return np.roll(vals, -offset, axis=axis)
    out = np.zeros_like(vals)
    src = [slice(None)] * vals.ndim
    dst = [slice(None)] * vals.ndim
    if offset > 0:
        src[axis] = slice(offset, None)
        dst[axis] = slice(None, -offset)
    else:
        src[axis] = slice(None, offset)
        dst[axis] = slice(-offset, None)
    out[tuple(dst)] = vals[tuple(src)]
    return out


def _apply_stencil(vals, axis, h, table, order, periodic):
    offsets, coeffs = table[order]
    out = np.zeros_like(vals)
    for off, cf in zip(offsets, coeffs):
        out += cf * _shift(vals, axis, off, periodic)
    power = 2 if table is _SECOND else 1
    return out / h ** power


def _pair_operator(vals, i, j, n, m, spacings, order, periodic):
    """(D'D)_ij on a lattice field; axis a*m + i carries entry (a, i)."""
    out = np.zeros_like(vals)
    for a in range(n):
        ax_i = a * m + i
        ax_j = a * m + j
        if i == j:
            out += _apply_stencil(vals, ax_i, spacings[ax_i], _SECOND, order, periodic)
        else:
            tmp = _apply_stencil(vals, ax_j, spacings[ax_j], _FIRST, order, periodic)
            out += _apply_stencil(tmp, ax_i, spacings[ax_i], _FIRST, order, periodic)
    return out


def _stencil_reach(order: int) -> int:
    return {2: 1, 4: 2, 6: 3}[order]


def cayley_laplace_apply(field: LatticeField, dims, mode: str,
                         boundary: str = "zero", stencil_order: int = 4):
    """Apply the operator to a lattice field.

    ``mode`` is "fourier_multiplier" (spectral, exact for the lattice
    interpolant, implicitly periodic) or "finite_difference" (centered
    stencils of the given order, zero or periodic padding).

    Returns (result field, contamination mask); the mask marks points
    within stencil reach of the boundary in finite-difference mode and is
    all-False for the spectral mode, whose periodization error is global
    rather than local.
    """
    n, m = dims if isinstance(dims, tuple) else (dims.n, dims.m)
    if field.dims != (n, m):
        raise BadSpec(f"field dims {field.dims} do not match ({n}, {m})")
    vals = field.values
    if mode == "fourier_multiplier":
        # plain FFT frequencies (the grid with a zero bin, so constants are
        # annihilated exactly); a pure multiplier is translation-covariant,
        # so the cell-centered coordinate offset plays no role
        fv = np.fft.fftn(vals)
        freqs = [2.0 * np.pi * np.fft.fftfreq(npts, d=h)
                 for npts, h in zip(vals.shape, field.spacings)]
        mult = _multiplier_grid(freqs, n, m)
        out = np.fft.ifftn(fv * mult)
        mask = np.zeros(field.shape, dtype=bool)
        return LatticeField(np.real(out), field.spacings, (n, m)), mask

    if mode != "finite_difference":
        raise BadSpec(f"unknown mode {mode!r}")
    if stencil_order not in _SECOND:
        raise BadSpec(f"stencil_order must be one of {sorted(_SECOND)}")
    if boundary not in ("zero", "periodic"):
        raise BadSpec(f"boundary must be 'zero' or 'periodic', got {boundary!r}")
    periodic = boundary == "periodic"

    out = np.zeros_like(vals, dtype=float)
    reach = np.zeros(vals.ndim, dtype=int)
    hw = _stencil_reach(stencil_order)
    for perm in itertools.permutations(range(m)):
        sign = _permutation_sign(perm)
        term = vals.astype(float)
        term_reach = np.zeros(vals.ndim, dtype=int)
        for i in range(m):
            term = _pair_operator(term, i, perm[i], n, m, field.spacings,
                                  stencil_order, periodic)
            for a in range(n):
                term_reach[a * m + i] += hw
                if perm[i] != i:
                    term_reach[a * m + perm[i]] += hw
        out += sign * term
        reach = np.maximum(reach, term_reach)

    mask = np.zeros(vals.shape, dtype=bool)
    if not periodic:
        for ax in range(vals.ndim):
            r = int(reach[ax])
            if r == 0:
                continue
            sl = [slice(None)] * vals.ndim
            sl[ax] = slice(0, r)
            mask[tuple(sl)] = True
            sl[ax] = slice(vals.shape[ax] - r, None)
            mask[tuple(sl)] = True
    return LatticeField(out, field.spacings, (n, m)), mask


def _permutation_sign(perm) -> int:
    sign = 1
    seen = [False] * len(perm)
    for i in range(len(perm)):
        if seen[i]:
            continue
        j = i
        length = 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign
