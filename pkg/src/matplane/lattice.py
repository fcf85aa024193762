"""Lattice-sampled fields on matrix space and their Fourier transforms.

A lattice field samples a function of p x q matrices on a cell-centered
rectangular lattice: axis ``a*q + j`` carries entry (a, j) of the matrix
and has coordinates ``(idx - (N-1)/2) * spacing``.  The discrete
transforms below implement the continuum convention

    forward:  F(y) = int exp(+i tr(y'x)) f(x) dx
    inverse:  f(x) = (2 pi)^(-pq) int exp(-i tr(x'y)) F(y) dy

as plain Riemann sums over the lattice, evaluated with FFTs plus the
phase factors induced by cell centering.  The spacings of the dual
lattice satisfy h * h_dual = 2 pi / N per axis, which makes the forward
and inverse sums exact mutual inverses.

Fields serialize to a little-endian binary container: magic "MPLN",
version u32, n u32, m u32, one u32 extent and one f64 spacing per axis,
then the row-major float64 payload.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .errors import BadSpec, ShapeMismatch

MPLN_MAGIC = b"MPLN"
MPLN_VERSION = 1


def centered_coords(npts: int, spacing: float) -> np.ndarray:
    return (np.arange(npts) - (npts - 1) / 2.0) * spacing


@dataclass
class LatticeField:
    """Values of a scalar field on a cell-centered matrix-space lattice."""

    values: np.ndarray
    spacings: tuple
    dims: tuple  # (n, m) with values.ndim == n * m

    def __post_init__(self):
        n, m = self.dims
        if self.values.ndim != n * m:
            raise ShapeMismatch(
                f"field has {self.values.ndim} axes, dims {self.dims} need {n * m}")
        if len(self.spacings) != self.values.ndim:
            raise ShapeMismatch("one spacing per axis required")
        self.spacings = tuple(float(h) for h in self.spacings)

    @property
    def shape(self):
        return self.values.shape

    def axis_coords(self, axis: int) -> np.ndarray:
        return centered_coords(self.values.shape[axis], self.spacings[axis])

    def cell_volume(self) -> float:
        return float(np.prod(self.spacings))

    def point_matrices(self, flat_indices: np.ndarray) -> np.ndarray:
        """Matrix coordinates (batch, n, m) of the given flat lattice indices."""
        n, m = self.dims
        idx = np.unravel_index(flat_indices, self.values.shape)
        pts = np.empty((len(flat_indices), n * m))
        for ax in range(n * m):
            pts[:, ax] = self.axis_coords(ax)[idx[ax]]
        return pts.reshape(-1, n, m)


def sample_on_lattice(fn, shape, spacings, dims, chunk: int = 1 << 18) -> LatticeField:
    """Evaluate a batched matrix function on a lattice, chunked over memory."""
    n, m = dims
    total = int(np.prod(shape))
    out = np.empty(total)
    axes = [centered_coords(npts, h) for npts, h in zip(shape, spacings)]
    for start in range(0, total, chunk):
        stop = min(start + chunk, total)
        flat = np.arange(start, stop)
        idx = np.unravel_index(flat, shape)
        pts = np.empty((stop - start, n * m))
        for ax in range(n * m):
            pts[:, ax] = axes[ax][idx[ax]]
        out[start:stop] = fn(pts.reshape(-1, n, m))
    return LatticeField(out.reshape(shape), tuple(spacings), dims)


def _axis_phases(npts: int, forward: bool):
    c = (npts - 1) / 2.0
    idx = np.arange(npts)
    s = -1.0 if forward else 1.0
    pre = np.exp(s * 2j * np.pi * c * idx / npts)
    post = np.exp(s * 2j * np.pi * c * idx / npts) * np.exp(-s * 2j * np.pi * c * c / npts)
    return pre, post


def centered_dft(values: np.ndarray, spacings):
    """Forward transform of a cell-centered lattice field.

    Returns (transform values on the dual lattice, dual spacings).
    """
    out = np.asarray(values, dtype=complex)
    dual = []
    for ax, h in enumerate(spacings):
        npts = out.shape[ax]
        pre, post = _axis_phases(npts, forward=True)
        shape = [1] * out.ndim
        shape[ax] = npts
        out = out * pre.reshape(shape)
        out = np.fft.ifft(out, axis=ax) * npts
        out = out * (post.reshape(shape) * h)
        dual.append(2.0 * np.pi / (npts * h))
    return out, tuple(dual)


def centered_idft(values: np.ndarray, dual_spacings):
    """Inverse transform (with the (2 pi)^-d normalization).

    Input lives on the dual lattice with the given spacings; returns
    (field values, primal spacings).
    """
    out = np.asarray(values, dtype=complex)
    spac = []
    for ax, hy in enumerate(dual_spacings):
        npts = out.shape[ax]
        pre, post = _axis_phases(npts, forward=False)
        shape = [1] * out.ndim
        shape[ax] = npts
        out = out * pre.reshape(shape)
        out = np.fft.fft(out, axis=ax)
        out = out * (post.reshape(shape) * (hy / (2.0 * np.pi)))
        spac.append(2.0 * np.pi / (npts * hy))
    return out, tuple(spac)


def dual_spacings(shape, spacings):
    return tuple(2.0 * np.pi / (npts * h) for npts, h in zip(shape, spacings))


def save_mpln(path: str, field: LatticeField):
    """Write a real lattice field to the MPLN binary container."""
    vals = np.asarray(field.values)
    if np.iscomplexobj(vals):
        raise BadSpec("MPLN container stores real fields; take .real explicitly")
    n, m = field.dims
    d = vals.ndim
    with open(path, "wb") as fh:
        fh.write(MPLN_MAGIC)
        fh.write(struct.pack("<III", MPLN_VERSION, n, m))
        fh.write(struct.pack(f"<{d}I", *vals.shape))
        fh.write(struct.pack(f"<{d}d", *field.spacings))
        fh.write(np.ascontiguousarray(vals, dtype="<f8").tobytes())


def load_mpln(path: str) -> LatticeField:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != MPLN_MAGIC:
            raise BadSpec(f"bad magic {magic!r}")
        version, n, m = struct.unpack("<III", fh.read(12))
        if version != MPLN_VERSION:
            raise BadSpec(f"unsupported container version {version}")
        d = n * m
        shape = struct.unpack(f"<{d}I", fh.read(4 * d))
        spacings = struct.unpack(f"<{d}d", fh.read(8 * d))
        payload = np.frombuffer(fh.read(), dtype="<f8")
    if payload.size != int(np.prod(shape)):
        raise BadSpec("payload size does not match extents")
    return LatticeField(payload.reshape(shape).astype(float), spacings, (n, m))


def export_csv_slice(field: LatticeField, path: str, fixed: dict):
    """Write a 1-D or 2-D slice of the field as CSV.

    ``fixed`` maps axis index -> lattice index for every pinned axis;
    the remaining one or two axes become CSV coordinate columns.
    """
    free = [ax for ax in range(field.values.ndim) if ax not in fixed]
    if len(free) not in (1, 2):
        raise BadSpec(f"CSV export needs 1 or 2 free axes, got {len(free)}")
    slicer = tuple(fixed.get(ax, slice(None)) for ax in range(field.values.ndim))
    sub = field.values[slicer]
    with open(path, "w") as fh:
        if len(free) == 1:
            fh.write(f"coord_axis{free[0]},value\n")
            coords = field.axis_coords(free[0])
            for c, v in zip(coords, sub):
                fh.write(f"{c!r},{v!r}\n")
        else:
            fh.write(f"coord_axis{free[0]},coord_axis{free[1]},value\n")
            c0 = field.axis_coords(free[0])
            c1 = field.axis_coords(free[1])
            for i0 in range(len(c0)):
                for i1 in range(len(c1)):
                    fh.write(f"{c0[i0]!r},{c1[i1]!r},{sub[i0, i1]!r}\n")
