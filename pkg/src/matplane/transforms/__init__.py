"""Operator layer: plane transform, dual, potentials, Fourier machinery.

All operations are pure given their function handles, quadrature specs
and seeds; handles must tolerate concurrent batched evaluation.  Long
reconstructions accept a cooperative ``cancel_check`` callable invoked
between lattice slabs.  Results are deterministic for fixed seeds.
"""

from .cayley import cayley_laplace_apply, cayley_laplace_multiplier
from .fields import FieldFunction, PlaneFunction, compose_affine, decay_audit, shift_field
from .fourier import (fourier, slice_check, slice_decompose,
                      slice_decompose_batch, slice_transform_side)
from .identities import (duality_check, fuglede_check, make_phi_test,
                         phi_pairing_check)
from .inversion import (invert_fourier, noninjectivity_witness,
                        rank_cutoff_spectrum, reconstruct_via_slices,
                        witness_field_function)
from .radon import (dual_radon, in_plane_rule, radon, radon_at_offsets,
                    radon_mass, radon_plane_function)
from .riesz import riesz, riesz_alt

__all__ = [
    "FieldFunction", "PlaneFunction", "compose_affine", "decay_audit",
    "shift_field", "radon", "radon_mass", "dual_radon", "radon_at_offsets",
    "radon_plane_function", "in_plane_rule", "riesz", "riesz_alt", "fourier",
    "slice_decompose", "slice_decompose_batch", "slice_check",
    "slice_transform_side", "fuglede_check", "duality_check", "make_phi_test",
    "phi_pairing_check", "invert_fourier", "reconstruct_via_slices",
    "noninjectivity_witness", "witness_field_function", "rank_cutoff_spectrum",
    "cayley_laplace_apply", "cayley_laplace_multiplier",
]
