"""Gamma functions on the positive definite cone and derived constants.

Everything here is closed-form arithmetic over products of ordinary
gamma functions, so identities are expected to hold to ~1e-13 relative.
Arguments within ``POLE_TOL`` of a pole lattice point are treated as
poles rather than evaluated.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import special as _sp

from .errors import ExcludedOrder, OutOfRange, PoleError

POLE_TOL = 1e-9


def _as_complex(alpha) -> complex:
    return complex(alpha)


def _near_nonpositive_integer(z: complex, tol: float = POLE_TOL) -> bool:
    if abs(z.imag) > tol:
        return False
    r = round(z.real)
    return abs(z.real - r) <= tol and r <= 0


def _near_integer_at_least(z: complex, lo: int, tol: float = POLE_TOL):
    """Return the integer if z is within tol of an integer >= lo, else None."""
    if abs(z.imag) > tol:
        return None
    r = round(z.real)
    if abs(z.real - r) <= tol and r >= lo:
        return int(r)
    return None


def siegel_pole_factor(m: int, alpha) -> int | None:
    """Index j of the first factor Gamma(alpha - j/2) at a pole, or None."""
    a = _as_complex(alpha)
    for j in range(m):
        if _near_nonpositive_integer(a - 0.5 * j):
            return j
    return None


def is_siegel_pole(m: int, alpha) -> bool:
    return siegel_pole_factor(m, alpha) is not None


def siegel_gamma(m: int, alpha):
    """Gamma function of the rank-m positive definite cone.

    Evaluates pi^(m(m-1)/4) * prod_{j=0}^{m-1} Gamma(alpha - j/2); for
    m = 1 this is the ordinary gamma function.  Real input yields a real
    result.

    Raises
    ------
    PoleError
        when some factor Gamma(alpha - j/2) sits at a pole; the error
        carries the offending factor index.
    """
    if m < 1:
        raise OutOfRange(f"m must be >= 1, got {m}")
    j = siegel_pole_factor(m, alpha)
    if j is not None:
        raise PoleError(
            f"Gamma_{m} pole at alpha={alpha}: factor j={j} hits Gamma at a nonpositive integer",
            factor_index=j)
    a = _as_complex(alpha)
    value = math.pi ** (m * (m - 1) / 4.0)
    for jj in range(m):
        value = value * _sp.gamma(a - 0.5 * jj)
    if abs(complex(alpha).imag) == 0.0:
        return float(np.real(value))
    return complex(value)


def siegel_gamma_recursion_check(m: int, k: int, alpha) -> float:
    """Relative residual of the split identity for Gamma_m.

    Compares Gamma_m(alpha) against
    pi^(k(m-k)/2) Gamma_k(alpha) Gamma_{m-k}(alpha - k/2) for 1 <= k < m.
    """
    if not (1 <= k < m):
        raise OutOfRange(f"need 1 <= k < m, got k={k}, m={m}")
    lhs = siegel_gamma(m, alpha)
    rhs = (math.pi ** (k * (m - k) / 2.0)
           * siegel_gamma(k, alpha)
           * siegel_gamma(m - k, _as_complex(alpha) - 0.5 * k))
    return abs(lhs - rhs) / abs(lhs)


def gamma_ratio(m: int, k: int, alpha):
    """Gamma_m(alpha) / Gamma_m(alpha + k/2) via the reduced rank-k form.

    The reduction Gamma_k(alpha + (k-m)/2) / Gamma_k(alpha + k/2) stays
    finite where the direct quotient would pair a pole with a pole.
    """
    if m < 1 or k < 1:
        raise OutOfRange("m and k must be positive")
    a = _as_complex(alpha)
    num = siegel_gamma(k, a + 0.5 * (k - m))
    den = siegel_gamma(k, a + 0.5 * k)
    if den == 0:
        raise PoleError(f"reduced denominator vanished at alpha={alpha}")
    value = num / den
    if abs(a.imag) == 0.0:
        return float(np.real(value))
    return value


def stiefel_volume(n: int, m: int) -> float:
    """Total invariant measure 2^m pi^(nm/2) / Gamma_m(n/2) of V_{n,m}."""
    if not (1 <= m <= n):
        raise OutOfRange(f"need 1 <= m <= n, got n={n}, m={m}")
    return 2.0 ** m * math.pi ** (n * m / 2.0) / siegel_gamma(m, 0.5 * n)


def riesz_excluded(n: int, m: int, alpha) -> bool:
    """Whether alpha sits on the excluded integer ladder of orders.

    For m >= 2 the ladder is n-m+1, n-m+2, ...; for m = 1 it is
    n, n+2, n+4, ... (integers of the same parity as n).
    """
    a = _as_complex(alpha)
    if m >= 2:
        return _near_integer_at_least(a, n - m + 1) is not None
    r = _near_integer_at_least(a, n)
    return r is not None and (r - n) % 2 == 0


def riesz_const(n: int, m: int, alpha):
    """Normalizing constant 2^(alpha m) pi^(nm/2) Gamma_m(alpha/2) / Gamma_m((n-alpha)/2).

    Raises ExcludedOrder on the excluded ladder (where the reciprocal of
    the constant is infinite) and PoleError where the numerator factor
    itself has a pole, i.e. at integer alpha <= m-1 for m >= 2.
    """
    if riesz_excluded(n, m, alpha):
        raise ExcludedOrder(f"alpha={alpha} is an excluded order for (n,m)=({n},{m})")
    a = _as_complex(alpha)
    num = siegel_gamma(m, 0.5 * a)
    den = siegel_gamma(m, 0.5 * (n - a))
    value = 2.0 ** (a * m) * math.pi ** (n * m / 2.0) * num / den
    if abs(a.imag) == 0.0:
        return float(np.real(value))
    return value


def wallach_contains(n: int, m: int, alpha) -> bool:
    """Membership of alpha in the set of orders giving a positive measure.

    The set is {0, 1, ..., k0} together with {Re alpha > m-1 and
    alpha - (n-m) not an integer}, k0 = min(m-1, n-m).  The modular
    clause is applied literally to real alpha; complex alpha with
    nonzero imaginary part and Re alpha > m-1 is accepted.
    """
    if m < 2:
        raise OutOfRange("classification defined for m >= 2")
    a = _as_complex(alpha)
    k0 = min(m - 1, n - m)
    r = _near_integer_at_least(a, 0)
    if r is not None and r <= k0:
        return True
    if a.real > m - 1:
        if abs(a.imag) > POLE_TOL:
            return True
        offset = a.real - (n - m)
        return abs(offset - round(offset)) > POLE_TOL
    return False


def fuglede_const(n: int, m: int, k: int) -> float:
    """Mean-value constant 2^(-km) pi^(-km/2) Gamma_m((n-k)/2) / Gamma_m(n/2)."""
    if not (0 < k < n):
        raise OutOfRange(f"need 0 < k < n, got k={k}, n={n}")
    return (2.0 ** (-k * m) * math.pi ** (-k * m / 2.0)
            * siegel_gamma(m, 0.5 * (n - k)) / siegel_gamma(m, 0.5 * n))


def dual_rep_const(n: int, m: int, k: int) -> float:
    """Constant 2^(-km) pi^(k(k-n-m)/2) Gamma_k((n-m)/2) / Gamma_k(k/2).

    Valid for m >= 2 and 1 <= k <= k0 = min(m-1, n-m); equals
    fuglede_const(n,m,k) * sigma_{k,k} / sigma_{n,k}.
    """
    if m < 2:
        raise OutOfRange("defined for m >= 2")
    k0 = min(m - 1, n - m)
    if not (1 <= k <= k0):
        raise OutOfRange(f"need 1 <= k <= k0={k0}, got k={k}")
    return (2.0 ** (-k * m) * math.pi ** (k * (k - n - m) / 2.0)
            * siegel_gamma(k, 0.5 * (n - m)) / siegel_gamma(k, 0.5 * k))
