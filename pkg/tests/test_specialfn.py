import math

import numpy as np
import pytest

from matplane.errors import ExcludedOrder, OutOfRange, PoleError
from matplane.specialfn import (dual_rep_const, fuglede_const, gamma_ratio,
                                is_siegel_pole, riesz_const, riesz_excluded,
                                siegel_gamma, siegel_gamma_recursion_check,
                                stiefel_volume, wallach_contains)


class TestSiegelGamma:
    def test_scalar_case(self):
        assert siegel_gamma(1, 2) == pytest.approx(1.0, rel=1e-13)
        assert siegel_gamma(1, 5) == pytest.approx(24.0, rel=1e-13)

    def test_rank_two_values(self):
        # product formula against the scalar gamma function
        assert siegel_gamma(2, 2) == pytest.approx(math.pi / 2, rel=1e-12)
        assert siegel_gamma(2, 1.5) == pytest.approx(math.pi / 2, rel=1e-12)

    def test_complex_argument(self):
        v = siegel_gamma(2, 2 + 1j)
        assert isinstance(v, complex)
        from scipy.special import gamma as sgamma
        expect = math.pi ** 0.5 * sgamma(2 + 1j) * sgamma(1.5 + 1j)
        assert abs(v - expect) / abs(expect) < 1e-12

    def test_pole_carries_factor_index(self):
        with pytest.raises(PoleError) as err:
            siegel_gamma(2, 0.5)
        assert err.value.factor_index == 1
        with pytest.raises(PoleError) as err:
            siegel_gamma(3, -1)
        assert err.value.factor_index == 0

    def test_pole_lattice_matches_product_formula(self):
        # poles exactly at alpha = j/2 - l for j < m, l >= 0
        for m in (1, 2, 3):
            for twice_alpha in range(-8, 2 * m):
                alpha = twice_alpha / 2.0
                expected = any(
                    (alpha - 0.5 * j) <= 1e-12 and
                    abs((alpha - 0.5 * j) - round(alpha - 0.5 * j)) < 1e-12
                    for j in range(m))
                assert is_siegel_pole(m, alpha) == expected, (m, alpha)


def test_recursion_residual_small():
    for m, k, alpha in [(2, 1, 3), (4, 2, 5), (3, 1, 2.25)]:
        assert siegel_gamma_recursion_check(m, k, alpha) <= 1e-12


def test_recursion_residual_grid():
    # 50-point grid per rank, away from poles
    for m in (2, 3, 4):
        alphas = np.linspace((m - 1) / 2 + 0.26, (m - 1) / 2 + 12.51, 50)
        for alpha in alphas:
            for k in range(1, m):
                assert siegel_gamma_recursion_check(m, k, alpha) <= 1e-12


class TestGammaRatio:
    def test_reduced_form_value(self):
        assert gamma_ratio(1, 2, 1) == pytest.approx(1.0, rel=1e-12)

    def test_matches_direct_ratio(self):
        for m, k, alpha in [(2, 1, 3), (3, 2, 4), (2, 2, 2.5)]:
            direct = siegel_gamma(m, alpha) / siegel_gamma(m, alpha + k / 2)
            assert gamma_ratio(m, k, alpha) == pytest.approx(direct, rel=1e-12)


class TestStiefelVolume:
    def test_circle(self):
        assert stiefel_volume(2, 1) == pytest.approx(2 * math.pi, rel=1e-13)

    def test_sphere(self):
        assert stiefel_volume(3, 1) == pytest.approx(4 * math.pi, rel=1e-13)

    def test_v32(self):
        assert stiefel_volume(3, 2) == pytest.approx(8 * math.pi ** 2, rel=1e-12)


class TestRieszConst:
    def test_scalar_case(self):
        assert riesz_const(3, 1, 1) == pytest.approx(2 * math.pi ** 2, rel=1e-12)

    def test_numerator_pole_raises(self):
        # alpha=1 with m=2 puts the numerator factor at a pole
        with pytest.raises(PoleError):
            riesz_const(3, 2, 1)

    def test_excluded_order(self):
        with pytest.raises(ExcludedOrder):
            riesz_const(3, 2, 2)


class TestRieszExcluded:
    def test_rank_two_ladder(self):
        assert riesz_excluded(3, 2, 2)
        assert riesz_excluded(3, 2, 3)
        assert not riesz_excluded(3, 2, 1)
        assert not riesz_excluded(3, 2, 2.5)

    def test_rank_one_ladder(self):
        assert riesz_excluded(3, 1, 3)
        assert riesz_excluded(3, 1, 5)
        assert not riesz_excluded(3, 1, 4)
        assert not riesz_excluded(3, 1, 1)


class TestWallach:
    def test_discrete_part(self):
        assert wallach_contains(4, 2, 1)
        assert wallach_contains(4, 2, 0)

    def test_modular_exclusion(self):
        # Re 2 > 1 but 2 - (4-2) is an integer
        assert not wallach_contains(4, 2, 2)

    def test_fractional_offset(self):
        assert wallach_contains(4, 2, 2.5)

    def test_complex_accepted_above_threshold(self):
        assert wallach_contains(4, 2, 2 + 0.3j)

    def test_rank_one_rejected(self):
        with pytest.raises(OutOfRange):
            wallach_contains(3, 1, 1)


class TestFugledeConst:
    def test_desk_value(self):
        assert fuglede_const(3, 2, 1) == pytest.approx(1 / (2 * math.pi), rel=1e-12)

    def test_rank_one_value(self):
        assert fuglede_const(3, 1, 1) == pytest.approx(1 / math.pi, rel=1e-12)

    def test_positivity_sweep(self):
        # the gamma factor at (n-k)/2 is finite exactly when n-k >= m
        for n in range(2, 7):
            for m in range(1, n + 1):
                for k in range(1, n - m + 1):
                    assert fuglede_const(n, m, k) > 0

    def test_degenerate_regime_hits_pole(self):
        with pytest.raises(PoleError):
            fuglede_const(3, 2, 2)


class TestDualRepConst:
    def test_volume_ratio_identity(self):
        for n, m, k in [(4, 2, 1), (3, 2, 1), (5, 3, 2), (5, 2, 1)]:
            c = fuglede_const(n, m, k)
            expect = c * stiefel_volume(k, k) / stiefel_volume(n, k)
            assert dual_rep_const(n, m, k) == pytest.approx(expect, rel=1e-12)

    def test_out_of_range(self):
        with pytest.raises(OutOfRange):
            dual_rep_const(4, 2, 2)  # k0 = 1
        with pytest.raises(OutOfRange):
            dual_rep_const(3, 1, 1)  # needs m >= 2


def test_pole_overlap_dichotomy():
    # numerator and denominator pole ladders of the potential constant
    # overlap exactly when 2m >= n + 2
    for n in range(2, 9):
        for m in range(2, 5):
            num_poles = set(range(m - 1, -40, -1))   # integers <= m-1
            den_poles = set(range(n - m + 1, n - m + 41))  # integers >= n-m+1
            overlap = bool(num_poles & den_poles)
            assert overlap == (2 * m >= n + 2), (n, m)
