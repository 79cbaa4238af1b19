"""
Tests for Bony paraproducts and the boundedness harness.
"""

import math

import numpy as np
import pytest

from ns_blowup.analysis.littlewood_paley import build_filter_bank
from ns_blowup.analysis.paraproduct import (
    BoundVariant,
    Paraproduct,
    apply_paraproduct,
    bony_pair_sum,
    bony_remainder,
    diagonal_pairs,
    estimate_lemma1_constant,
    exact_bony_high,
    lemma1_ratio,
    pi0,
    pi1,
)
from ns_blowup.analysis.spectral import Grid, RealField, lp_norm, pointwise_product

from conftest import bandlimited, sup_gap


@pytest.fixture
def pair16(grid16, rng):
    return bandlimited(grid16, rng), bandlimited(grid16, rng)


def direct_sum(f, g, bank, shift, start=0):
    """sum_k S_{clamp(k+shift)} f . Delta_k g, term by term."""
    total = RealField.zeros(f.grid)
    for k in range(start, bank.j_max + 1):
        j = min(max(k + shift, 0), bank.j_max)
        total = total + pointwise_product(bank.low_pass(f, j), bank.dyadic_block(g, k), dealias=True)
    return total


class TestParaproducts:
    """pi0 and pi1."""

    @pytest.mark.parametrize("op", [pi0, pi1])
    def test_zero_first_factor(self, op, pair16, grid16):
        _, g = pair16
        assert lp_norm(op(RealField.zeros(grid16), g), math.inf) == 0.0

    @pytest.mark.parametrize("op", [pi0, pi1])
    def test_unit_first_factor(self, op, pair16, grid16):
        _, g = pair16
        assert sup_gap(op(RealField.constant(grid16, 1.0), g), g) < 1e-13

    def test_low_times_high_mode(self, grid32):
        f = RealField.from_function(grid32, lambda x1, x2, x3: np.sin(x1))
        g = RealField.from_function(grid32, lambda x1, x2, x3: np.sin(8 * x1))
        product = pointwise_product(f, g, dealias=True)
        assert sup_gap(pi0(f, g), product) < 1e-12

    @pytest.mark.parametrize("op, shift", [(pi0, 0), (pi1, 1)])
    def test_matches_direct_summation(self, op, shift, grid16, bank16, pair16):
        f, g = pair16
        assert sup_gap(op(f, g, bank16), direct_sum(f, g, bank16, shift)) < 1e-12

    @pytest.mark.parametrize("op", [pi0, pi1])
    def test_bilinear(self, op, grid16, rng):
        f, f2, g = (bandlimited(grid16, rng) for _ in range(3))
        combined = op(2.0 * f + (-3.0) * f2, g)
        separate = 2.0 * op(f, g) - 3.0 * op(f2, g)
        assert sup_gap(combined, separate) < 1e-12

    def test_grid_mismatch(self, grid16, grid8):
        with pytest.raises(ValueError, match="grid mismatch"):
            pi0(RealField.zeros(grid16), RealField.zeros(grid8))

    def test_apply_by_name(self, pair16):
        f, g = pair16
        assert sup_gap(apply_paraproduct('pi1', f, g), pi1(f, g)) == 0.0
        with pytest.raises(ValueError):
            apply_paraproduct('pi2', f, g)


class TestBonyDecomposition:
    """Exact complement and remainder of the formal identity."""

    def test_exact_identity(self, grid32, rng):
        bank = build_filter_bank(grid32)
        for _ in range(5):
            f, g = bandlimited(grid32, rng), bandlimited(grid32, rng)
            product = pointwise_product(f, g, dealias=True)
            rebuilt = pi0(f, g, bank) + exact_bony_high(g, f, bank)
            scale = lp_norm(f, math.inf) * lp_norm(g, math.inf)
            assert sup_gap(product, rebuilt) <= 1e-10 * scale

    def test_exact_high_with_constant(self, grid16, bank16, pair16):
        f, _ = pair16
        c = RealField.constant(grid16, 1.5)
        expected = 1.5 * (f - bank16.dyadic_block(f, 0))
        assert sup_gap(exact_bony_high(c, f, bank16), expected) < 1e-13

    def test_exact_high_of_zero(self, grid16):
        zero = RealField.zeros(grid16)
        assert lp_norm(exact_bony_high(zero, zero), math.inf) == 0.0

    def test_remainder_is_minus_diagonal_pairs(self, grid16, bank16, pair16):
        f, g = pair16
        remainder = bony_remainder(f, g, bank16)
        brute = bony_pair_sum(f, g, diagonal_pairs(bank16), bank16)
        scale = lp_norm(f, math.inf) * lp_norm(g, math.inf)
        assert sup_gap(remainder, -brute) <= 1e-10 * scale

    def test_remainder_of_zero(self, grid16):
        zero = RealField.zeros(grid16)
        assert lp_norm(bony_remainder(zero, zero), math.inf) == 0.0

    def test_all_pairs_rebuild_product(self, grid16, bank16, pair16):
        f, g = pair16
        pairs = [(j, k) for j in range(bank16.j_max + 1) for k in range(bank16.j_max + 1)]
        product = pointwise_product(f, g, dealias=True)
        assert sup_gap(bony_pair_sum(f, g, pairs, bank16), product) < 1e-12

    def test_diagonal_pairs(self, bank16):
        pairs = diagonal_pairs(bank16)
        assert (0, 0) in pairs and (bank16.j_max - 1, bank16.j_max) in pairs
        assert len(pairs) == 2 * bank16.j_max + 1


class TestBoundednessHarness:
    """Empirical paraproduct constants."""

    def test_ratio_skips_zero_factor(self, grid16, pair16):
        _, g = pair16
        assert lemma1_ratio('pi0', 'linf_in', 1.0, RealField.zeros(grid16), g) is None

    def test_rejects_nonpositive_s(self, grid16):
        with pytest.raises(ValueError, match="s > 0"):
            estimate_lemma1_constant('pi0', 'besov_in', 0.0, 4, grid16, 0)

    def test_rejects_unknown_names(self, grid16):
        with pytest.raises(ValueError):
            estimate_lemma1_constant('pi3', 'besov_in', 1.0, 4, grid16, 0)
        with pytest.raises(ValueError):
            estimate_lemma1_constant('pi0', 'l2_in', 1.0, 4, grid16, 0)

    def test_rejects_zero_samples(self, grid16):
        with pytest.raises(ValueError, match="samples"):
            estimate_lemma1_constant(Paraproduct.PI1, BoundVariant.LINF_IN, 1.0, 0, grid16, 0)

    @pytest.mark.parametrize("which", list(Paraproduct))
    @pytest.mark.parametrize("variant", list(BoundVariant))
    def test_finite_and_deterministic(self, which, variant, grid16):
        first = estimate_lemma1_constant(which, variant, 1.0, 4, grid16, seed=11)
        second = estimate_lemma1_constant(which, variant, 1.0, 4, grid16, seed=11)
        assert first == second
        assert 0.0 < first < math.inf

    @pytest.mark.slow
    @pytest.mark.parametrize("which", list(Paraproduct))
    @pytest.mark.parametrize("variant", list(BoundVariant))
    @pytest.mark.parametrize("s", [0.5, 1.0, 2.0])
    def test_stable_across_resolutions(self, which, variant, s):
        coarse = estimate_lemma1_constant(which, variant, s, 6, Grid(32), seed=3)
        fine = estimate_lemma1_constant(which, variant, s, 6, Grid(64), seed=3)
        assert max(coarse, fine) / min(coarse, fine) < 2.0
