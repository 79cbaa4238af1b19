"""
Tests for the dyadic filter bank and Besov norms.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ns_blowup.analysis.littlewood_paley import (
    CRITICAL_INDEX,
    BesovIndex,
    DyadicFilterBank,
    SmoothingProfile,
    as_besov_index,
    besov_distance,
    besov_norm,
    build_filter_bank,
    cutoff_profile,
    dilate_dyadic,
    dyadic_block,
    has_low_block_content,
    low_pass,
    lp_reconstruct,
)
from ns_blowup.analysis.random_fields import random_smooth_field
from ns_blowup.analysis.spectral import Grid, RealField, lp_norm, resample

from conftest import sup_gap


def mode(grid, k, fn=np.sin):
    return RealField.from_function(grid, lambda x1, x2, x3: fn(k * x1))


class TestCutoffProfile:
    """Radial cutoff Phi."""

    @pytest.mark.parametrize("profile", list(SmoothingProfile))
    def test_plateau_and_support(self, profile):
        r = np.array([0.0, 0.5, 1.0, 2.0, 2.5, 10.0])
        assert list(cutoff_profile(r, profile)) == [1.0, 1.0, 1.0, 0.0, 0.0, 0.0]

    @pytest.mark.parametrize("profile", list(SmoothingProfile))
    def test_monotone(self, profile):
        values = cutoff_profile(np.linspace(0, 3, 601), profile)
        assert np.all(np.diff(values) <= 1e-15)
        assert np.all((values >= 0) & (values <= 1))

    def test_accepts_string_profile(self):
        assert cutoff_profile([1.5], 'cosine')[0] == pytest.approx(0.5)
        with pytest.raises(ValueError):
            cutoff_profile([1.5], 'gaussian')


class TestBesovIndex:

    def test_validation(self):
        with pytest.raises(ValueError, match="p >= 1"):
            BesovIndex(0.0, 0.5)
        with pytest.raises(ValueError, match="finite"):
            BesovIndex(math.inf, 2)

    def test_pairs_are_accepted(self):
        assert as_besov_index((-1, math.inf)) == CRITICAL_INDEX
        assert str(CRITICAL_INDEX) == "B_inf^(-1,inf)"


class TestFilterBank:
    """Transfer functions, blocks and reconstruction."""

    def test_top_low_pass_is_identity(self, bank16):
        assert bank16.j_max == 4
        assert np.all(bank16.transfer[bank16.j_max] == 1.0)

    def test_blocks_partition_unity(self, bank16):
        total = sum(bank16.block_multiplier(k) for k in range(bank16.j_max + 1))
        assert np.max(np.abs(total - 1.0)) < 1e-15

    def test_index_checks(self, bank16, sine16):
        with pytest.raises(ValueError, match="block index"):
            bank16.block_multiplier(bank16.j_max + 1)
        with pytest.raises(ValueError, match="low-pass index"):
            bank16.low_pass(sine16, -1)

    def test_grid_check(self, bank16):
        with pytest.raises(ValueError, match="filter bank built for"):
            bank16.dyadic_block(RealField.zeros(Grid(8)), 0)

    def test_cached(self, grid16):
        assert build_filter_bank(grid16) is build_filter_bank(Grid(16))
        assert isinstance(build_filter_bank(grid16, 'cosine'), DyadicFilterBank)

    @pytest.mark.parametrize("n", [16, 32, 64])
    def test_reconstruction(self, n, rng):
        grid = Grid(n)
        bank = build_filter_bank(grid)
        for _ in range(5):
            f = RealField(grid, rng.standard_normal((1, n, n, n)))
            assert sup_gap(bank.lp_reconstruct(f), f) <= 1e-12 * lp_norm(f, math.inf)

    def test_reconstruction_of_vector_field(self, grid16, rng):
        f = RealField(grid16, rng.standard_normal((3, 16, 16, 16)))
        assert sup_gap(lp_reconstruct(f), f) <= 1e-12 * float(np.max(np.abs(f.samples)))

    def test_single_mode_lives_in_one_block(self, grid16, bank16):
        f = mode(grid16, 4)
        assert sup_gap(bank16.dyadic_block(f, 2), f) < 1e-14
        for k in (0, 1, 3, 4):
            assert lp_norm(bank16.dyadic_block(f, k), math.inf) < 1e-14

    def test_low_pass_of_constant(self, grid16):
        c = RealField.constant(grid16, 2.5)
        assert sup_gap(low_pass(c, 0), c) < 1e-14
        assert lp_norm(dyadic_block(c, 1), math.inf) < 1e-14

    @pytest.mark.parametrize("k", [1, 2, 3])
    def test_block_annulus(self, k, grid16, bank16):
        radius = grid16.k_magnitude
        outside = (radius < 2 ** (k - 1)) | (radius > 2 ** (k + 1))
        assert np.all(bank16.block_multiplier(k)[outside] == 0.0)

    def test_near_orthogonality(self, bank16):
        for j in range(1, bank16.j_max + 1):
            for k in range(j + 2, bank16.j_max + 1):
                overlap = bank16.block_multiplier(j) * bank16.block_multiplier(k)
                assert np.max(np.abs(overlap)) < 1e-15

    def test_block_decomposition_matches_single_blocks(self, grid16, bank16, rng):
        f = RealField(grid16, rng.standard_normal((1, 16, 16, 16)))
        blocks = bank16.block_decomposition(f)
        assert len(blocks) == bank16.j_max + 1
        assert sup_gap(blocks[3], bank16.dyadic_block(f, 3)) < 1e-14


class TestBesovNorm:
    """sup_k 2^{sk} ||Delta_k f||_p."""

    def test_single_mode_closed_form(self, grid16):
        assert besov_norm(mode(grid16, 4), CRITICAL_INDEX) == pytest.approx(0.25, abs=1e-12)

    def test_block_norms(self, bank16, grid16):
        norms = bank16.block_norms(mode(grid16, 4), (0, math.inf))
        assert norms.shape == (bank16.j_max + 1,)
        assert norms[2] == pytest.approx(1.0)
        assert norms[0] < 1e-14

    def test_zero_field(self, grid16):
        assert besov_norm(RealField.zeros(grid16, 3), CRITICAL_INDEX) == 0.0

    def test_vector_takes_max_over_components(self, grid16):
        samples = np.zeros((3, 16, 16, 16))
        samples[1] = mode(grid16, 4).samples[0]
        samples[2] = 3 * mode(grid16, 1).samples[0]
        assert besov_norm(RealField(grid16, samples), CRITICAL_INDEX) == pytest.approx(3.0)

    def test_distance(self, grid16):
        f = mode(grid16, 4)
        assert besov_distance(f, f, CRITICAL_INDEX) == 0.0
        with pytest.raises(ValueError, match="grid mismatch"):
            besov_distance(f, mode(Grid(8), 1), CRITICAL_INDEX)

    @pytest.mark.parametrize("p", [2.0, math.inf])
    def test_monotone_in_regularity(self, p, grid16, rng):
        f = RealField(grid16, rng.standard_normal((1, 16, 16, 16)))
        assert besov_norm(f, BesovIndex(-1.0, p)) <= besov_norm(f, BesovIndex(0.5, p))

    def test_l3_embedding_ratio_is_resolution_independent(self, grid16, grid32, rng):
        coarse = random_smooth_field(grid16, rng, slope=-1.0, components=1)
        fine = resample(coarse, grid32)
        ratios = [besov_norm(f, CRITICAL_INDEX) / lp_norm(f, 3) for f in (coarse, fine)]
        assert max(ratios) / min(ratios) < 1.5

    @settings(max_examples=25, deadline=None)
    @given(c=st.floats(min_value=-20, max_value=20).filter(lambda c: c == 0 or abs(c) >= 1e-6),
           s=st.sampled_from([-1.0, 0.0, 0.5, 2.0]))
    def test_homogeneity(self, c, s):
        grid = Grid(8)
        f = RealField(grid, np.random.default_rng(7).standard_normal((1, 8, 8, 8)))
        index = BesovIndex(s, math.inf)
        assert besov_norm(c * f, index) == pytest.approx(abs(c) * besov_norm(f, index), rel=1e-12, abs=1e-300)


class TestDilation:
    """x -> 2^m x on band-limited fields."""

    def test_single_mode(self, grid32):
        dilated = dilate_dyadic(mode(grid32, 2), 1)
        assert sup_gap(dilated, 2 * mode(grid32, 4)) < 1e-13

    def test_zero_exponent_is_identity(self, grid32):
        f = mode(grid32, 2)
        assert dilate_dyadic(f, 0) is f

    def test_band_limit(self, grid32):
        with pytest.raises(ValueError, match="band-limited"):
            dilate_dyadic(mode(grid32, 8), 1)
        with pytest.raises(ValueError, match="too coarse"):
            dilate_dyadic(mode(Grid(8), 1), 3)

    def test_blocks_shift_under_dilation(self, grid32):
        bank = build_filter_bank(grid32)
        f = RealField.from_function(
            grid32, lambda x1, x2, x3: np.sin(2 * x1) + np.cos(6 * x2) + np.sin(x1 + 2 * x3))
        dilated = dilate_dyadic(f, 1)
        for k in (1, 2, 3):
            shifted = bank.dyadic_block(dilated, k + 1)
            assert sup_gap(shifted, dilate_dyadic(bank.dyadic_block(f, k), 1)) < 1e-12

    def test_rejects_negative_exponent(self, grid32):
        with pytest.raises(ValueError, match="nonnegative"):
            dilate_dyadic(mode(grid32, 2), -1)

    def test_low_block_content(self, grid16):
        assert has_low_block_content(RealField.constant(grid16, 1.0))
        assert has_low_block_content(mode(grid16, 1))
        assert not has_low_block_content(mode(grid16, 2))
