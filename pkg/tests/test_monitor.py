"""
Tests for norm series and the blowup-criterion quantities.
"""

import math

import numpy as np
import pytest

from ns_blowup.analysis.littlewood_paley import CRITICAL_INDEX, besov_norm
from ns_blowup.analysis.spectral import Grid, RealField, lp_norm
from ns_blowup.monitor import (
    KS_GAP_COLUMN,
    SERIES_COLUMNS,
    NormSeries,
    bv_witness_count,
    criterion_distance,
    embedding_ratio,
    fit_lower_bound_exponent,
    has_blowup_signature,
    leray_giga_exponent,
    norm_column,
    record,
    scaling_invariance_check,
)
from ns_blowup.solver import SolverConfig, Trajectory, picard_solve


@pytest.fixture
def tg_trajectory(taylor_green16):
    return picard_solve(taylor_green16, 0.05, SolverConfig(dt=1e-2))


@pytest.fixture
def tg_series(tg_trajectory):
    return record(tg_trajectory, kato_samples=16)


def planted_series(exponent, p=6, t_star=1.0, samples=10):
    times = np.linspace(0.0, 0.9, samples)
    return NormSeries(times, {norm_column(p): 2.0 * (t_star - times) ** exponent})


class TestNormSeries:

    def test_times_must_increase(self):
        with pytest.raises(ValueError, match="increasing"):
            NormSeries([0.0, 0.0], {})

    def test_column_validation(self):
        with pytest.raises(ValueError, match="values for"):
            NormSeries([0.0, 1.0], {'l2': [1.0]})
        with pytest.raises(ValueError, match="non-finite"):
            NormSeries([0.0, 1.0], {'l2': [1.0, math.nan]})
        with pytest.raises(ValueError, match="negative"):
            NormSeries([0.0, 1.0], {'l2': [1.0, -1.0]})

    def test_ks_gap_may_be_negative(self):
        series = NormSeries([0.0, 1.0], {KS_GAP_COLUMN: [0.0, -1.0]})
        assert series.column(KS_GAP_COLUMN)[1] == -1.0

    def test_missing_column(self):
        with pytest.raises(ValueError, match="no column"):
            NormSeries([0.0], {'l2': [1.0]}).column('l3')

    def test_norm_column_names(self):
        assert norm_column(math.inf) == 'linf'
        assert norm_column(4) == 'l4'
        assert norm_column(2.5) == 'l2.5'


class TestRecord:

    def test_columns(self, tg_series, tg_trajectory):
        assert tg_series.column_names == SERIES_COLUMNS
        assert len(tg_series) == len(tg_trajectory)
        assert np.array_equal(tg_series.times, tg_trajectory.times)

    def test_l2_follows_heat_law(self, tg_series, taylor_green16):
        expected = np.exp(-2 * tg_series.times) * lp_norm(taylor_green16, 2)
        assert np.allclose(tg_series.column('l2'), expected, rtol=1e-10)

    def test_distance_to_zero_is_the_norm(self, tg_series):
        assert np.array_equal(tg_series.column('dist_to_omega'), tg_series.column('besov_m1_inf'))

    def test_total_variation_accumulates(self, tg_series):
        tv = tg_series.column('tv_accum')
        assert tv[0] == 0.0
        assert np.all(np.diff(tv) >= 0)

    def test_distance_to_initial_state(self, tg_trajectory, taylor_green16):
        series = record(tg_trajectory, omega=taylor_green16, kato_samples=16)
        assert series.column('dist_to_omega')[0] == pytest.approx(0.0, abs=1e-14)

    def test_extra_columns(self, tg_trajectory, taylor_green16):
        series = record(tg_trajectory, reference=taylor_green16, kato_samples=16, extra_p=(4, 6))
        assert series.column_names == SERIES_COLUMNS + ('l4', KS_GAP_COLUMN)
        gap = series.column(KS_GAP_COLUMN)
        assert gap[0] == pytest.approx(0.0, abs=1e-10)
        assert np.all(gap[1:] < 0)

    def test_zero_trajectory(self, grid16):
        traj = picard_solve(RealField.zeros(grid16, 3), 0.02, SolverConfig(dt=1e-2))
        series = record(traj, kato_samples=16)
        for name in SERIES_COLUMNS:
            assert np.all(series.column(name) == 0.0)

    def test_omega_grid_mismatch(self, tg_trajectory):
        with pytest.raises(ValueError, match="omega"):
            record(tg_trajectory, omega=RealField.zeros(Grid(8), 3))


class TestLowerBoundFit:
    """||u(t)||_p ~ c (t* - t)^{(3/p - 1)/2}."""

    @pytest.mark.parametrize("p, exponent", [(6, -0.25), (4, -0.125), (math.inf, -0.5)])
    def test_exponent(self, p, exponent):
        assert leray_giga_exponent(p) == pytest.approx(exponent)

    def test_recovers_planted_exponent(self):
        exponent, c = fit_lower_bound_exponent(planted_series(-0.25), 6, 1.0)
        assert exponent == pytest.approx(-0.25, abs=1e-6)
        assert c == pytest.approx(2.0, rel=1e-6)
        assert has_blowup_signature(exponent, 6)
        assert not has_blowup_signature(-0.6, 6)

    def test_errors(self):
        series = planted_series(-0.25)
        with pytest.raises(ValueError, match="p > 3"):
            fit_lower_bound_exponent(series, 3, 1.0)
        with pytest.raises(ValueError, match="t_star"):
            fit_lower_bound_exponent(series, 6, 0.9)
        with pytest.raises(ValueError, match="at least"):
            fit_lower_bound_exponent(planted_series(-0.25, samples=5), 6, 1.0)
        with pytest.raises(ValueError, match="no column"):
            fit_lower_bound_exponent(series, 4, 1.0)


class TestCriterionQuantities:

    def test_criterion_distance_window(self):
        series = NormSeries([0.0, 0.1, 0.2, 0.3], {'dist_to_omega': [5.0, 1.0, 3.0, 2.0]})
        assert criterion_distance(series, 0.0) == 2.0
        assert criterion_distance(series, 0.1) == 3.0
        assert criterion_distance(series, 0.3) == 5.0
        with pytest.raises(ValueError, match="window"):
            criterion_distance(series, 0.5)
        with pytest.raises(ValueError, match="empty"):
            criterion_distance(NormSeries([], {}), 0.0)

    def test_bv_witness_count(self, taylor_green16):
        A = 2.0
        e = taylor_green16
        zero = RealField.zeros(e.grid, 3)
        states = [zero, A * e, 2 * A * e, 2 * A * e]
        traj = Trajectory([0.0, 0.1, 0.2, 0.3], states, SolverConfig(dt=0.1), 'completed')
        epsilon = 0.99 * A * besov_norm(e, CRITICAL_INDEX)
        assert bv_witness_count(traj, epsilon) == 2
        with pytest.raises(ValueError, match="positive"):
            bv_witness_count(traj, 0.0)

    def test_scaling_invariance(self, grid32):
        f = RealField.from_function(grid32, lambda x1, x2, x3: np.sin(2 * x1))
        before, after = scaling_invariance_check(f, 1)
        assert after == pytest.approx(before, rel=1e-12)
        assert scaling_invariance_check(f, 0)[0] == pytest.approx(0.5)

    def test_scaling_before_samples_a_subset_of_the_native_grid(self, grid32, rng):
        coefficients = np.zeros((1, 32, 32, 32), dtype=complex)
        band = grid32.band_mask(8) & (grid32.k_magnitude >= 2.0)
        coefficients[:, band] = rng.standard_normal(int(band.sum())) + 1j * rng.standard_normal(int(band.sum()))
        f = RealField(grid32, np.fft.ifftn(coefficients, axes=(1, 2, 3)).real)
        before, after = scaling_invariance_check(f, 1)
        native = besov_norm(f, CRITICAL_INDEX)
        assert abs(before - after) <= 1e-10 * before
        assert before <= native * (1 + 1e-12)
        assert scaling_invariance_check(f, 0)[0] == pytest.approx(native, rel=1e-12)

    def test_scaling_rejects_low_block_content(self, grid32):
        f = RealField.from_function(grid32, lambda x1, x2, x3: np.sin(x1))
        with pytest.raises(ValueError, match="Delta_0"):
            scaling_invariance_check(f, 1)

    def test_embedding_ratio(self, grid16, taylor_green16):
        assert embedding_ratio(RealField.zeros(grid16, 3)) is None
        ratio = embedding_ratio(taylor_green16)
        assert ratio == pytest.approx(besov_norm(taylor_green16, CRITICAL_INDEX) / lp_norm(taylor_green16, 3))
