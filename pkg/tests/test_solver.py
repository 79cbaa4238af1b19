"""
Tests for the windowed Picard solver.

Validates:
- Taylor-Green exactness (nonlinear term is a pure gradient)
- Restart consistency on the node grid
- Divergence, mean and energy invariants on small data
- Failure statuses: picard_diverged and horizon_reached
"""

import math

import numpy as np
import pytest

from ns_blowup.analysis.heat_leray import heat_flow
from ns_blowup.analysis.spectral import RealField, divergence_residual, lp_norm, to_spectral
from ns_blowup.presets import small_random_field, taylor_green
from ns_blowup.solve_stats import PicardStats
from ns_blowup.solver import (
    SolverConfig,
    Trajectory,
    TrajectoryStatus,
    admissible_horizon,
    integral_residual,
    nonlinear_term,
    picard_solve,
    restart,
)

from conftest import sup_gap


@pytest.fixture
def config():
    return SolverConfig(dt=1e-2)


@pytest.fixture
def tg_trajectory(taylor_green16, config):
    return picard_solve(taylor_green16, 0.1, config)


@pytest.fixture
def small_data(grid16):
    return small_random_field(grid16, seed=4, kato_bound=0.05)


@pytest.fixture
def small_trajectory(small_data, config):
    return picard_solve(small_data, 0.1, config)


def tail_gap(traj, tail):
    offset = traj.node_index(tail.t_start)
    scale = max(lp_norm(s, 2) for s in traj.states)
    return max(lp_norm(s - traj.states[offset + i], 2) for i, s in enumerate(tail.states)) / scale


class TestSolverConfig:

    @pytest.mark.parametrize("changes", [
        {'dt': 0.0},
        {'dt': math.nan},
        {'picard_tol': 0.0},
        {'picard_max_iter': 0},
        {'epsilon3': -1.0},
        {'kato_samples': 4},
    ])
    def test_validation(self, changes):
        params = {'dt': 1e-2, **changes}
        with pytest.raises(ValueError):
            SolverConfig(**params)


class TestNonlinearTerm:

    def test_taylor_green_is_pure_gradient(self, taylor_green16):
        assert lp_norm(nonlinear_term(taylor_green16), math.inf) < 1e-10

    def test_output_is_divergence_free(self, small_data):
        N = nonlinear_term(small_data)
        assert N.divergence_free
        assert divergence_residual(N) < 1e-10

    def test_quadratic(self, small_data):
        assert sup_gap(nonlinear_term(2.0 * small_data), 4.0 * nonlinear_term(small_data)) < 1e-12

    def test_rejects_scalar(self, sine16):
        with pytest.raises(ValueError, match="3-component"):
            nonlinear_term(sine16)


class TestTaylorGreen:
    """Closed-form oracle u(t) = exp(-2t) u0."""

    def test_heat_law(self, tg_trajectory, taylor_green16):
        assert tg_trajectory.status is TrajectoryStatus.COMPLETED
        assert len(tg_trajectory) == 11
        for t, state in zip(tg_trajectory.times, tg_trajectory.states):
            assert sup_gap(state, heat_flow(taylor_green16, t)) < 1e-8

    def test_l2_decay(self, tg_trajectory, taylor_green16):
        l2_0 = lp_norm(taylor_green16, 2)
        for t, state in zip(tg_trajectory.times, tg_trajectory.states):
            assert lp_norm(state, 2) == pytest.approx(math.exp(-2 * t) * l2_0, rel=1e-10)

    def test_restart_matches_tail(self, tg_trajectory, config):
        tail = restart(tg_trajectory, 0.05)
        assert tail.t_start == pytest.approx(0.05)
        assert tail.final_time == pytest.approx(tg_trajectory.final_time)
        assert tail_gap(tg_trajectory, tail) <= 10 * config.picard_tol

    def test_integral_residual(self, tg_trajectory):
        residual = integral_residual(tg_trajectory)
        assert residual[0] == 0.0
        assert np.max(residual) < 1e-12

    def test_function_class_report(self, tg_trajectory, config):
        expected = math.sqrt(config.dt) * lp_norm(tg_trajectory.states[1], math.inf)
        assert tg_trajectory.diagnostics['sqrt_t_linf_first_node'] == pytest.approx(expected)


class TestSmallData:
    """Invariants of an accepted trajectory."""

    def test_completes_in_few_sweeps(self, small_trajectory):
        assert small_trajectory.status is TrajectoryStatus.COMPLETED
        windows = small_trajectory.diagnostics['windows']
        assert windows and max(w['sweeps'] for w in windows) <= 15

    def test_divergence_free_and_zero_mean(self, small_trajectory):
        for state in small_trajectory.states:
            assert state.divergence_free
            assert divergence_residual(state) < 1e-10
            assert np.max(np.abs(to_spectral(state).coefficients[:, 0, 0, 0])) < 1e-14

    def test_energy_does_not_increase(self, small_trajectory):
        norms = [lp_norm(s, 2) for s in small_trajectory.states]
        for before, after in zip(norms, norms[1:]):
            assert after <= before * (1 + 1e-6)

    def test_restart_matches_tail(self, small_trajectory):
        assert tail_gap(small_trajectory, restart(small_trajectory, 0.05)) <= 1e-8

    def test_integral_residual(self, small_trajectory, config):
        assert np.max(integral_residual(small_trajectory)) <= 10 * config.picard_tol

    def test_progress_and_stats(self, small_data, config):
        calls = []
        stats = PicardStats()
        traj = picard_solve(small_data, 0.1, config, on_window=lambda t, T: calls.append((t, T)), stats=stats)
        assert calls[-1] == pytest.approx((0.1, 0.1))
        assert stats.windows_solved == len(calls) == len(traj.diagnostics['windows'])
        assert stats.nodes_solved == 10
        assert stats.windows_failed == 0


class TestFailures:

    def test_picard_max_iter(self, small_data):
        stats = PicardStats()
        traj = picard_solve(small_data, 0.1, SolverConfig(dt=1e-2, picard_max_iter=1), stats=stats)
        assert traj.status is TrajectoryStatus.PICARD_DIVERGED
        assert traj.diagnostics['reason'] == 'max_iter'
        assert len(traj) == 1
        assert stats.failures_by_reason == {'max_iter': 1}

    def test_horizon_reached(self, grid16, config):
        traj = picard_solve(taylor_green(grid16, amplitude=100.0), 0.1, config)
        assert traj.status is TrajectoryStatus.HORIZON_REACHED
        assert traj.diagnostics['reason'] == 'horizon'
        assert len(traj) == 1


class TestInputValidation:

    def test_rejects_nonzero_mean(self, grid16, config):
        with pytest.raises(ValueError, match="zero mean"):
            picard_solve(RealField.constant(grid16, 1.0, components=3), 0.1, config)

    def test_rejects_compressible(self, grid16, config):
        u = RealField.from_function(grid16, lambda x1, x2, x3: (np.sin(x1), 0 * x1, 0 * x1))
        with pytest.raises(ValueError, match="divergence-free"):
            picard_solve(u, 0.1, config)

    def test_rejects_scalar(self, sine16, config):
        with pytest.raises(ValueError, match="3-component"):
            picard_solve(sine16, 0.1, config)

    def test_rejects_off_grid_horizon(self, taylor_green16, config):
        with pytest.raises(ValueError, match="multiple"):
            picard_solve(taylor_green16, 0.105, config)

    def test_zero_horizon(self, taylor_green16, config):
        traj = picard_solve(taylor_green16, 0.0, config)
        assert len(traj) == 1
        assert traj.status is TrajectoryStatus.COMPLETED

    def test_zero_data(self, grid16, config):
        traj = picard_solve(RealField.zeros(grid16, 3), 0.1, config)
        assert traj.status is TrajectoryStatus.COMPLETED
        assert all(lp_norm(s, math.inf) == 0.0 for s in traj.states)


class TestTrajectory:

    def test_node_lookup(self, tg_trajectory):
        assert tg_trajectory.node_index(0.05) == 5
        assert tg_trajectory.state(0.05) is tg_trajectory.states[5]
        with pytest.raises(ValueError, match="not a node"):
            tg_trajectory.node_index(0.055)
        with pytest.raises(ValueError, match="not a node"):
            restart(tg_trajectory, 0.5)

    def test_length_mismatch(self, taylor_green16, config):
        with pytest.raises(ValueError):
            Trajectory([0.0, 0.1], [taylor_green16], config, 'completed')

    def test_times_must_increase(self, taylor_green16, config):
        with pytest.raises(ValueError, match="increasing"):
            Trajectory([0.1, 0.0], [taylor_green16] * 2, config, 'completed')


class TestHorizon:

    def test_zero_data_has_unit_horizon(self, grid16, config):
        assert admissible_horizon(RealField.zeros(grid16, 3), config) == 1.0

    def test_dyadic(self, taylor_green16, config):
        horizon = admissible_horizon(taylor_green16, config)
        assert 0 < horizon < 1
        assert math.log2(horizon) == int(math.log2(horizon))
