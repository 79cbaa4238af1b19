"""Simulation runs: initial condition, solve, diagnostics and output directory."""

import logging
from dataclasses import dataclass
from pathlib import Path

from ns_blowup.analysis.spectral import Grid
from ns_blowup.config import ConfigError
from ns_blowup.monitor import NormSeries, bv_witness_count, criterion_distance, record
from ns_blowup.presets import make_preset
from ns_blowup.solve_stats import PicardStats
from ns_blowup.solver import SolverConfig, Trajectory, TrajectoryStatus, picard_solve
from ns_blowup.storage.field_file import read_field
from ns_blowup.storage.trajectory_dir import TrajectoryDirectory

logger = logging.getLogger('ns_blowup.experiment')

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2


@dataclass
class SimulationResult:
    """Everything a `simulate` run produced."""

    trajectory: Trajectory
    series: NormSeries
    stats: PicardStats
    output: Path
    criterion: float
    bv_witnesses: int

    @property
    def exit_code(self):
        if self.trajectory.status is TrajectoryStatus.COMPLETED:
            return EXIT_OK
        return EXIT_NUMERICAL


def _read_grid_field(path, grid, what):
    field = read_field(path)
    if field.grid != grid:
        raise ConfigError(f"{what} file {path} has {field.grid}, configuration asks for {grid}")
    return field


def load_initial_condition(config, grid):
    """Initial field named by the [initial] section.

    Raises:
        ConfigError: unknown condition, missing path or grid mismatch
    """
    if config.condition == 'file':
        if not config.path:
            raise ConfigError("initial.condition = file needs initial.path")
        return _read_grid_field(config.path, grid, "initial")
    try:
        return make_preset(config.condition, grid, config.amplitude, config.seed)
    except ValueError as e:
        raise ConfigError(f"initial.condition: {e}")


def resolve_field_option(value, grid, u0, what):
    """Interpret monitor.omega / monitor.reference.

    'zero' (or empty) means none, 'initial' the initial state, anything
    else a field file path.
    """
    if value is None or value in ('', 'zero'):
        return None
    if value == 'initial':
        return u0
    return _read_grid_field(value, grid, what)


def run_simulation(config, output=None, progress=None):
    """Run one simulation and write its trajectory directory.

    Args:
        config: ExperimentConfig
        output: Optional output directory overriding config.output
        progress: Optional SolveProgress

    Returns:
        SimulationResult
    """
    if output is not None:
        config = config.with_overrides(output=str(output))
    grid = Grid(config.n, config.box_length)
    u0 = load_initial_condition(config, grid)
    omega = resolve_field_option(config.omega, grid, u0, "omega")
    reference = resolve_field_option(config.reference, grid, u0, "reference")
    solver_config = SolverConfig.from_experiment(config)

    logger.info(f"Simulating {config.condition} on n={grid.n} up to T={config.T} (dt={config.dt})")
    stats = PicardStats()
    on_window = progress.on_window if progress is not None else None
    traj = picard_solve(u0, config.T, solver_config, on_window=on_window, stats=stats)
    if traj.status is not TrajectoryStatus.COMPLETED:
        logger.warning(f"Solve stopped at t={traj.final_time:.6g}: {traj.status.value}")

    series = record(traj, omega=omega, reference=reference,
                    kato_T=config.kato_T, kato_samples=config.kato_samples)
    span = traj.final_time - traj.t_start
    criterion = criterion_distance(series, min(config.window, span))
    witnesses = bv_witness_count(traj, config.bv_epsilon)

    directory = TrajectoryDirectory(config.output)
    directory.write(traj, series, config)
    stats.log_summary()
    return SimulationResult(traj, series, stats, directory.path, criterion, witnesses)
