"""Windowed Picard iteration for the integral Navier-Stokes equation.

    u(t) = exp(t Laplacian) u0 + L(P div(u (x) u))(t)

with unit viscosity on the periodic box. Between consecutive nodes the
discrete solution obeys the exponential-integrator relation

    u_{i+1} = E u_i - (W_new N(u_{i+1}) + W_old N(u_i)),   N(u) = P div(u (x) u)

so windows only change how the fixed point is reached, not the fixed point.
"""

import logging
import math
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, Optional

import numpy as np

from ns_blowup.analysis.heat_leray import (
    TimeGrid,
    duhamel_weights,
    kato_within,
    leray_coefficients,
)
from ns_blowup.analysis.spectral import (
    RealField,
    divergence_free_field,
    divergence_residual,
    forward,
    inverse,
    lp_norm,
)
from ns_blowup.config import (
    DEFAULT_EPSILON3,
    DEFAULT_KATO_SAMPLES,
    DEFAULT_PICARD_MAX_ITER,
    DEFAULT_PICARD_TOL,
    HORIZON_MIN_EXPONENT,
)

logger = logging.getLogger('ns_blowup.solver')

# Initial data further than this from divergence-free is rejected, closer is projected
INGEST_DIVERGENCE_TOL = 1e-6
# Relative size of the mean mode accepted as zero
MEAN_TOL = 1e-12


class TrajectoryStatus(str, Enum):
    COMPLETED = 'completed'
    PICARD_DIVERGED = 'picard_diverged'
    HORIZON_REACHED = 'horizon_reached'


@dataclass(frozen=True)
class SolverConfig:
    """Numerical parameters of a solve."""

    dt: float
    picard_tol: float = DEFAULT_PICARD_TOL
    picard_max_iter: int = DEFAULT_PICARD_MAX_ITER
    epsilon3: float = DEFAULT_EPSILON3
    dealias: bool = True
    kato_samples: int = DEFAULT_KATO_SAMPLES

    def __post_init__(self):
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not self.picard_tol > 0:
            raise ValueError(f"picard_tol must be positive, got {self.picard_tol}")
        if self.picard_max_iter < 1:
            raise ValueError(f"picard_max_iter must be >= 1, got {self.picard_max_iter}")
        if not self.epsilon3 > 0:
            raise ValueError(f"epsilon3 must be positive, got {self.epsilon3}")
        if self.kato_samples < 8:
            raise ValueError(f"kato_samples must be >= 8, got {self.kato_samples}")

    @classmethod
    def from_experiment(cls, config):
        """Solver parameters of an ExperimentConfig."""
        return cls(
            dt=config.dt,
            picard_tol=config.picard_tol,
            picard_max_iter=config.picard_max_iter,
            epsilon3=config.epsilon3,
            dealias=config.dealias,
            kato_samples=config.kato_samples,
        )


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Immutable solution sampled on uniform nodes.

    ``times`` starts at ``t_start`` (0 unless produced by ``restart``).
    """

    times: np.ndarray
    states: tuple
    config: SolverConfig
    status: TrajectoryStatus
    diagnostics: Dict = field(default_factory=dict)

    def __post_init__(self):
        times = np.array(self.times, dtype=np.float64, copy=True)
        if len(times) != len(self.states) or len(times) == 0:
            raise ValueError(f"{len(times)} times for {len(self.states)} states")
        if len(times) > 1 and not np.all(np.diff(times) > 0):
            raise ValueError("trajectory times must be strictly increasing")
        times.setflags(write=False)
        object.__setattr__(self, 'times', times)
        object.__setattr__(self, 'states', tuple(self.states))
        object.__setattr__(self, 'status', TrajectoryStatus(self.status))

    def __len__(self):
        return len(self.times)

    @property
    def grid(self):
        return self.states[0].grid

    @property
    def t_start(self):
        return float(self.times[0])

    @property
    def final_time(self):
        return float(self.times[-1])

    def node_index(self, t):
        """Index of node t (relative tolerance 1e-9 of dt).

        Raises:
            ValueError: t is not a node
        """
        index = int(round((t - self.t_start) / self.config.dt))
        if not 0 <= index < len(self) or abs(self.times[index] - t) > 1e-9 * self.config.dt:
            raise ValueError(f"t={t} is not a node of the trajectory")
        return index

    def state(self, t):
        return self.states[self.node_index(t)]


def _nonlinear_coefficients(coefficients, grid, dealias):
    """Coefficients of P div(u (x) u) from the coefficients of u."""
    u = inverse(coefficients)
    d = grid.derivative_wavevector
    mask = grid.dealias_mask if dealias else None
    products = {}
    for i in range(3):
        for j in range(i, 3):
            product = forward(u[i] * u[j])
            if mask is not None:
                product[~mask] = 0.0
            products[i, j] = products[j, i] = product
    div = np.stack([
        1j * (d[0] * products[i, 0] + d[1] * products[i, 1] + d[2] * products[i, 2])
        for i in range(3)
    ])
    return leray_coefficients(div, grid)


def nonlinear_term(u, dealias=True):
    """P div(u (x) u), component i = sum_j d_j(u_i u_j), Leray projected.

    Args:
        u: Divergence-free vector RealField
        dealias: Apply the 2/3 rule to the quadratic products

    Returns:
        RealField tagged divergence-free
    """
    if u.components != 3:
        raise ValueError(f"nonlinear term needs a 3-component field, got {u.components}")
    coefficients = _nonlinear_coefficients(forward(u.samples), u.grid, dealias)
    return divergence_free_field(u.grid, inverse(coefficients))


def _l2(coefficients):
    """Discrete L^2 size up to the constant volume factor."""
    return math.sqrt(float(np.sum(np.abs(coefficients) ** 2)))


@dataclass
class _WindowResult:
    states: list
    sweeps: int
    update: float
    converged: bool
    reason: Optional[str] = None


def _solve_window(start, steps, grid, config, weights):
    """Picard iteration on nodes 0..steps of one window.

    The first iterate is the heat flow of ``start``; each sweep recomputes
    the whole window from the nonlinear terms of the previous iterate.
    """
    decay = weights[0]
    iterate = [start]
    for _ in range(steps):
        iterate.append(decay * iterate[-1])

    update = math.inf
    for sweep in range(1, config.picard_max_iter + 1):
        with np.errstate(over='ignore', invalid='ignore'):
            forcing = [_nonlinear_coefficients(c, grid, config.dealias) for c in iterate]
            decay, w_new, w_old = weights
            new = [start]
            for i in range(steps):
                new.append(decay * new[-1] - (w_new * forcing[i + 1] + w_old * forcing[i]))
            scale = max(_l2(c) for c in new)
            change = max(_l2(a - b) for a, b in zip(new, iterate))

        if not (math.isfinite(scale) and math.isfinite(change)):
            return _WindowResult(iterate, sweep, math.nan, False, 'nan')
        update = 0.0 if scale == 0.0 else change / scale
        iterate = new
        if update < config.picard_tol:
            return _WindowResult(iterate, sweep, update, True)

    return _WindowResult(iterate, config.picard_max_iter, update, False, 'max_iter')


def _horizon_search(u0, config, cap=1.0):
    """Largest dyadic T = 2^-k <= 1 with Kato quantity <= epsilon3.

    The search starts at the smallest dyadic >= cap.

    Returns:
        (T, found): found is False when even 2^-HORIZON_MIN_EXPONENT fails
    """
    first = 0 if cap >= 1 else max(0, math.floor(-math.log2(cap)))
    for k in range(first, HORIZON_MIN_EXPONENT + 1):
        T = 2.0 ** -k
        if kato_within(u0, T, config.epsilon3, config.kato_samples):
            return T, True
    return 2.0 ** -HORIZON_MIN_EXPONENT, False


def admissible_horizon(u0, config):
    """Dyadic lower bound for the existence time of the mild solution.

    Largest T in {1, 1/2, ..., 2^-HORIZON_MIN_EXPONENT} with
    kato_quantity(u0, T) <= epsilon3; the smallest probe when none passes.
    """
    horizon, found = _horizon_search(u0, config)
    if not found:
        logger.warning(f"Kato quantity exceeds epsilon3={config.epsilon3} at every dyadic T >= {horizon:.3g}")
    return horizon


def _ingest(u0):
    """Validate initial data and return its projected coefficients."""
    if u0.components != 3:
        raise ValueError(f"initial data must be a 3-component field, got {u0.components}")
    coefficients = forward(u0.samples)
    amplitude = float(np.max(np.abs(u0.samples)))
    if amplitude > 0 and float(np.max(np.abs(coefficients[:, 0, 0, 0]))) > MEAN_TOL * amplitude:
        raise ValueError("initial data must have zero mean")
    residual = divergence_residual(u0)
    if residual > INGEST_DIVERGENCE_TOL:
        raise ValueError(f"initial data is not divergence-free (relative divergence {residual:.3e})")
    coefficients = leray_coefficients(coefficients, u0.grid)
    coefficients[:, 0, 0, 0] = 0.0
    return coefficients


def _solve(u0, T, config, t_start=0.0, on_window=None, stats=None):
    time_grid = TimeGrid.covering(T, config.dt)
    grid = u0.grid
    coefficients = [_ingest(u0)]
    weights = duhamel_weights(grid, config.dt)
    status = TrajectoryStatus.COMPLETED
    diagnostics = {'windows': [], 't_start': t_start}

    node = 0
    while node < time_grid.steps:
        window_start = t_start + node * config.dt
        remaining = (time_grid.steps - node) * config.dt
        state = RealField(grid, inverse(coefficients[node]))
        if stats is not None:
            stats.record_horizon_search()
        horizon, found = _horizon_search(state, config, cap=min(1.0, remaining))
        if not found:
            logger.warning(f"Kato quantity above epsilon3 at every probe from t={window_start:.6g}")
            status = TrajectoryStatus.HORIZON_REACHED
            diagnostics['reason'] = 'horizon'
            break

        steps = max(1, min(time_grid.steps - node, math.floor(horizon / config.dt + 1e-9)))
        started = time.time()
        result = _solve_window(coefficients[node], steps, grid, config, weights)
        elapsed = time.time() - started
        window = {'start': window_start, 'steps': steps, 'sweeps': result.sweeps, 'update': result.update}
        diagnostics['windows'].append(window)

        if not result.converged:
            logger.warning(
                f"Picard iteration failed on window [{window_start:.6g}, {window_start + steps * config.dt:.6g}] "
                f"after {result.sweeps} sweeps ({result.reason}, update {result.update:.3e})"
            )
            if stats is not None:
                stats.record_failure(window_start, result.reason)
            status = TrajectoryStatus.PICARD_DIVERGED
            diagnostics['reason'] = result.reason
            break

        logger.debug(
            f"Window t={window_start:.6g} length={steps * config.dt:.6g} horizon={horizon:.3g}: "
            f"{result.sweeps} sweeps, update {result.update:.3e}"
        )
        if stats is not None:
            stats.record_window(steps, steps * config.dt, result.sweeps, result.update, elapsed)
        coefficients.extend(result.states[1:])
        node += steps
        if on_window is not None:
            on_window(t_start + node * config.dt, t_start + T)

    states = [divergence_free_field(grid, inverse(c)) for c in coefficients]
    times = t_start + config.dt * np.arange(len(states))
    if len(states) > 1:
        t1 = config.dt
        diagnostics['sqrt_t_linf_first_node'] = math.sqrt(t1) * lp_norm(states[1], math.inf)
    return Trajectory(times, states, config, status, diagnostics)


def picard_solve(u0, T, config, on_window: Optional[Callable] = None, stats=None):
    """Solve the integral equation on [0, T] by windowed Picard iteration.

    Each window starts at the last accepted node; its length is the
    admissible horizon of that state, capped by the remaining time and
    rounded down to whole steps (at least one).

    Args:
        u0: Divergence-free, zero-mean vector RealField
        T: Final time, a multiple of config.dt (T = 0 gives one node)
        config: SolverConfig
        on_window: Optional callback (t_reached, t_final) after each window
        stats: Optional PicardStats to update

    Returns:
        Trajectory; status picard_diverged or horizon_reached keeps the
        nodes accepted before the failure

    Raises:
        ValueError: u0 not divergence-free (beyond 1e-6), nonzero mean,
            not a vector field, or T not a multiple of dt
    """
    return _solve(u0, T, config, on_window=on_window, stats=stats)


def restart(traj, t0, on_window=None, stats=None):
    """Solve again from the state at node t0 up to the final time of ``traj``.

    The result is time-shifted to start at t0, so its nodes coincide with
    the tail of ``traj``.

    Raises:
        ValueError: t0 is not a node of traj
    """
    index = traj.node_index(t0)
    remaining = (len(traj) - 1 - index) * traj.config.dt
    return _solve(traj.states[index], remaining, traj.config,
                  t_start=float(traj.times[index]), on_window=on_window, stats=stats)


def integral_residual(traj):
    """Relative residual of the integral equation at every node.

    Recomputes exp(t Laplacian) u(t_0) + L(N(u))(t) from the stored states
    and compares with u(t), relative to max_t ||u(t)||_2.

    Returns:
        ndarray, one value per node (0 at the first)
    """
    grid = traj.grid
    coefficients = [forward(s.samples) for s in traj.states]
    scale = max(_l2(c) for c in coefficients)
    residuals = np.zeros(len(traj))
    if scale == 0.0:
        return residuals
    weights = duhamel_weights(grid, traj.config.dt)
    decay, w_new, w_old = weights
    forcing = [_nonlinear_coefficients(c, grid, traj.config.dealias) for c in coefficients]
    current = coefficients[0]
    for i in range(1, len(traj)):
        current = decay * current - (w_new * forcing[i] + w_old * forcing[i - 1])
        residuals[i] = _l2(coefficients[i] - current) / scale
    return residuals
