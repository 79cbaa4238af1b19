"""Heat semigroup, Leray projector and the Duhamel operator on the torus.

The Duhamel operator is L(f)(t) = -int_0^t exp((t - s) Laplacian) f(s) ds,
discretized with an exponential integrator: on each step the heat factor is
applied exactly per mode while the forcing is linear in time.
"""

import logging
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.fft as sfft

from ns_blowup.analysis.littlewood_paley import BesovIndex, build_filter_bank
from ns_blowup.analysis.random_fields import max_over_samples, random_dyadic_field, random_smooth_field
from ns_blowup.analysis.spectral import RealField, apply_multiplier, divergence_free_field, forward, inverse, lp_norm
from ns_blowup.config import (
    DEFAULT_KATO_SAMPLES,
    FFT_WORKERS,
    KATO_DECADES,
    OSEEN_MAX_POINTS,
    OSEEN_SPACING_FACTOR,
)

logger = logging.getLogger('ns_blowup.analysis.heat_leray')

# Below this value of |xi|^2 dt the integrator weights use their Taylor series
_SERIES_THRESHOLD = 1e-3


@dataclass(frozen=True)
class TimeGrid:
    """Uniform time nodes 0, dt, ..., steps * dt."""

    dt: float
    steps: int

    def __post_init__(self):
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise ValueError(f"time step must be positive and finite, got {self.dt}")
        if isinstance(self.steps, bool) or not isinstance(self.steps, (int, np.integer)) or self.steps < 0:
            raise ValueError(f"number of steps must be a nonnegative integer, got {self.steps}")
        object.__setattr__(self, 'steps', int(self.steps))

    @classmethod
    def covering(cls, T, dt):
        """Grid from 0 to T; T must be a multiple of dt (relative tolerance 1e-9)."""
        if not T >= 0:
            raise ValueError(f"final time must be >= 0, got {T}")
        steps = round(T / dt)
        if abs(steps * dt - T) > 1e-9 * max(T, dt):
            raise ValueError(f"T={T} is not a multiple of dt={dt}")
        return cls(dt, steps)

    @cached_property
    def t_nodes(self):
        nodes = self.dt * np.arange(self.steps + 1)
        nodes.setflags(write=False)
        return nodes

    @property
    def final_time(self):
        return self.steps * self.dt

    def __len__(self):
        return self.steps + 1

    def index_of(self, t):
        """Index of the node at time t.

        Raises:
            ValueError: t is not a node (relative tolerance 1e-9 of dt)
        """
        index = round(t / self.dt)
        if not 0 <= index <= self.steps or abs(index * self.dt - t) > 1e-9 * self.dt:
            raise ValueError(f"t={t} is not a node of the time grid (dt={self.dt}, steps={self.steps})")
        return index


def heat_multiplier(grid, t):
    """exp(-t |xi|^2)."""
    return np.exp(-t * grid.k_squared)


def heat_flow(f, t):
    """exp(t Laplacian) f.

    Raises:
        ValueError: t < 0
    """
    if not t >= 0:
        raise ValueError(f"heat flow time must be >= 0, got {t}")
    if t == 0:
        return f
    return apply_multiplier(f, heat_multiplier(f.grid, t), divergence_free=f.divergence_free)


def leray_coefficients(coefficients, grid):
    """Apply delta_ij - d_i d_j / |d|^2 to a (3, n, n, n) coefficient array.

    d is the Nyquist-zeroed wavevector, so the output is divergence-free
    for the spectral divergence. Modes with d = 0 pass through.
    """
    d = grid.derivative_wavevector
    d_squared = d[0] ** 2 + d[1] ** 2 + d[2] ** 2
    inverse_d_squared = np.divide(1.0, d_squared, out=np.zeros_like(d_squared), where=d_squared > 0)
    longitudinal = (d[0] * coefficients[0] + d[1] * coefficients[1] + d[2] * coefficients[2]) * inverse_d_squared
    return np.stack([coefficients[i] - d[i] * longitudinal for i in range(3)])


def leray_project(V):
    """Leray projection of a vector field onto divergence-free fields.

    Raises:
        ValueError: V is not a 3-component field
    """
    if V.components != 3:
        raise ValueError(f"Leray projection needs a 3-component field, got {V.components}")
    projected = leray_coefficients(forward(V.samples), V.grid)
    return divergence_free_field(V.grid, inverse(projected))


def _relative_weight(x):
    """(1 - exp(-x)) / x, equal to 1 at x = 0."""
    out = np.ones_like(x)
    nonzero = x > 0
    out[nonzero] = -np.expm1(-x[nonzero]) / x[nonzero]
    return out


def _ramp_weight(x):
    """(1 - exp(-x)(1 + x)) / x^2, equal to 1/2 at x = 0."""
    out = np.empty_like(x)
    small = x < _SERIES_THRESHOLD
    xs = x[small]
    out[small] = 0.5 - xs / 3.0 + xs ** 2 / 8.0 - xs ** 3 / 30.0 + xs ** 4 / 144.0
    xl = x[~small]
    out[~small] = (1.0 - np.exp(-xl) * (1.0 + xl)) / xl ** 2
    return out


def duhamel_weights(grid, dt):
    """Per-mode step weights of the exponential integrator.

    With lambda = |xi|^2, forcing linear in time between f_i and f_{i+1}:

        int_0^dt exp(-lambda tau) f(t_{i+1} - tau) dtau = w_new f_{i+1} + w_old f_i

    Returns:
        (decay, w_new, w_old) arrays of shape (n, n, n)
    """
    x = grid.k_squared * dt
    ramp = dt * _ramp_weight(x)
    w_new = dt * _relative_weight(x) - ramp
    return np.exp(-x), w_new, ramp


def duhamel_step(previous, forcing_old, forcing_new, weights):
    """Advance L(f) by one step in coefficient space."""
    decay, w_new, w_old = weights
    return decay * previous - (w_new * forcing_new + w_old * forcing_old)


def _as_forcings(forcing, time_grid):
    if isinstance(forcing, RealField):
        return [forcing] * len(time_grid)
    forcing = list(forcing)
    if not forcing:
        raise ValueError("forcing has no samples")
    if len(forcing) != len(time_grid):
        raise ValueError(f"forcing has {len(forcing)} samples for {len(time_grid)} time nodes")
    grid = forcing[0].grid
    for f in forcing:
        if f.grid != grid:
            raise ValueError(f"grid mismatch in forcing: {f.grid} vs {grid}")
    return forcing


def duhamel_nodes(forcing, time_grid):
    """L(f) at every node of ``time_grid``.

    Args:
        forcing: One RealField per node, or a single RealField constant in time
        time_grid: TimeGrid

    Returns:
        list of RealField, the first one zero
    """
    forcing = _as_forcings(forcing, time_grid)
    grid = forcing[0].grid
    weights = duhamel_weights(grid, time_grid.dt)
    coefficients = [forward(f.samples) for f in forcing]
    current = np.zeros_like(coefficients[0])
    result = [RealField(grid, inverse(current))]
    for i in range(time_grid.steps):
        current = duhamel_step(current, coefficients[i], coefficients[i + 1], weights)
        result.append(RealField(grid, inverse(current)))
    return result


def duhamel(forcing, time_grid, t):
    """L(f)(t) for a node t of ``time_grid``.

    Raises:
        ValueError: t not on the grid, forcing empty or of the wrong length
    """
    index = time_grid.index_of(t)
    forcing = _as_forcings(forcing, time_grid)
    return duhamel_nodes(forcing[:index + 1], TimeGrid(time_grid.dt, index))[-1]


def oseen_quadrature_points(t, grid):
    """Points per axis that resolve the Oseen kernel at time t.

    Starts from grid.n and doubles until the spacing is at most
    OSEEN_SPACING_FACTOR times the heat kernel width sqrt(2t).
    """
    width = math.sqrt(2.0 * t)
    n = grid.n
    while grid.box_length / n > OSEEN_SPACING_FACTOR * width:
        n *= 2
    return n


def oseen_kernel_l1(t, grid, component=(1, 1, 1)):
    """L^1 norm of one component of the kernel of exp(t Laplacian) P div.

    The multiplier is exp(-t|xi|^2) (delta_ij - xi_i xi_j / |xi|^2) (i xi_k);
    the torus kernel approximates the whole-space one while sqrt(t) is small
    against the box. The kernel is evaluated on the box of ``grid`` with
    ``oseen_quadrature_points(t, grid)`` points per axis, so the result does
    not depend on grid.n once the kernel is resolved.

    Args:
        t: Time, 0 < t <= (box_length / 8)^2
        grid: Grid
        component: (i, j, k), each in 1..3

    Returns:
        float

    Raises:
        ValueError: t outside the admissible range, too small to resolve with
            OSEEN_MAX_POINTS points, or a bad component
    """
    limit = (grid.box_length / 8.0) ** 2
    if not 0 < t <= limit:
        raise ValueError(f"Oseen kernel needs 0 < t <= (box_length/8)^2 = {limit:.6g}, got {t}")
    i, j, k = component
    if not all(c in (1, 2, 3) for c in component):
        raise ValueError(f"kernel component indices must be in 1..3, got {component}")
    n = oseen_quadrature_points(t, grid)
    if n > max(grid.n, OSEEN_MAX_POINTS):
        raise ValueError(
            f"Oseen kernel cannot resolve t={t} on a box of length {grid.box_length:g}: "
            f"needs {n} points per axis, at most {OSEEN_MAX_POINTS}"
        )

    # Real kernel: half spectrum along the last axis
    scale = grid.wavenumber_scale
    full = sfft.fftfreq(n, d=1.0 / n)
    half = sfft.rfftfreq(n, d=1.0 / n)
    k_axes = [scale * full[:, None, None], scale * full[None, :, None], scale * half[None, None, :]]
    d = [np.where(np.abs(kk) == scale * (n // 2), 0.0, kk) for kk in k_axes]
    d_squared = d[0] ** 2 + d[1] ** 2 + d[2] ** 2
    ratio = np.divide(d[i - 1] * d[j - 1], d_squared,
                      out=np.zeros(d_squared.shape), where=d_squared > 0)
    projector = (1.0 if i == j else 0.0) - ratio
    heat = np.exp(-t * (k_axes[0] ** 2 + k_axes[1] ** 2 + k_axes[2] ** 2))
    multiplier = heat * projector * (1j * d[k - 1])
    # kernel = irfftn(multiplier) / volume; its L^1 quadrature is the mean of |irfftn|
    values = sfft.irfftn(multiplier, s=(n, n, n), norm='forward', workers=FFT_WORKERS)
    logger.debug(f"Oseen kernel t={t}: {n} points per axis")
    return float(np.mean(np.abs(values)))


def kato_times(T, t_samples):
    """Log-spaced sample times covering KATO_DECADES decades below T."""
    return np.logspace(math.log10(T) - KATO_DECADES, math.log10(T), t_samples)


def _peak_magnitude(samples):
    """max over points of the Euclidean magnitude across components."""
    return float(np.max(np.sqrt(np.sum(samples ** 2, axis=0))))


def sqrt_t_heat_sup(v0, times):
    """sqrt(t) ||exp(t Laplacian) v0||_inf at each time, from one forward transform."""
    coefficients = forward(v0.samples)
    values = np.empty(len(times))
    for index, t in enumerate(times):
        flowed = inverse(coefficients * heat_multiplier(v0.grid, t))
        values[index] = math.sqrt(t) * _peak_magnitude(flowed)
    return values


def kato_quantity(v0, T, t_samples=DEFAULT_KATO_SAMPLES):
    """(1 + ||v0||_3) sup_{0<t<=T} sqrt(t) ||exp(t Laplacian) v0||_inf.

    The supremum is taken over ``t_samples`` log-spaced times in
    [T 10^-KATO_DECADES, T].

    Raises:
        ValueError: T outside (0, 1] or t_samples < 8
    """
    if not 0 < T <= 1:
        raise ValueError(f"Kato horizon T must be in (0, 1], got {T}")
    if t_samples < 8:
        raise ValueError(f"t_samples must be >= 8, got {t_samples}")
    l3 = lp_norm(v0, 3)
    if l3 == 0.0:
        return 0.0
    return (1.0 + l3) * float(np.max(sqrt_t_heat_sup(v0, kato_times(T, t_samples))))


def kato_within(v0, T, threshold, t_samples=DEFAULT_KATO_SAMPLES):
    """True when kato_quantity(v0, T, t_samples) <= threshold.

    Scans the sample times from T downwards and stops at the first
    violation. There is no shortcut through (1 + ||v0||_3) sqrt(T) ||v0||_inf:
    the sampled spectral heat flow has no maximum principle, and on rough
    data its sup can exceed ||v0||_inf.
    """
    if not 0 < T <= 1:
        raise ValueError(f"Kato horizon T must be in (0, 1], got {T}")
    if t_samples < 8:
        raise ValueError(f"t_samples must be >= 8, got {t_samples}")
    factor = 1.0 + lp_norm(v0, 3)
    coefficients = forward(v0.samples)
    for t in kato_times(T, t_samples)[::-1]:
        flowed = inverse(coefficients * heat_multiplier(v0.grid, t))
        if factor * math.sqrt(t) * _peak_magnitude(flowed) > threshold:
            return False
    return True


def lemma2_smoothing_probe(r, alpha, T, samples, grid, seed, steps=8):
    """Measured norm of L from L^inf_T B^{r,inf} into L^inf_T B^{r+alpha,inf}.

    Forcings are random, constant in time and flat in B^{r,inf} with zero mean;
    zero forcings are skipped. The sup over t uses the nodes of a uniform
    grid with ``steps`` steps on [0, T].

    Args:
        r: Regularity of the forcing
        alpha: Gain, 1 or 2
        T: Final time in (0, 1]
        samples: Number of random forcings
        grid: Grid
        seed: Integer seed
        steps: Time steps on [0, T]

    Returns:
        (T, max ratio); callers regress log ratio against log T
    """
    if alpha not in (1, 2):
        raise ValueError(f"alpha must be 1 or 2, got {alpha}")
    if not 0 < T <= 1:
        raise ValueError(f"T must be in (0, 1], got {T}")
    bank = build_filter_bank(grid)
    source_index = BesovIndex(r)
    target_index = BesovIndex(r + alpha)
    time_grid = TimeGrid(T / steps, steps)

    def weights(k):
        return 2.0 ** (-r * k)

    def one_forcing(rng):
        f = random_dyadic_field(grid, rng, weights, bank)
        f_norm = bank.besov_norm(f, source_index)
        if f_norm == 0.0:
            return None
        values = duhamel_nodes(f, time_grid)[1:]
        return max(bank.besov_norm(v, target_index) for v in values) / f_norm

    ratio, valid = max_over_samples(one_forcing, samples, seed, name="smoothing")
    logger.debug(f"Smoothing probe r={r} alpha={alpha} T={T}: {ratio} over {valid} forcings")
    return T, (0.0 if ratio is None else ratio)


def l3_smoothing_probe(samples, grid, seed, t_samples=DEFAULT_KATO_SAMPLES):
    """Measured constant C in sup_{s>0} sqrt(s) ||exp(s Laplacian) f||_inf <= C ||f||_3.

    Uses random zero-mean smooth vector fields; the sup over s runs over
    log-spaced times from 1e-6 L^2 to L^2 (the heat flow of a zero-mean field
    decays exponentially beyond that).
    """
    L2 = grid.box_length ** 2
    times = np.logspace(math.log10(1e-6 * L2), math.log10(L2), t_samples)

    def one_field(rng):
        f = random_smooth_field(grid, rng)
        l3 = lp_norm(f, 3)
        if l3 == 0.0:
            return None
        return float(np.max(sqrt_t_heat_sup(f, times))) / l3

    ratio, _ = max_over_samples(one_field, samples, seed, name="l3-smoothing")
    return 0.0 if ratio is None else ratio
