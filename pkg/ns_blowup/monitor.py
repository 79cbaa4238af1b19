"""Norm series along trajectories and the quantities of the blowup criteria."""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict

import numpy as np

from ns_blowup.analysis.heat_leray import kato_quantity
from ns_blowup.analysis.littlewood_paley import CRITICAL_INDEX, build_filter_bank, dilate_dyadic, has_low_block_content
from ns_blowup.analysis.spectral import Grid, lp_norm, resample
from ns_blowup.config import DEFAULT_KATO_SAMPLES
from ns_blowup.utils import fit_power_law

logger = logging.getLogger('ns_blowup.monitor')

SERIES_COLUMNS = ('l2', 'l3', 'l6', 'linf', 'besov_m1_inf', 'dist_to_omega', 'kato', 'tv_accum')
# Only signed column; present when a reference state is supplied
KS_GAP_COLUMN = 'ks_gap'
MIN_FIT_SAMPLES = 8


def norm_column(p):
    """Column name holding ||u(t)||_p."""
    return 'linf' if math.isinf(p) else f"l{format(p, 'g')}"


@dataclass(frozen=True, eq=False)
class NormSeries:
    """Per-node diagnostics of a trajectory; ``columns`` keeps insertion order."""

    times: np.ndarray
    columns: Dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        times = np.array(self.times, dtype=np.float64, copy=True)
        if len(times) > 1 and not np.all(np.diff(times) > 0):
            raise ValueError("series times must be strictly increasing")
        columns = {}
        for name, values in self.columns.items():
            values = np.array(values, dtype=np.float64, copy=True)
            if values.shape != times.shape:
                raise ValueError(f"column {name} has {values.size} values for {times.size} times")
            if not np.all(np.isfinite(values)):
                raise ValueError(f"column {name} has non-finite values")
            if name != KS_GAP_COLUMN and np.any(values < 0):
                raise ValueError(f"column {name} has negative values")
            values.setflags(write=False)
            columns[name] = values
        times.setflags(write=False)
        object.__setattr__(self, 'times', times)
        object.__setattr__(self, 'columns', columns)

    def __len__(self):
        return len(self.times)

    @property
    def column_names(self):
        return tuple(self.columns)

    def column(self, name):
        try:
            return self.columns[name]
        except KeyError:
            raise ValueError(f"series has no column '{name}' (have {', '.join(self.columns)})")


def record(traj, omega=None, reference=None, kato_T=1.0, kato_samples=DEFAULT_KATO_SAMPLES,
           extra_p=(), bank=None):
    """Diagnostics at every node of a trajectory.

    Args:
        traj: Trajectory
        omega: Reference field of the distance column (default 0)
        reference: Optional state u* for the ks_gap column ||u||_3^3 - ||u*||_3^3
        kato_T: Horizon of the kato column
        kato_samples: Sample times of the kato column
        extra_p: Additional exponents p, each adding a column ``l<p>``
        bank: Optional filter bank on the trajectory grid

    Returns:
        NormSeries

    Raises:
        ValueError: omega or reference on another grid
    """
    grid = traj.grid
    for name, other in (('omega', omega), ('reference', reference)):
        if other is not None and other.grid != grid:
            raise ValueError(f"{name} lives on {other.grid}, trajectory on {grid}")
    bank = bank if bank is not None else build_filter_bank(grid)

    columns = {name: [] for name in SERIES_COLUMNS}
    extra = {norm_column(p): p for p in extra_p if norm_column(p) not in columns}
    for name in extra:
        columns[name] = []
    if reference is not None:
        columns[KS_GAP_COLUMN] = []
        reference_cube = lp_norm(reference, 3) ** 3

    total_variation = 0.0
    previous = None
    for u in traj.states:
        columns['l2'].append(lp_norm(u, 2))
        l3 = lp_norm(u, 3)
        columns['l3'].append(l3)
        columns['l6'].append(lp_norm(u, 6))
        columns['linf'].append(lp_norm(u, math.inf))
        besov = bank.besov_norm(u, CRITICAL_INDEX)
        columns['besov_m1_inf'].append(besov)
        # distance to zero is the norm itself
        columns['dist_to_omega'].append(besov if omega is None else bank.besov_distance(u, omega, CRITICAL_INDEX))
        columns['kato'].append(kato_quantity(u, kato_T, kato_samples))
        if previous is not None:
            total_variation += bank.besov_distance(u, previous, CRITICAL_INDEX)
        columns['tv_accum'].append(total_variation)
        for name, p in extra.items():
            columns[name].append(lp_norm(u, p))
        if reference is not None:
            columns[KS_GAP_COLUMN].append(l3 ** 3 - reference_cube)
        previous = u

    logger.debug(f"Recorded {len(traj)} nodes on n={grid.n}")
    return NormSeries(traj.times, columns)


def leray_giga_exponent(p):
    """(1/2)(3/p - 1): lower-bound exponent of ||u(t)||_p near a blowup time."""
    return 0.5 * (3.0 / p - 1.0)


def fit_lower_bound_exponent(series, p, t_star):
    """Least-squares fit ||u(t)||_p ~ c_p (t_star - t)^exponent.

    Args:
        series: NormSeries holding the column for p
        p: Exponent > 3
        t_star: Candidate blowup time after the last sample

    Returns:
        (exponent, c_p)

    Raises:
        ValueError: p <= 3, t_star not after the last sample, fewer than
            MIN_FIT_SAMPLES samples, missing column or nonpositive norms
    """
    if not p > 3:
        raise ValueError(f"lower-bound fit needs p > 3, got {p}")
    if len(series) < MIN_FIT_SAMPLES:
        raise ValueError(f"lower-bound fit needs at least {MIN_FIT_SAMPLES} samples, got {len(series)}")
    if not t_star > series.times[-1]:
        raise ValueError(f"t_star={t_star} must exceed the last sample time {series.times[-1]}")
    norms = series.column(norm_column(p))
    if np.any(norms <= 0):
        raise ValueError("lower-bound fit needs positive norms")
    return fit_power_law(t_star - series.times, norms)


def has_blowup_signature(exponent, p, tol=0.1):
    """True when a fitted exponent is within ``tol`` of the lower-bound exponent."""
    return abs(exponent - leray_giga_exponent(p)) <= tol


def criterion_distance(series, window):
    """sup of dist_to_omega over nodes with t >= t_last - window.

    Stands in for the lim sup at the final time.

    Raises:
        ValueError: empty series, negative window or window longer than the series span
    """
    if len(series) == 0:
        raise ValueError("criterion distance of an empty series")
    span = series.times[-1] - series.times[0]
    if not 0 <= window <= span:
        raise ValueError(f"window must be in [0, {span:g}], got {window}")
    distances = series.column('dist_to_omega')
    start = series.times[-1] - window
    selected = distances[series.times >= start - 1e-12 * max(1.0, abs(start))]
    return float(np.max(selected))


def bv_witness_count(traj, epsilon, bank=None):
    """Greedy count of epsilon-separated increments in B^{-1,inf}.

    Scans the nodes in order and accepts a node whenever its distance to
    the last accepted node is at least ``epsilon``.
    """
    if not epsilon > 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    bank = bank if bank is not None else build_filter_bank(traj.grid)
    count = 0
    anchor = traj.states[0]
    for u in traj.states[1:]:
        if bank.besov_distance(u, anchor, CRITICAL_INDEX) >= epsilon:
            count += 1
            anchor = u
    return count


def scaling_invariance_check(f, m):
    """B^{-1,inf} norm of f before and after the dilation x -> 2^m x.

    ``before`` is taken on the points that the dilation maps onto the grid
    (the grid coarsened by 2^m), so both values sample the same function
    values and agree up to roundoff. It can sit below besov_norm(f) on the
    native grid, whose sup norms see every grid point; for m = 0 the two
    coincide.

    Args:
        f: RealField band-limited strictly below n / 2^(m+1), without Delta_0 content
        m: Nonnegative integer

    Returns:
        (before, after)

    Raises:
        ValueError: band limit or low-block violation, grid too coarse
    """
    bank = build_filter_bank(f.grid)
    if has_low_block_content(f, bank):
        raise ValueError("field has Delta_0 content; dilation does not shift its blocks")
    dilated = dilate_dyadic(f, m)
    after = bank.besov_norm(dilated, CRITICAL_INDEX)
    if m == 0:
        return after, after
    coarse = Grid(f.grid.n // 2 ** m, f.grid.box_length)
    before = build_filter_bank(coarse).besov_norm(resample(f, coarse), CRITICAL_INDEX)
    return before, after


def embedding_ratio(u, bank=None):
    """||u||_{B^{-1,inf}} / ||u||_3, or None for the zero field."""
    l3 = lp_norm(u, 3)
    if l3 == 0.0:
        return None
    bank = bank if bank is not None else build_filter_bank(u.grid)
    return bank.besov_norm(u, CRITICAL_INDEX) / l3
