"""Verification suites: numerical checks of every module against closed forms and invariants.

Each check yields one CSV row ``suite,check,observed,threshold,pass``.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict, List

import numpy as np

from ns_blowup.analysis.heat_leray import (
    TimeGrid,
    duhamel,
    heat_flow,
    kato_quantity,
    lemma2_smoothing_probe,
    leray_project,
    oseen_kernel_l1,
)
from ns_blowup.analysis.littlewood_paley import CRITICAL_INDEX, build_filter_bank
from ns_blowup.analysis.paraproduct import (
    bony_pair_sum,
    bony_remainder,
    diagonal_pairs,
    estimate_lemma1_constant,
    exact_bony_high,
    pi0,
)
from ns_blowup.analysis.random_fields import random_smooth_field
from ns_blowup.analysis.spectral import (
    Grid,
    RealField,
    SpectralField,
    dealias_field,
    divergence_residual,
    from_spectral,
    gradient,
    lp_norm,
    pointwise_product,
    to_spectral,
)
from ns_blowup.monitor import scaling_invariance_check
from ns_blowup.presets import small_random_field, taylor_green
from ns_blowup.solver import SolverConfig, integral_residual, nonlinear_term, picard_solve, restart
from ns_blowup.utils import fit_power_law

logger = logging.getLogger('ns_blowup.verification')

SUITE_NAMES = ('lp', 'paraproduct', 'heat', 'solver')
CSV_HEADER = ('suite', 'check', 'observed', 'threshold', 'pass')
# Reconstruction and Parseval resolutions; paraproduct constants at these s
LP_RESOLUTIONS = (16, 32, 64)
LEMMA1_REGULARITIES = (0.5, 1.0, 2.0)
# Per-suite measurement tables, filled when run_verification gets a ``details`` dict
DETAIL_HEADERS = {
    'paraproduct': ('variant', 's', 'n', 'samples', 'max_ratio', 'seed'),
    'heat': ('probe', 't_or_T', 'value', 'fitted_exponent'),
}


def _add_details(details, suite, rows):
    if details is not None:
        details.setdefault(suite, []).extend(rows)


@dataclass(frozen=True)
class CheckResult:
    suite: str
    check: str
    observed: float
    threshold: str
    passed: bool

    def as_row(self):
        return [self.suite, self.check, float(self.observed), self.threshold, self.passed]


def at_most(suite, check, observed, limit):
    observed = float(observed)
    return CheckResult(suite, check, observed, f"<={limit:g}", bool(observed <= limit))


def at_least(suite, check, observed, limit):
    observed = float(observed)
    return CheckResult(suite, check, observed, f">={limit:g}", bool(observed >= limit))


def within(suite, check, observed, target, tol):
    observed = float(observed)
    return CheckResult(suite, check, observed, f"{target:g}+-{tol:g}", bool(abs(observed - target) <= tol))


def _relative_sup(a, b):
    scale = max(float(np.max(np.abs(b.samples))), 1e-300)
    return float(np.max(np.abs(a.samples - b.samples))) / scale


def _bandlimited_noise(grid, rng, components=1):
    """Random field with every |xi_i| <= n/3 and zero mean."""
    return random_smooth_field(grid, rng, slope=0.0, components=components)


def suite_lp(n, samples, seed, details=None):
    """Transforms, norms, Littlewood-Paley reconstruction, block arithmetic, scaling."""
    rng = np.random.default_rng(seed)
    results = []
    for size in sorted(set(LP_RESOLUTIONS) | {n}):
        grid = Grid(size)
        bank = build_filter_bank(grid)
        recon, parseval, roundtrip = 0.0, 0.0, 0.0
        for _ in range(samples):
            f = RealField(grid, rng.standard_normal((1, size, size, size)))
            recon = max(recon, _relative_sup(bank.lp_reconstruct(f), f))
            F = to_spectral(f)
            energy = grid.volume * float(np.sum(np.abs(F.coefficients) ** 2))
            parseval = max(parseval, abs(lp_norm(f, 2) ** 2 - energy) / energy)
            roundtrip = max(roundtrip, _relative_sup(from_spectral(F), f))
        results.append(at_most('lp', f'reconstruction_residual_n{size}', recon, 1e-12))
        results.append(at_most('lp', f'parseval_n{size}', parseval, 1e-12))
        results.append(at_most('lp', f'roundtrip_n{size}', roundtrip, 1e-12))

    grid = Grid(n)
    x1, _, _ = grid.coordinates()
    sine = RealField(grid, np.sin(x1))
    results.append(within('lp', 'sin_l2_closed_form', lp_norm(sine, 2), math.sqrt(grid.volume / 2), 1e-10))
    sin4 = RealField(grid, np.sin(4 * x1))
    results.append(within('lp', 'sin4x_besov_m1_inf', build_filter_bank(grid).besov_norm(sin4, CRITICAL_INDEX),
                          0.25, 1e-12))

    product = pointwise_product(sine, sine)
    expected = RealField(grid, (1 - np.cos(2 * x1)) / 2)
    results.append(at_most('lp', 'product_sin_sin', _relative_sup(product, expected), 1e-12))

    for m in (1, 2):
        if n // 2 ** m < 8:
            continue
        gap = 0.0
        for _ in range(max(1, samples)):
            f = _admissible_for_dilation(grid, rng, m)
            before, after = scaling_invariance_check(f, m)
            gap = max(gap, abs(before - after) / max(before, 1e-300))
        results.append(at_most('lp', f'scaling_invariance_gap_m{m}', gap, 1e-10))
    return results


def _admissible_for_dilation(grid, rng, m):
    """Random field band-limited strictly below n/2^(m+1) per axis, without Delta_0 content."""
    cutoff = grid.n / 2 ** (m + 1)
    noise = RealField(grid, rng.standard_normal((1, grid.n, grid.n, grid.n)))
    coefficients = to_spectral(noise).coefficients.copy()
    coefficients[:, ~grid.band_mask(cutoff)] = 0.0
    coefficients[:, grid.k_magnitude < 2.0] = 0.0
    return from_spectral(SpectralField(grid, coefficients))


def suite_paraproduct(n, samples, seed, details=None):
    """Exact Bony identity, remainder formula and boundedness constants."""
    rng = np.random.default_rng(seed)
    results = []
    grid = Grid(n)
    bank = build_filter_bank(grid)
    identity = 0.0
    for _ in range(samples):
        f = _bandlimited_noise(grid, rng)
        g = _bandlimited_noise(grid, rng)
        product = pointwise_product(f, g, dealias=True)
        rebuilt = pi0(f, g, bank) + exact_bony_high(g, f, bank)
        scale = lp_norm(f, math.inf) * lp_norm(g, math.inf)
        identity = max(identity, float(np.max(np.abs(product.samples - rebuilt.samples))) / scale)
    results.append(at_most('paraproduct', 'exact_bony_identity', identity, 1e-10))

    small = Grid(16)
    small_bank = build_filter_bank(small)
    f = _bandlimited_noise(small, rng)
    g = _bandlimited_noise(small, rng)
    remainder = bony_remainder(f, g, small_bank)
    brute = bony_pair_sum(f, g, diagonal_pairs(small_bank), small_bank)
    gap = float(np.max(np.abs(remainder.samples + brute.samples))) / (lp_norm(f, math.inf) * lp_norm(g, math.inf))
    results.append(at_most('paraproduct', 'remainder_vs_block_pairs_n16', gap, 1e-10))

    coarse, fine = Grid(n), Grid(2 * n)
    for s in LEMMA1_REGULARITIES:
        for which in ('pi0', 'pi1'):
            for variant in ('besov_in', 'linf_in'):
                low = estimate_lemma1_constant(which, variant, s, samples, coarse, seed)
                high = estimate_lemma1_constant(which, variant, s, samples, fine, seed)
                drift = max(low, high) / max(min(low, high), 1e-300)
                results.append(at_most('paraproduct', f'{which}_{variant}_s{s:g}_drift', drift, 2.0))
                _add_details(details, 'paraproduct', [
                    [f'{which}_{variant}', s, resolution.n, samples, value, seed]
                    for resolution, value in ((coarse, low), (fine, high))
                ])
    return results


def suite_heat(n, samples, seed, details=None):
    """Semigroup, Leray projector, Duhamel closed forms, Oseen and smoothing exponents."""
    rng = np.random.default_rng(seed)
    results = []
    grid = Grid(n)
    f = _bandlimited_noise(grid, rng)
    results.append(at_most('heat', 'semigroup_law',
                           _relative_sup(heat_flow(heat_flow(f, 0.1), 0.2), heat_flow(f, 0.3)), 1e-12))

    V = RealField(grid, rng.standard_normal((3, n, n, n)))
    P = leray_project(V)
    results.append(at_most('heat', 'leray_idempotent', _relative_sup(leray_project(P), P), 1e-12))
    results.append(at_most('heat', 'leray_divergence', divergence_residual(P), 1e-10))
    phi = RealField(grid, rng.standard_normal((1, n, n, n)))
    grad = gradient(dealias_field(phi))
    results.append(at_most('heat', 'leray_annihilates_gradients',
                           lp_norm(leray_project(grad), math.inf) / lp_norm(grad, math.inf), 1e-12))
    bank = build_filter_bank(grid)
    commute = _relative_sup(bank.dyadic_block(heat_flow(f, 0.05), 2), heat_flow(bank.dyadic_block(f, 2), 0.05))
    results.append(at_most('heat', 'heat_commutes_with_blocks', commute, 1e-12))

    small = Grid(16)
    x1, _, _ = small.coordinates()
    sine = RealField(small, np.sin(x1))
    exact = RealField(small, -(1 - math.exp(-0.1)) * np.sin(x1))
    computed = duhamel(sine, TimeGrid(1e-3, 100), 0.1)
    results.append(at_most('heat', 'duhamel_single_mode', float(np.max(np.abs(computed.samples - exact.samples))), 1e-8))

    u0 = taylor_green(grid)
    scale = (1 + lp_norm(u0, 3)) * lp_norm(u0, math.inf)
    results.append(at_most('heat', 'kato_small_T_relative', kato_quantity(u0, 1e-4) / scale, 0.011))

    oseen_grid = Grid(64)
    times = [1e-3, 2e-3, 4e-3, 8e-3]
    values = [oseen_kernel_l1(t, oseen_grid) for t in times]
    slope, _ = fit_power_law(times, values)
    results.append(within('heat', 'oseen_kernel_slope', slope, -0.5, 0.05))
    _add_details(details, 'heat', [['oseen_kernel_l1', t, v, slope] for t, v in zip(times, values)])

    horizons = [0.1, 0.2, 0.4]
    for alpha, target in ((1, 0.5), (2, 0.0)):
        probes = [lemma2_smoothing_probe(0.5, alpha, T, samples, Grid(32), seed) for T in horizons]
        exponent, _ = fit_power_law([T for T, _ in probes], [r for _, r in probes])
        results.append(within('heat', f'smoothing_exponent_alpha{alpha}', exponent, target, 0.15))
        _add_details(details, 'heat', [[f'smoothing_alpha{alpha}', T, r, exponent] for T, r in probes])
    return results


def suite_solver(n, samples, seed, details=None):
    """Taylor-Green exactness, restart consistency, invariants and refinement order."""
    results = []
    grid = Grid(n)
    config = SolverConfig(dt=1e-2)
    u0 = taylor_green(grid)
    results.append(at_most('solver', 'taylor_green_nonlinear', lp_norm(nonlinear_term(u0), math.inf), 1e-10))

    traj = picard_solve(u0, 0.1, config)
    exact = heat_flow(u0, traj.final_time)
    error = float(np.max(np.abs(traj.states[-1].samples - exact.samples)))
    results.append(at_most('solver', 'taylor_green_heat_law', error, 1e-8))
    tail = restart(traj, 0.05)
    results.append(at_most('solver', 'taylor_green_restart', _restart_gap(traj, tail), 10 * config.picard_tol))

    small = small_random_field(grid, seed, config.epsilon3 / 2)
    small_traj = picard_solve(small, 0.1, config)
    sweeps = max(w['sweeps'] for w in small_traj.diagnostics['windows'])
    results.append(at_most('solver', 'small_data_sweeps', sweeps, 10))
    results.append(at_most('solver', 'small_data_restart', _restart_gap(small_traj, restart(small_traj, 0.05)), 1e-8))

    for name, trajectory in (('taylor_green', traj), ('small_data', small_traj)):
        results.append(at_most('solver', f'{name}_divergence', max(divergence_residual(s) for s in trajectory.states), 1e-10))
        results.append(at_most('solver', f'{name}_energy_increase', energy_increase(trajectory), 1e-6))
        results.append(at_most('solver', f'{name}_integral_residual',
                               float(np.max(integral_residual(trajectory))), 10 * config.picard_tol))
        means = max(float(np.max(np.abs(to_spectral(s).coefficients[:, 0, 0, 0]))) for s in trajectory.states)
        results.append(at_most('solver', f'{name}_mean_mode', means, 1e-14))

    results.append(at_least('solver', 'refinement_order', refinement_order(Grid(16), seed), 1.8))
    return results


def energy_increase(traj):
    """Largest relative increase of ||u||_2 between consecutive nodes."""
    norms = [lp_norm(s, 2) for s in traj.states]
    worst = 0.0
    for before, after in zip(norms, norms[1:]):
        if before > 0:
            worst = max(worst, (after - before) / before)
    return worst


def _restart_gap(traj, tail):
    """Relative L^2 gap between a restarted trajectory and the original tail."""
    offset = traj.node_index(tail.t_start)
    scale = max(lp_norm(s, 2) for s in traj.states) or 1.0
    gap = 0.0
    for index, state in enumerate(tail.states):
        gap = max(gap, lp_norm(state - traj.states[offset + index], 2) / scale)
    return gap


def refinement_order(grid, seed, T=0.1, dt=0.02):
    """Observed order of the terminal state under dt halving (three solves)."""
    perturbation = small_random_field(grid, seed, 0.05)
    u0 = RealField(grid, taylor_green(grid).samples + perturbation.samples, divergence_free=True)
    finals = []
    for k in range(3):
        config = SolverConfig(dt=dt / 2 ** k, picard_tol=1e-12)
        finals.append(picard_solve(u0, T, config).states[-1])
    coarse_gap = lp_norm(finals[0] - finals[1], 2)
    fine_gap = lp_norm(finals[1] - finals[2], 2)
    return math.log2(coarse_gap / fine_gap)


SUITES: Dict[str, Callable[..., List[CheckResult]]] = {
    'lp': suite_lp,
    'paraproduct': suite_paraproduct,
    'heat': suite_heat,
    'solver': suite_solver,
}


def run_verification(suite, n=32, samples=20, seed=0, on_suite=None, details=None):
    """Run one suite (or 'all').

    Args:
        suite: 'lp', 'paraproduct', 'heat', 'solver' or 'all'
        n: Base grid size
        samples: Random samples per randomized check
        seed: Integer seed
        on_suite: Optional callback(name) before each suite
        details: Optional dict receiving measurement rows per suite (see DETAIL_HEADERS)

    Returns:
        list of CheckResult
    """
    names = SUITE_NAMES if suite == 'all' else (suite,)
    for name in names:
        if name not in SUITES:
            raise ValueError(f"unknown suite '{name}' (choose from {', '.join(SUITE_NAMES)}, all)")
    results = []
    for name in names:
        if on_suite is not None:
            on_suite(name)
        suite_results = SUITES[name](n, samples, seed, details)
        failed = [r.check for r in suite_results if not r.passed]
        logger.info(f"Suite {name}: {len(suite_results) - len(failed)}/{len(suite_results)} checks passed")
        if failed:
            logger.warning(f"Suite {name} failed: {', '.join(failed)}")
        results.extend(suite_results)
    return results
