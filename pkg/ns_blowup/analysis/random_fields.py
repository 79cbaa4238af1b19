"""Random field ensembles with prescribed spectral shape."""

from concurrent.futures import ThreadPoolExecutor

import numpy as np

from ns_blowup.analysis.spectral import RealField, forward, inverse
from ns_blowup.config import worker_count


def _band_noise(grid, rng, components, zero_mean):
    """Gaussian white noise restricted to the dealiased band."""
    noise = rng.standard_normal((components, grid.n, grid.n, grid.n))
    coefficients = forward(noise)
    coefficients[:, ~grid.dealias_mask] = 0.0
    if zero_mean:
        coefficients[:, 0, 0, 0] = 0.0
    return coefficients


def active_blocks(bank):
    """Blocks whose inner annulus radius fits inside the dealiased band."""
    band = bank.grid.wavenumber_scale * bank.grid.n / 3.0
    return [k for k in range(bank.j_max + 1) if k == 0 or 2.0 ** (k - 1) <= band]


def random_dyadic_field(grid, rng, block_weights, bank, components=1, zero_mean=True):
    """Random field whose block sup-norms follow a prescribed dyadic profile.

    Each block of band-limited white noise is rescaled so that
    ||Delta_k f||_inf is close to ``block_weights(k)`` (neighbouring blocks
    overlap, so the profile is approximate).

    Args:
        grid: Grid
        rng: numpy Generator
        block_weights: Callable k -> nonnegative weight
        bank: DyadicFilterBank on ``grid``
        components: 1 or 3
        zero_mean: Remove the xi = 0 mode

    Returns:
        RealField
    """
    coefficients = _band_noise(grid, rng, components, zero_mean)
    total = np.zeros((components, grid.n, grid.n, grid.n))
    for k in active_blocks(bank):
        block = inverse(coefficients * bank.block_multiplier(k))
        peak = float(np.max(np.abs(block)))
        if peak == 0.0:
            continue
        total += block * (block_weights(k) / peak)
    return RealField(grid, total)


def random_smooth_field(grid, rng, slope=-2.0, components=3, zero_mean=True):
    """Band-limited random field with coefficient envelope |xi|^slope, unit sup-norm."""
    coefficients = _band_noise(grid, rng, components, zero_mean)
    k = grid.k_magnitude
    envelope = np.zeros_like(k)
    nonzero = k > 0
    envelope[nonzero] = k[nonzero] ** slope
    if not zero_mean:
        envelope[~nonzero] = 1.0
    samples = inverse(coefficients * envelope)
    peak = float(np.max(np.abs(samples)))
    if peak > 0:
        samples /= peak
    return RealField(grid, samples)


def max_over_samples(evaluate, samples, seed, name="probe"):
    """Evaluate a randomized probe on independent streams and reduce by max.

    Args:
        evaluate: Callable rng -> float or None (None marks a skipped sample)
        samples: Number of independent samples (>= 1)
        seed: Integer seed; the child streams come from SeedSequence.spawn
        name: Thread name prefix

    Returns:
        (max value or None if every sample was skipped, number of valid samples)
    """
    if samples < 1:
        raise ValueError(f"samples must be >= 1, got {samples}")
    seeds = np.random.SeedSequence(seed).spawn(samples)

    def run(seed_sequence):
        return evaluate(np.random.default_rng(seed_sequence))

    with ThreadPoolExecutor(max_workers=worker_count(), thread_name_prefix=name) as pool:
        values = [v for v in pool.map(run, seeds) if v is not None]
    if not values:
        return None, 0
    return max(values), len(values)
