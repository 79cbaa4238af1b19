"""Dyadic filter bank: low-pass S_j, blocks Delta_k and Besov norms B_p^{s,inf}.

Filters are Fourier multipliers: the transfer function of S_j is
Phi(2^-j |xi|), where the radial cutoff Phi equals 1 on [0, 1] and 0 on
[2, inf). Delta_0 = S_0 and Delta_k = S_k - S_{k-1} for k >= 1.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np

from ns_blowup.analysis.spectral import RealField, forward, inverse, samples_lp_norm

logger = logging.getLogger('ns_blowup.analysis.littlewood_paley')


class SmoothingProfile(str, Enum):
    """Interpolation of the radial cutoff on (1, 2)."""

    EXP_BUMP = 'exp_bump'      # C-infinity, built from exp(-1/t)
    COSINE = 'cosine'          # C^1 raised cosine
    SMOOTHSTEP = 'smoothstep'  # C^2 quintic


def _bump(t):
    out = np.zeros_like(t)
    positive = t > 0
    out[positive] = np.exp(-1.0 / t[positive])
    return out


def cutoff_profile(r, profile=SmoothingProfile.EXP_BUMP):
    """Radial cutoff Phi(r): 1 for r <= 1, 0 for r >= 2, nonincreasing.

    Args:
        r: Nonnegative radii (array-like)
        profile: SmoothingProfile (or its string value)

    Returns:
        ndarray of the same shape as r
    """
    profile = SmoothingProfile(profile)
    r = np.asarray(r, dtype=np.float64)
    out = np.zeros_like(r)
    out[r <= 1.0] = 1.0
    middle = (r > 1.0) & (r < 2.0)
    t = r[middle] - 1.0
    if profile is SmoothingProfile.EXP_BUMP:
        high = _bump(1.0 - t)
        low = _bump(t)
        out[middle] = high / (high + low)
    elif profile is SmoothingProfile.COSINE:
        out[middle] = 0.5 * (1.0 + np.cos(math.pi * t))
    else:
        out[middle] = 1.0 - t ** 3 * (10.0 - 15.0 * t + 6.0 * t ** 2)
    return out


@dataclass(frozen=True)
class BesovIndex:
    """Index (s, p) of the space B_p^{s,inf}."""

    s: float
    p: float = math.inf

    def __post_init__(self):
        p = float(self.p)
        if math.isnan(p) or p < 1:
            raise ValueError(f"Besov index needs p >= 1, got {self.p}")
        if not math.isfinite(self.s):
            raise ValueError(f"Besov regularity must be finite, got {self.s}")
        object.__setattr__(self, 's', float(self.s))
        object.__setattr__(self, 'p', p)

    def __str__(self):
        p = 'inf' if math.isinf(self.p) else format(self.p, 'g')
        return f"B_{p}^({format(self.s, 'g')},inf)"


def as_besov_index(idx):
    """Accept a BesovIndex or an (s, p) pair."""
    if isinstance(idx, BesovIndex):
        return idx
    s, p = idx
    return BesovIndex(s, p)


# Critical space of the blowup criterion
CRITICAL_INDEX = BesovIndex(-1.0, math.inf)


class DyadicFilterBank:
    """Transfer functions of S_0 ... S_{j_max} on one grid.

    j_max is the smallest j with 2^j >= the largest lattice |xi|, so that
    S_{j_max} is the identity on every grid field. The bank is read-only
    and may be shared across threads.
    """

    def __init__(self, grid, profile=SmoothingProfile.EXP_BUMP):
        self.grid = grid
        self.profile = SmoothingProfile(profile)
        self.j_max = max(0, math.ceil(math.log2(grid.max_wavenumber)))

        k = grid.k_magnitude
        transfer = []
        for j in range(self.j_max + 1):
            t = cutoff_profile(k / 2.0 ** j, self.profile)
            t.setflags(write=False)
            transfer.append(t)
        self.transfer = tuple(transfer)
        logger.debug(f"Built {self.profile.value} filter bank for n={grid.n}, j_max={self.j_max}")

    def __repr__(self):
        return f"DyadicFilterBank(n={self.grid.n}, j_max={self.j_max}, profile={self.profile.value})"

    def _check(self, f):
        if f.grid != self.grid:
            raise ValueError(f"filter bank built for {self.grid}, field lives on {f.grid}")

    def _check_index(self, j, name):
        if isinstance(j, bool) or not isinstance(j, (int, np.integer)) or not 0 <= j <= self.j_max:
            raise ValueError(f"{name} must be an integer in 0..{self.j_max}, got {j}")

    def block_multiplier(self, k):
        """Transfer function of Delta_k."""
        self._check_index(k, "block index")
        if k == 0:
            return self.transfer[0]
        return self.transfer[k] - self.transfer[k - 1]

    def low_pass(self, f, j):
        """S_j f."""
        self._check(f)
        self._check_index(j, "low-pass index")
        return RealField(f.grid, inverse(forward(f.samples) * self.transfer[j]))

    def dyadic_block(self, f, k):
        """Delta_k f."""
        self._check(f)
        return RealField(f.grid, inverse(forward(f.samples) * self.block_multiplier(k)))

    def low_pass_fields(self, f):
        """[S_0 f, ..., S_{j_max} f] from a single forward transform."""
        self._check(f)
        coefficients = forward(f.samples)
        return [RealField(f.grid, inverse(coefficients * t)) for t in self.transfer]

    def block_decomposition(self, f):
        """[Delta_0 f, ..., Delta_{j_max} f] from a single forward transform."""
        self._check(f)
        coefficients = forward(f.samples)
        return [RealField(f.grid, inverse(coefficients * self.block_multiplier(k)))
                for k in range(self.j_max + 1)]

    def lp_reconstruct(self, f):
        """Delta_0 f + sum_{k>=1} Delta_k f, summed in physical space."""
        blocks = self.block_decomposition(f)
        total = np.zeros_like(f.samples)
        for block in blocks:
            total += block.samples
        return RealField(f.grid, total)

    def block_norms(self, f, idx):
        """Weighted block norms 2^{sk} ||Delta_k f||_p, k = 0..j_max.

        Vector fields take the max over components of the per-component norm.
        """
        idx = as_besov_index(idx)
        self._check(f)
        coefficients = forward(f.samples)
        cell = f.grid.cell_volume
        norms = np.empty(self.j_max + 1)
        for k in range(self.j_max + 1):
            block = inverse(coefficients * self.block_multiplier(k))
            per_component = [samples_lp_norm(np.abs(c), idx.p, cell) for c in block]
            norms[k] = 2.0 ** (idx.s * k) * max(per_component)
        return norms

    def besov_norm(self, f, idx):
        """sup_k 2^{sk} ||Delta_k f||_p over the finite block range."""
        return float(np.max(self.block_norms(f, idx)))

    def besov_distance(self, f, g, idx):
        """besov_norm(f - g)."""
        return self.besov_norm(f - g, idx)


@lru_cache(maxsize=16)
def build_filter_bank(grid, smoothing_profile=SmoothingProfile.EXP_BUMP):
    """Build (or fetch the cached) filter bank for a grid.

    Args:
        grid: Grid
        smoothing_profile: SmoothingProfile or its string value

    Returns:
        DyadicFilterBank
    """
    return DyadicFilterBank(grid, SmoothingProfile(smoothing_profile))


def _bank_for(f, bank):
    if bank is None:
        return build_filter_bank(f.grid)
    return bank


def low_pass(f, j, bank=None):
    return _bank_for(f, bank).low_pass(f, j)


def dyadic_block(f, k, bank=None):
    return _bank_for(f, bank).dyadic_block(f, k)


def lp_reconstruct(f, bank=None):
    return _bank_for(f, bank).lp_reconstruct(f)


def besov_norm(f, idx, bank=None):
    return _bank_for(f, bank).besov_norm(f, idx)


def besov_distance(f, g, idx, bank=None):
    if f.grid != g.grid:
        raise ValueError(f"grid mismatch: {f.grid} vs {g.grid}")
    return _bank_for(f, bank).besov_distance(f, g, idx)


def has_low_block_content(f, bank=None, rtol=1e-12):
    """True when Delta_0 f is not negligible relative to f."""
    bank = _bank_for(f, bank)
    low = bank.dyadic_block(f, 0)
    scale = float(np.max(np.abs(f.samples)))
    return float(np.max(np.abs(low.samples))) > rtol * scale


def dilate_dyadic(f, m):
    """Return 2^m f(2^m x), computed by remapping coefficient xi -> 2^m xi.

    Args:
        f: RealField band-limited strictly below n / 2^(m+1) per axis
        m: Nonnegative integer

    Returns:
        RealField on the same grid

    Raises:
        ValueError: m negative or band limit violated
    """
    if isinstance(m, bool) or not isinstance(m, (int, np.integer)) or m < 0:
        raise ValueError(f"dilation exponent must be a nonnegative integer, got {m}")
    if m == 0:
        return f
    grid = f.grid
    cutoff = grid.n / 2 ** (m + 1)
    if cutoff < 1:
        raise ValueError(f"grid n={grid.n} too coarse for dilation by 2^{m}")

    coefficients = forward(f.samples)
    outside = np.abs(coefficients[:, ~grid.band_mask(cutoff)])
    scale = float(np.max(np.abs(coefficients)))
    if outside.size and float(np.max(outside)) > 1e-12 * scale:
        raise ValueError(f"field is not band-limited below |xi_i| < {cutoff:g}; cannot dilate by 2^{m}")

    freq = grid.integer_frequencies
    src = np.nonzero(np.abs(freq) < cutoff)[0]
    dst = (2 ** m * freq[src]).astype(np.int64) % grid.n
    components = np.arange(f.components)
    dilated = np.zeros_like(coefficients)
    dilated[np.ix_(components, dst, dst, dst)] = 2.0 ** m * coefficients[np.ix_(components, src, src, src)]
    return RealField(grid, inverse(dilated))
