"""Bony paraproducts pi0, pi1, the decomposition remainder and the boundedness harness.

pi0(f, g) = sum_k S_k f . Delta_k g
pi1(f, g) = sum_k S_{k+1} f . Delta_k g   (S_{j_max+1} clamped to S_{j_max})

All sums are dealiased once at the end; the dealias projection is linear,
so this equals the sum of dealiased products.
"""

import logging
import math
from enum import Enum

from ns_blowup.analysis.littlewood_paley import BesovIndex, build_filter_bank
from ns_blowup.analysis.random_fields import max_over_samples, random_dyadic_field
from ns_blowup.analysis.spectral import RealField, dealias_field, lp_norm, pointwise_product

logger = logging.getLogger('ns_blowup.analysis.paraproduct')


class Paraproduct(str, Enum):
    PI0 = 'pi0'
    PI1 = 'pi1'


class BoundVariant(str, Enum):
    """Input space of the first factor in the boundedness estimate."""

    BESOV_IN = 'besov_in'  # B^{-1,inf} x B^{s+1,inf} -> B^{s,inf}
    LINF_IN = 'linf_in'    # L^inf x B^{s+1,inf} -> B^{s+1,inf}


def _setup(f, g, bank):
    if f.grid != g.grid:
        raise ValueError(f"grid mismatch: {f.grid} vs {g.grid}")
    return bank if bank is not None else build_filter_bank(f.grid)


def _shifted_sum(low_fields, blocks, shift, start=0):
    """sum_{k>=start} low_fields[clamp(k + shift)] * blocks[k], dealiased."""
    top = len(low_fields) - 1
    total = None
    for k in range(start, len(blocks)):
        j = min(max(k + shift, 0), top)
        term = low_fields[j].samples * blocks[k].samples
        total = term if total is None else total + term
    grid = blocks[0].grid
    if total is None:
        components = max(low_fields[0].components, blocks[0].components)
        return RealField.zeros(grid, components)
    return dealias_field(RealField(grid, total))


def pi0(f, g, bank=None):
    """pi0(f, g) = sum_{k=0..j_max} S_k f . Delta_k g."""
    bank = _setup(f, g, bank)
    return _shifted_sum(bank.low_pass_fields(f), bank.block_decomposition(g), shift=0)


def pi1(f, g, bank=None):
    """pi1(f, g) = sum_{k=0..j_max} S_{k+1} f . Delta_k g."""
    bank = _setup(f, g, bank)
    return _shifted_sum(bank.low_pass_fields(f), bank.block_decomposition(g), shift=1)


def exact_bony_high(a, b, bank=None):
    """sum_{k=1..j_max} S_{k-1} a . Delta_k b.

    Exact complement of pi0: f g = pi0(f, g) + exact_bony_high(g, f).
    """
    bank = _setup(a, b, bank)
    return _shifted_sum(bank.low_pass_fields(a), bank.block_decomposition(b), shift=-1, start=1)


def bony_remainder(f, g, bank=None):
    """f g - pi0(f, g) - pi1(g, f), dealiased throughout.

    Equals -sum_k Delta_k f (Delta_k g + Delta_{k+1} g): the formal identity
    counts the diagonal block pairs twice.
    """
    bank = _setup(f, g, bank)
    product = pointwise_product(f, g, dealias=True)
    return product - pi0(f, g, bank) - pi1(g, f, bank)


def bony_pair_sum(f, g, pairs, bank=None):
    """Brute-force sum of dealiased Delta_j f . Delta_k g over (j, k) pairs."""
    bank = _setup(f, g, bank)
    f_blocks = bank.block_decomposition(f)
    g_blocks = bank.block_decomposition(g)
    total = None
    for j, k in pairs:
        term = pointwise_product(f_blocks[j], g_blocks[k], dealias=True)
        total = term if total is None else total + term
    if total is None:
        return RealField.zeros(f.grid, max(f.components, g.components))
    return total


def diagonal_pairs(bank):
    """Block pairs (k, k) and (k, k+1) double-counted by the formal identity."""
    pairs = [(k, k) for k in range(bank.j_max + 1)]
    pairs += [(k, k + 1) for k in range(bank.j_max)]
    return pairs


def apply_paraproduct(which, f, g, bank=None):
    which = Paraproduct(which)
    return pi0(f, g, bank) if which is Paraproduct.PI0 else pi1(f, g, bank)


def lemma1_ratio(which, variant, s, f, g, bank=None):
    """Ratio of output norm to input norms for one pair.

    Returns:
        float, or None when a denominator vanishes (pair skipped)
    """
    variant = BoundVariant(variant)
    bank = _setup(f, g, bank)
    g_norm = bank.besov_norm(g, BesovIndex(s + 1, math.inf))
    if variant is BoundVariant.BESOV_IN:
        f_norm = bank.besov_norm(f, BesovIndex(-1.0, math.inf))
        out_index = BesovIndex(s, math.inf)
    else:
        f_norm = lp_norm(f, math.inf)
        out_index = BesovIndex(s + 1, math.inf)
    if f_norm == 0.0 or g_norm == 0.0:
        return None
    return bank.besov_norm(apply_paraproduct(which, f, g, bank), out_index) / (f_norm * g_norm)


def estimate_lemma1_constant(which, variant, s, samples, grid, seed):
    """Empirical lower bound for the paraproduct operator norm.

    Random pairs: f flat in the input space of ``variant`` (block sup-norms
    2^k for B^{-1,inf}, 1 for L^inf), g flat in B^{s+1,inf}. Pairs run on a
    thread pool and are reduced by max; results are deterministic in seed.

    Args:
        which: 'pi0' or 'pi1'
        variant: 'besov_in' or 'linf_in'
        s: Regularity, must be > 0
        samples: Number of random pairs (>= 1)
        grid: Grid
        seed: Integer seed

    Returns:
        float: max ratio over the valid pairs (0.0 if all were skipped)
    """
    which = Paraproduct(which)
    variant = BoundVariant(variant)
    if not s > 0:
        raise ValueError(f"paraproduct bounds require s > 0, got {s}")

    bank = build_filter_bank(grid)
    if variant is BoundVariant.BESOV_IN:
        def f_weights(k):
            return 2.0 ** k
    else:
        def f_weights(k):
            return 1.0

    def g_weights(k):
        return 2.0 ** (-(s + 1) * k)

    def one_pair(rng):
        f = random_dyadic_field(grid, rng, f_weights, bank)
        g = random_dyadic_field(grid, rng, g_weights, bank)
        return lemma1_ratio(which, variant, s, f, g, bank)

    estimate, valid = max_over_samples(one_pair, samples, seed, name="lemma1")
    if estimate is None:
        logger.warning(f"All {samples} sample pairs were skipped for {which.value}/{variant.value}")
        return 0.0
    logger.debug(f"Paraproduct bound {which.value}/{variant.value} s={s} n={grid.n}: {estimate:.6g} over {valid} pairs")
    return estimate
