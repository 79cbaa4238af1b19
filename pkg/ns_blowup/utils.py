"""Utility functions for NS Blowup."""

import hashlib
import logging
from pathlib import Path

import numpy as np

logger = logging.getLogger('ns_blowup.utils')

# Manifest digests prefer xxh128
try:
    import xxhash
    HAS_XXHASH = True
except ImportError:
    HAS_XXHASH = False
    logger.debug("xxhash not importable, manifest digests fall back to SHA-256")


def get_file_hash(file_path, algorithm='auto', chunk_size=65536):
    """Hex digest of a manifest entry, or None if the file is absent.

    'auto' picks xxh128 when xxhash imports and SHA-256 otherwise.
    """
    path = Path(file_path)
    if not path.is_file():
        return None

    if algorithm == 'auto':
        algorithm = 'xxh128' if HAS_XXHASH else 'sha256'
    if algorithm == 'sha256':
        hasher = hashlib.sha256()
    elif algorithm == 'xxh128' and HAS_XXHASH:
        hasher = xxhash.xxh128()
    else:
        raise ValueError(f"Unsupported hash algorithm: {algorithm}")

    with path.open('rb') as stream:
        while chunk := stream.read(chunk_size):
            hasher.update(chunk)
    return hasher.hexdigest()


def fit_power_law(xs, ys):
    """Least-squares fit of log(y) = slope * log(x) + intercept.

    Args:
        xs: Positive abscissae
        ys: Positive ordinates

    Returns:
        tuple: (slope, prefactor) with prefactor = exp(intercept)
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.shape != ys.shape or xs.size < 2:
        raise ValueError("fit_power_law needs two equally long series of at least 2 points")
    if np.any(xs <= 0) or np.any(ys <= 0):
        raise ValueError("fit_power_law needs strictly positive data")
    slope, intercept = np.polyfit(np.log(xs), np.log(ys), 1)
    return float(slope), float(np.exp(intercept))


def format_float(value, spec='.17g'):
    """Format a float for CSV output (round-trippable by default)."""
    return format(float(value), spec)
