"""Shared fixtures for the NS Blowup test suite."""

import numpy as np
import pytest

from ns_blowup.analysis.littlewood_paley import build_filter_bank
from ns_blowup.analysis.random_fields import random_smooth_field
from ns_blowup.analysis.spectral import Grid, RealField
from ns_blowup.presets import taylor_green


@pytest.fixture
def grid8():
    return Grid(8)


@pytest.fixture
def grid16():
    return Grid(16)


@pytest.fixture
def grid32():
    return Grid(32)


@pytest.fixture
def bank16(grid16):
    return build_filter_bank(grid16)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def sine16(grid16):
    """sin(x1) on the 16^3 grid."""
    return RealField.from_function(grid16, lambda x1, x2, x3: np.sin(x1))


@pytest.fixture
def taylor_green16(grid16):
    return taylor_green(grid16)


def bandlimited(grid, rng, components=1):
    """Zero-mean random field with every |xi_i| <= n/3."""
    return random_smooth_field(grid, rng, slope=0.0, components=components)


def sup_gap(a, b):
    return float(np.max(np.abs(a.samples - b.samples)))
