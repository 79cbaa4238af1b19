"""Named initial conditions.

taylor-green            (cos y1 sin y2, -sin y1 cos y2, 0)
single-mode(k)          (0, sin(k y1), 0), a steady shear decaying like exp(-k^2 t)
abc                     (sin y3 + cos y2, sin y1 + cos y3, sin y2 + cos y1)
random-smooth(seed, slope)
                        Leray-projected random field, coefficient envelope |xi|^slope
zero                    u = 0

with y = 2 pi x / L, each scaled to sup-norm ``amplitude``. For the
divergence-free analytic presets the convective term is a pure gradient,
so their mild solution is the heat flow.
"""

import logging
import math
import re

import numpy as np

from ns_blowup.analysis.heat_leray import kato_quantity, leray_project
from ns_blowup.analysis.random_fields import random_smooth_field
from ns_blowup.analysis.spectral import RealField, lp_norm

logger = logging.getLogger('ns_blowup.presets')

PRESET_NAMES = ('taylor-green', 'single-mode', 'abc', 'random-smooth', 'zero')
_CONDITION = re.compile(r'^\s*([a-z-]+)\s*(?:\((.*)\))?\s*$')


def parse_condition(text):
    """Split 'name(arg, ...)' into the name and a list of float arguments.

    Raises:
        ValueError: unknown name or unparsable arguments
    """
    match = _CONDITION.match(text)
    if not match:
        raise ValueError(f"cannot parse initial condition {text!r}")
    name, raw_args = match.group(1), match.group(2)
    if name not in PRESET_NAMES:
        raise ValueError(f"unknown initial condition '{name}' (choose from {', '.join(PRESET_NAMES)})")
    args = []
    if raw_args and raw_args.strip():
        try:
            args = [float(a) for a in raw_args.split(',')]
        except ValueError:
            raise ValueError(f"initial condition arguments must be numbers: {text!r}")
    return name, args


def _scaled_coordinates(grid):
    factor = 2.0 * math.pi / grid.box_length
    return [factor * x for x in grid.coordinates()]


def _normalize(samples, amplitude):
    peak = float(np.max(np.sqrt(np.sum(samples ** 2, axis=0))))
    if peak == 0.0:
        return samples
    return samples * (amplitude / peak)


def taylor_green(grid, amplitude=1.0):
    y1, y2, _ = _scaled_coordinates(grid)
    samples = np.stack([np.cos(y1) * np.sin(y2), -np.sin(y1) * np.cos(y2), np.zeros_like(y1)])
    return RealField(grid, amplitude * samples, divergence_free=True)


def single_mode(grid, k=1, amplitude=1.0):
    k = int(k)
    if not 1 <= k < grid.n // 2:
        raise ValueError(f"single-mode wavenumber must be in 1..{grid.n // 2 - 1}, got {k}")
    y1, _, _ = _scaled_coordinates(grid)
    zeros = np.zeros_like(y1)
    samples = np.stack([zeros, np.sin(k * y1), zeros])
    return RealField(grid, amplitude * samples, divergence_free=True)


def abc_flow(grid, amplitude=1.0):
    y1, y2, y3 = _scaled_coordinates(grid)
    samples = np.stack([np.sin(y3) + np.cos(y2), np.sin(y1) + np.cos(y3), np.sin(y2) + np.cos(y1)])
    return RealField(grid, _normalize(samples, amplitude), divergence_free=True)


def random_smooth(grid, seed, slope=-2.0, amplitude=1.0):
    rng = np.random.default_rng(int(seed))
    projected = leray_project(random_smooth_field(grid, rng, slope=slope))
    return RealField(grid, _normalize(projected.samples, amplitude), divergence_free=True)


def small_random_field(grid, seed, kato_bound, slope=-2.0):
    """random-smooth field scaled so that kato_quantity(u, 1) <= kato_bound.

    The Kato quantity of c u is at most c times that of u for c <= 1.
    """
    field = random_smooth(grid, seed, slope)
    quantity = kato_quantity(field, 1.0)
    if quantity <= kato_bound:
        return field
    return RealField(grid, field.samples * (kato_bound / quantity), divergence_free=True)


def make_preset(text, grid, amplitude=1.0, seed=0):
    """Build a named initial condition.

    Args:
        text: Condition, e.g. 'taylor-green', 'single-mode(2)', 'random-smooth(7, -2.5)'
        grid: Grid
        amplitude: Sup-norm of the result
        seed: Default seed of random-smooth when none is given in ``text``

    Returns:
        RealField tagged divergence-free
    """
    name, args = parse_condition(text)
    if name == 'taylor-green':
        field = taylor_green(grid, amplitude)
    elif name == 'single-mode':
        field = single_mode(grid, args[0] if args else 1, amplitude)
    elif name == 'abc':
        field = abc_flow(grid, amplitude)
    elif name == 'random-smooth':
        field_seed = args[0] if args else seed
        slope = args[1] if len(args) > 1 else -2.0
        field = random_smooth(grid, field_seed, slope, amplitude)
    else:
        field = RealField.zeros(grid, 3)
    logger.debug(f"Initial condition {text}: ||u0||_inf = {lp_norm(field, math.inf):.6g}")
    return field
