"""Discrete fields on the periodic 3-torus and their Fourier coefficients.

Conventions used throughout the package:

* samples have shape (components, n, n, n), axis order (x1, x2, x3), so the
  last axis varies fastest in memory;
* coefficients are normalized so that f(x) = sum_xi F[xi] exp(i xi.x), i.e.
  ``F = fftn(f) / n**3`` (``norm='forward'``);
* the physical wavevector of integer frequency xi is (2 pi / L) xi.
"""

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.fft as sfft

from ns_blowup.config import DEFAULT_BOX_LENGTH, FFT_WORKERS

# Last three axes, so (n, n, n) and (components, n, n, n) arrays both transform
_AXES = (-3, -2, -1)


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid with n points per axis on [0, L)^3."""

    n: int
    box_length: float = DEFAULT_BOX_LENGTH

    def __post_init__(self):
        if isinstance(self.n, bool) or not isinstance(self.n, (int, np.integer)):
            raise ValueError(f"grid size must be an integer, got {self.n!r}")
        if self.n < 8 or self.n & (self.n - 1):
            raise ValueError(f"grid size must be a power of two >= 8, got {self.n}")
        if not (math.isfinite(self.box_length) and self.box_length > 0):
            raise ValueError(f"box_length must be positive and finite, got {self.box_length}")
        object.__setattr__(self, 'n', int(self.n))
        object.__setattr__(self, 'box_length', float(self.box_length))

    @property
    def spacing(self):
        return self.box_length / self.n

    @property
    def volume(self):
        return self.box_length ** 3

    @property
    def cell_volume(self):
        return self.spacing ** 3

    @property
    def max_frequency(self):
        """Largest resolvable integer frequency per axis (n/2)."""
        return self.n // 2

    @property
    def wavenumber_scale(self):
        """Physical wavenumber of integer frequency 1 (2 pi / L)."""
        return 2.0 * math.pi / self.box_length

    @cached_property
    def integer_frequencies(self):
        """Integer frequencies in FFT order: 0, 1, ..., n/2-1, -n/2, ..., -1."""
        return np.fft.fftfreq(self.n, d=1.0 / self.n)

    @cached_property
    def wavevector(self):
        """Physical wavevector components, broadcastable to (n, n, n)."""
        k = self.wavenumber_scale * self.integer_frequencies
        return (k[:, None, None], k[None, :, None], k[None, None, :])

    @cached_property
    def derivative_wavevector(self):
        """Wavevector with the Nyquist frequency zeroed on each axis."""
        freq = self.integer_frequencies
        k = np.where(np.abs(freq) == self.n // 2, 0.0, self.wavenumber_scale * freq)
        return (k[:, None, None], k[None, :, None], k[None, None, :])

    @cached_property
    def k_squared(self):
        k1, k2, k3 = self.wavevector
        return k1 ** 2 + k2 ** 2 + k3 ** 2

    @cached_property
    def k_magnitude(self):
        return np.sqrt(self.k_squared)

    @cached_property
    def max_wavenumber(self):
        """Largest |xi| on the lattice (cube corner)."""
        return self.wavenumber_scale * (self.n / 2) * math.sqrt(3.0)

    @cached_property
    def dealias_mask(self):
        """True where every |xi_i| <= n/3 (2/3 rule)."""
        keep = np.abs(self.integer_frequencies) <= self.n / 3.0
        return keep[:, None, None] & keep[None, :, None] & keep[None, None, :]

    def band_mask(self, cutoff):
        """True where every integer |xi_i| < cutoff."""
        keep = np.abs(self.integer_frequencies) < cutoff
        return keep[:, None, None] & keep[None, :, None] & keep[None, None, :]

    def coordinates(self):
        """Sample coordinates (x1, x2, x3), each of shape (n, n, n)."""
        x = np.arange(self.n) * self.spacing
        return np.meshgrid(x, x, x, indexing='ij')


def forward(samples):
    """Normalized forward transform over the three spatial axes."""
    return sfft.fftn(samples, axes=_AXES, norm='forward', workers=FFT_WORKERS)


def inverse(coefficients):
    """Inverse of ``forward``; returns the real part."""
    return sfft.ifftn(coefficients, axes=_AXES, norm='forward', workers=FFT_WORKERS).real


def _check_components(array, grid, what):
    if array.ndim == 3:
        array = array[np.newaxis]
    if array.ndim != 4 or array.shape[0] not in (1, 3) or array.shape[1:] != (grid.n,) * 3:
        raise ValueError(
            f"{what} must have shape (1 or 3, {grid.n}, {grid.n}, {grid.n}), got {array.shape}"
        )
    return array


@dataclass(frozen=True, eq=False)
class RealField:
    """Sampled scalar (1 component) or vector (3 components) field.

    Samples are copied on construction and made read-only.
    """

    grid: Grid
    samples: np.ndarray
    divergence_free: bool = False

    def __post_init__(self):
        samples = np.array(self.samples, dtype=np.float64, copy=True)
        samples = _check_components(samples, self.grid, "samples")
        if not np.all(np.isfinite(samples)):
            raise ValueError("field samples must be finite")
        samples.setflags(write=False)
        object.__setattr__(self, 'samples', samples)
        if self.divergence_free:
            if self.components != 3:
                raise ValueError("only vector fields can be tagged divergence-free")
            residual = divergence_residual(self)
            if residual > 1e-10:
                raise ValueError(f"field tagged divergence-free has relative divergence {residual:.3e}")

    @property
    def components(self):
        return self.samples.shape[0]

    @property
    def is_vector(self):
        return self.components == 3

    def component(self, index):
        """Scalar field of component ``index`` (0-based)."""
        return RealField(self.grid, self.samples[index])

    @classmethod
    def zeros(cls, grid, components=1):
        return cls(grid, np.zeros((components, grid.n, grid.n, grid.n)))

    @classmethod
    def constant(cls, grid, value, components=1):
        return cls(grid, np.full((components, grid.n, grid.n, grid.n), float(value)))

    @classmethod
    def from_function(cls, grid, function, divergence_free=False):
        """Sample ``function(x1, x2, x3)`` (array or 3-tuple of arrays) on the grid."""
        x1, x2, x3 = grid.coordinates()
        values = function(x1, x2, x3)
        if isinstance(values, (tuple, list)):
            values = np.stack([np.broadcast_to(v, x1.shape) for v in values])
        else:
            values = np.broadcast_to(values, x1.shape)
        return cls(grid, values, divergence_free=divergence_free)

    def _same_grid(self, other):
        if self.grid != other.grid:
            raise ValueError(f"grid mismatch: {self.grid} vs {other.grid}")

    def __add__(self, other):
        self._same_grid(other)
        return RealField(self.grid, self.samples + other.samples)

    def __sub__(self, other):
        self._same_grid(other)
        return RealField(self.grid, self.samples - other.samples)

    def __neg__(self):
        return _preserving(self, -self.samples)

    def __mul__(self, scalar):
        if isinstance(scalar, RealField):
            raise TypeError("use pointwise_product for field-by-field products")
        return _preserving(self, float(scalar) * self.samples)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self * (1.0 / float(scalar))

    def __repr__(self):
        return f"RealField(n={self.grid.n}, components={self.components})"


def divergence_free_field(grid, samples):
    """Vector field that is divergence-free by construction.

    For outputs of the Leray projector and of multipliers that commute with
    it. No residual check: the projection of a pure gradient is roundoff,
    whose divergence relative to its own amplitude is O(1).
    """
    f = RealField(grid, samples)
    if f.components != 3:
        raise ValueError("only vector fields can be tagged divergence-free")
    object.__setattr__(f, 'divergence_free', True)
    return f


def _preserving(f, samples):
    """New field on f's grid that keeps f's divergence-free tag."""
    if f.divergence_free:
        return divergence_free_field(f.grid, samples)
    return RealField(f.grid, samples)


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Fourier coefficients of a field, indexed in FFT order."""

    grid: Grid
    coefficients: np.ndarray

    def __post_init__(self):
        coefficients = np.asarray(self.coefficients, dtype=np.complex128)
        coefficients = _check_components(coefficients, self.grid, "coefficients")
        object.__setattr__(self, 'coefficients', coefficients)

    @property
    def components(self):
        return self.coefficients.shape[0]

    def coefficient(self, xi, component=0):
        """Coefficient at integer wavevector ``xi`` (any sign convention)."""
        n = self.grid.n
        i, j, k = (int(x) % n for x in xi)
        return self.coefficients[component, i, j, k]

    def hermitian_defect(self):
        """max |F(-xi) - conj(F(xi))|; zero for real-valued fields."""
        mirrored = np.roll(np.flip(self.coefficients, axis=_AXES), 1, axis=_AXES)
        return float(np.max(np.abs(mirrored - np.conj(self.coefficients))))

    def __repr__(self):
        return f"SpectralField(n={self.grid.n}, components={self.components})"


def to_spectral(f):
    """Forward transform of a RealField.

    Args:
        f: RealField (finite samples are guaranteed by construction)

    Returns:
        SpectralField with F = fftn(f) / n^3
    """
    return SpectralField(f.grid, forward(f.samples))


def from_spectral(F, divergence_free=False):
    """Inverse transform; the imaginary part (roundoff for real fields) is dropped."""
    return RealField(F.grid, inverse(F.coefficients), divergence_free=divergence_free)


def apply_multiplier(f, multiplier, divergence_free=False):
    """Apply a Fourier multiplier (broadcastable to the coefficient array).

    With ``divergence_free`` the multiplier is a scalar radial one and
    f is tagged divergence-free; the result keeps the tag unchecked.
    """
    samples = inverse(forward(f.samples) * multiplier)
    if divergence_free:
        return divergence_free_field(f.grid, samples)
    return RealField(f.grid, samples)


def derivative(F, axis):
    """Spectral partial derivative along ``axis`` (1, 2 or 3).

    The Nyquist frequency is zeroed so the derivative of a real field is real.
    """
    if axis not in (1, 2, 3):
        raise ValueError(f"axis must be 1, 2 or 3, got {axis}")
    k = F.grid.derivative_wavevector[axis - 1]
    return SpectralField(F.grid, F.coefficients * (1j * k))


def divergence(f):
    """Spectral divergence of a vector field, as a scalar RealField."""
    if f.components != 3:
        raise ValueError("divergence needs a 3-component field")
    coefficients = forward(f.samples)
    k1, k2, k3 = f.grid.derivative_wavevector
    div = 1j * (k1 * coefficients[0] + k2 * coefficients[1] + k3 * coefficients[2])
    return RealField(f.grid, inverse(div[np.newaxis]))


def gradient(f):
    """Spectral gradient of a scalar field, as a vector RealField."""
    if f.components != 1:
        raise ValueError("gradient needs a scalar field")
    coefficients = forward(f.samples)[0]
    grad = np.stack([1j * k * coefficients for k in f.grid.derivative_wavevector])
    return RealField(f.grid, inverse(grad))


def divergence_residual(f):
    """Relative divergence ||div f||_inf / (||f||_inf * k_axis_max)."""
    amplitude = float(np.max(np.abs(f.samples)))
    if amplitude == 0.0:
        return 0.0
    scale = max(1.0, f.grid.wavenumber_scale * f.grid.max_frequency)
    div = divergence(f)
    return float(np.max(np.abs(div.samples))) / (amplitude * scale)


def magnitude(f):
    """Pointwise Euclidean magnitude, shape (n, n, n)."""
    if f.components == 1:
        return np.abs(f.samples[0])
    return np.sqrt(np.sum(f.samples ** 2, axis=0))


def lp_norm(f, p):
    """Rectangle-rule L^p norm over the samples.

    Args:
        f: RealField; vector fields use the pointwise Euclidean magnitude
        p: Exponent in [1, inf]

    Returns:
        float
    """
    return samples_lp_norm(magnitude(f), p, f.grid.cell_volume)


def samples_lp_norm(values, p, cell_volume):
    """L^p norm of nonnegative samples with the given quadrature weight."""
    p = float(p)
    if math.isnan(p) or p < 1:
        raise ValueError(f"L^p norm needs p >= 1, got {p}")
    peak = float(np.max(values))
    if math.isinf(p) or peak == 0.0:
        return peak
    scaled = np.sum((values / peak) ** p) * cell_volume
    return peak * float(scaled) ** (1.0 / p)


def inner_product(f, g):
    """L^2 inner product (rectangle rule), summed over components."""
    f._same_grid(g)
    return float(np.sum(f.samples * g.samples) * f.grid.cell_volume)


def dealias_field(f):
    """Zero every frequency with some |xi_i| > n/3."""
    coefficients = forward(f.samples)
    coefficients[:, ~f.grid.dealias_mask] = 0.0
    return RealField(f.grid, inverse(coefficients))


def pointwise_product(f, g, dealias=False):
    """Sample-wise product of two fields on the same grid.

    A scalar times a vector broadcasts; two vectors multiply componentwise.

    Args:
        f: RealField
        g: RealField
        dealias: Zero frequencies above n/3 after the product (2/3 rule)

    Returns:
        RealField
    """
    f._same_grid(g)
    if f.components != g.components and 1 not in (f.components, g.components):
        raise ValueError(f"cannot multiply fields with {f.components} and {g.components} components")
    product = RealField(f.grid, f.samples * g.samples)
    return dealias_field(product) if dealias else product


def resample(f, grid):
    """Spectral resampling of ``f`` onto another grid with the same box.

    Frequencies resolvable on both grids (|xi_i| below both Nyquist limits)
    are copied; everything else is dropped (truncation) or zero (padding).
    """
    if grid.box_length != f.grid.box_length:
        raise ValueError("resample needs grids with the same box_length")
    if grid == f.grid:
        return f
    limit = min(grid.n, f.grid.n) // 2
    freq = np.arange(-limit + 1, limit)
    src = freq % f.grid.n
    dst = freq % grid.n
    components = np.arange(f.components)
    source = forward(f.samples)
    target = np.zeros((f.components, grid.n, grid.n, grid.n), dtype=np.complex128)
    target[np.ix_(components, dst, dst, dst)] = source[np.ix_(components, src, src, src)]
    return RealField(grid, inverse(target))
