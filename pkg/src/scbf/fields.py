"""Divergence-free, mean-zero velocity fields in Fourier coefficients.

Coefficient convention: a field u(x) = sum_k uhat(k) exp(i k.x), stored
as a complex array of shape (dim, grid_n, ..., grid_n) in numpy fftfreq
mode ordering.  Real fields satisfy uhat(-k) = conj(uhat(k)).
"""

import numpy as np
from scipy import fft as _fft

from .domain import ConfigurationError, DomainSpec


class SpectralField:
    """Velocity field stored as Fourier coefficients on a DomainSpec.

    Fields produced by the factory methods and operators are Hermitian
    symmetric, mean-zero and divergence-free; `coeffs` is owned by the
    instance and treated as immutable.
    """

    __slots__ = ("domain", "coeffs")

    def __init__(self, domain: DomainSpec, coeffs: np.ndarray):
        if coeffs.shape != domain.field_shape:
            raise ConfigurationError(
                f"coefficient shape {coeffs.shape} does not match domain "
                f"{domain.field_shape}"
            )
        self.domain = domain
        self.coeffs = np.ascontiguousarray(coeffs, dtype=np.complex128)

    # -- constructors -------------------------------------------------------

    @classmethod
    def zero(cls, domain: DomainSpec) -> "SpectralField":
        return cls(domain, np.zeros(domain.field_shape, dtype=np.complex128))

    @classmethod
    def from_grid(cls, domain: DomainSpec, values: np.ndarray) -> "SpectralField":
        """Transform physical-space samples (dim, grid...) to coefficients."""
        values = np.asarray(values, dtype=np.float64)
        if values.shape != domain.field_shape:
            raise ConfigurationError(
                f"grid shape {values.shape} does not match domain "
                f"{domain.field_shape}"
            )
        return cls(domain, from_grid(domain, values))

    @classmethod
    def from_modes(cls, domain: DomainSpec, modes: dict) -> "SpectralField":
        """Build a field from {(freq tuple): coefficient vector} entries.

        The Hermitian partner of every entry is filled in automatically,
        so callers list each +k once.
        """
        coeffs = np.zeros(domain.field_shape, dtype=np.complex128)
        n = domain.grid_n
        for freq, amp in modes.items():
            if len(freq) != domain.dim:
                raise ConfigurationError(f"mode {freq} has wrong dimension")
            amp = np.asarray(amp, dtype=np.complex128)
            if amp.shape != (domain.dim,):
                raise ConfigurationError(f"amplitude for mode {freq} has wrong shape")
            idx = tuple(f % n for f in freq)
            mirror = tuple((-f) % n for f in freq)
            coeffs[(slice(None),) + idx] += amp
            if mirror != idx:
                coeffs[(slice(None),) + mirror] += np.conj(amp)
        return cls(domain, coeffs)

    # -- representation changes ----------------------------------------------

    def to_grid(self) -> np.ndarray:
        """Physical-space samples, shape (dim, grid...), real."""
        return to_grid(self.domain, self.coeffs)

    def copy(self) -> "SpectralField":
        return SpectralField(self.domain, self.coeffs.copy())

    # -- algebra --------------------------------------------------------------

    def _check_same_domain(self, other: "SpectralField"):
        if other.domain is not self.domain and other.domain != self.domain:
            raise ConfigurationError("fields live on different domains")

    def __add__(self, other: "SpectralField") -> "SpectralField":
        self._check_same_domain(other)
        return SpectralField(self.domain, self.coeffs + other.coeffs)

    def __sub__(self, other: "SpectralField") -> "SpectralField":
        self._check_same_domain(other)
        return SpectralField(self.domain, self.coeffs - other.coeffs)

    def __mul__(self, scalar: float) -> "SpectralField":
        return SpectralField(self.domain, self.coeffs * scalar)

    __rmul__ = __mul__

    def __neg__(self) -> "SpectralField":
        return SpectralField(self.domain, -self.coeffs)

    # -- diagnostics ------------------------------------------------------------

    def max_divergence(self) -> float:
        """max_k |k . uhat(k)| over all modes."""
        k = self.domain.wavevectors
        return float(np.abs(np.sum(k * self.coeffs, axis=0)).max())

    def hermitian_defect(self) -> float:
        """max |uhat(-k) - conj(uhat(k))|."""
        return float(np.abs(self.domain.conj_mirror(self.coeffs) - self.coeffs).max())

    def mean_mode(self) -> float:
        zero = (slice(None),) + (0,) * self.domain.dim
        return float(np.abs(self.coeffs[zero]).max())


# -- transforms ----------------------------------------------------------------


def from_grid(domain: DomainSpec, values: np.ndarray) -> np.ndarray:
    """Forward transform; returns raw coefficients (no projection)."""
    if values.shape != domain.field_shape:
        raise ConfigurationError(
            f"grid shape {values.shape} does not match domain {domain.field_shape}"
        )
    axes = tuple(range(1, domain.dim + 1))
    return _fft.fftn(values, axes=axes) / domain.n_points


def to_grid(domain: DomainSpec, coeffs: np.ndarray) -> np.ndarray:
    """Inverse transform to collocation values; imaginary residual dropped.

    For Hermitian-symmetric coefficients the residual is at rounding level;
    `grid_imag_residual` measures it when that needs checking.
    """
    if coeffs.shape != domain.field_shape:
        raise ConfigurationError(
            f"coefficient shape {coeffs.shape} does not match domain "
            f"{domain.field_shape}"
        )
    axes = tuple(range(1, domain.dim + 1))
    return _fft.ifftn(coeffs * domain.n_points, axes=axes).real


def grid_imag_residual(domain: DomainSpec, coeffs: np.ndarray) -> float:
    """Max imaginary part of the inverse transform, relative to field scale."""
    axes = tuple(range(1, domain.dim + 1))
    values = _fft.ifftn(coeffs * domain.n_points, axes=axes)
    scale = np.abs(values).max()
    if scale == 0.0:
        return 0.0
    return float(np.abs(values.imag).max() / scale)


# -- projections -----------------------------------------------------------------


def leray_project(domain: DomainSpec, coeffs: np.ndarray) -> np.ndarray:
    """Remove the k-parallel part per mode: uhat -> uhat - k (k.uhat)/|k|^2."""
    k = domain.wavevectors
    ksq = domain.k_sq
    kdotu = np.sum(k * coeffs, axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        factor = np.where(ksq > 0, kdotu / np.where(ksq > 0, ksq, 1.0), 0.0)
    return coeffs - k * factor[np.newaxis]


def dealias(domain: DomainSpec, coeffs: np.ndarray) -> np.ndarray:
    return coeffs * domain.dealias_mask


def make_solenoidal(domain: DomainSpec, coeffs: np.ndarray) -> SpectralField:
    """Mean-zero + dealias + Leray projection + Hermitian symmetrization."""
    out = coeffs.copy()
    out[(slice(None),) + (0,) * domain.dim] = 0.0
    out = dealias(domain, out)
    out = 0.5 * (out + domain.conj_mirror(out))
    out = leray_project(domain, out)
    return SpectralField(domain, out)


# -- random fields -----------------------------------------------------------------


def random_field(
    domain: DomainSpec,
    seed: int,
    amplitude: float = 1.0,
    decay: float = 2.0,
) -> SpectralField:
    """Reproducible random divergence-free field.

    Gaussian coefficients with power-law envelope |k|^(-decay), Hermitian
    symmetrized, projected and dealiased.  This is the documented sampler
    behind every randomized sweep: a sweep is replayed exactly from its
    seed list.
    """
    rng = np.random.Generator(np.random.Philox(key=np.uint64(seed)))
    shape = domain.field_shape
    raw = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    with np.errstate(divide="ignore"):
        envelope = np.where(domain.k_sq > 0, domain.k_sq ** (-decay / 2.0), 0.0)
    field = make_solenoidal(domain, raw * envelope[np.newaxis])
    if amplitude != 1.0:
        field = field * amplitude
    return field


def shear_field(domain: DomainSpec, amplitude: float = 1.0) -> SpectralField:
    """Unidirectional shear u = (amplitude * sin(2*pi*y/L), 0, ...).

    Its self-advection (u.grad)u vanishes identically, which makes it the
    closed-form test case for the solver.
    """
    # sin(q y) = (e^{iqy} - e^{-iqy}) / 2i carried by the x-component
    amp = np.zeros(domain.dim, dtype=np.complex128)
    amp[0] = amplitude / 2.0j
    freq = tuple([0, 1] + [0] * (domain.dim - 2))
    return SpectralField.from_modes(domain, {freq: amp})


def taylor_green_field(domain: DomainSpec, amplitude: float = 1.0) -> SpectralField:
    """Taylor-Green vortex (sin x cos y, -cos x sin y) padded to dim."""
    a = amplitude

    # sin x cos y = (e^{i(x+y)} - e^{-i(x+y)} + e^{i(x-y)} - e^{-i(x-y)}) / 4i
    def vec(vx, vy):
        out = np.zeros(domain.dim, dtype=np.complex128)
        out[0] = vx
        out[1] = vy
        return out

    tail = (0,) * (domain.dim - 2)
    modes = {
        (1, 1) + tail: vec(a / 4.0j, -a / 4.0j),
        (1, -1) + tail: vec(a / 4.0j, a / 4.0j),
    }
    field = SpectralField.from_modes(domain, modes)
    # Projection keeps it intact (div-free by construction) but guards rounding.
    return make_solenoidal(domain, field.coeffs)
