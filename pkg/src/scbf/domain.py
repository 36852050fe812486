"""Periodic-box discretization: grids, wavevectors, dealias mask.

The computational domain is a periodic box [0, L)^d with mean-zero
velocity fields, which stands in for a Poincare domain: the smallest
retained nonzero |k|^2 plays the role of the Poincare constant, and the
Stokes operator is diagonal in the Fourier basis.
"""

from dataclasses import dataclass, field

import numpy as np


class ConfigurationError(ValueError):
    """Raised when grid sizes, shapes or parameters are inconsistent."""


def _integer_frequencies(n: int) -> np.ndarray:
    # fftfreq order: 0, 1, ..., n/2-1, -n/2, ..., -1
    return np.rint(np.fft.fftfreq(n, d=1.0 / n)).astype(np.int64)


@dataclass(frozen=True)
class DomainSpec:
    """Discretized periodic box shared by all fields of a run.

    Attributes
    ----------
    dim : 2 or 3
    grid_n : points per axis (power of two)
    box_len : side length L of the box (same in every direction)
    """

    dim: int
    grid_n: int
    box_len: float = 2.0 * np.pi
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise ConfigurationError(f"dim must be 2 or 3, got {self.dim}")
        n = self.grid_n
        if n < 4 or (n & (n - 1)) != 0:
            raise ConfigurationError(f"grid_n must be a power of two >= 4, got {n}")
        if not self.box_len > 0:
            raise ConfigurationError(f"box_len must be positive, got {self.box_len}")

    # -- geometry ---------------------------------------------------------

    @property
    def shape(self) -> tuple:
        return (self.grid_n,) * self.dim

    @property
    def field_shape(self) -> tuple:
        """Shape of one velocity field: (components, grid...)."""
        return (self.dim,) + self.shape

    @property
    def n_points(self) -> int:
        return self.grid_n**self.dim

    @property
    def volume(self) -> float:
        return self.box_len**self.dim

    @property
    def cell_volume(self) -> float:
        """Quadrature weight of the uniform grid (trapezoid on a torus)."""
        return self.volume / self.n_points

    # -- spectral tables (built once, cached) ------------------------------

    def _table(self, name, builder):
        if name not in self._cache:
            self._cache[name] = builder()
        return self._cache[name]

    @property
    def freq(self) -> np.ndarray:
        """Integer frequency lattice, shape (dim, grid...)."""

        def build():
            axes = [_integer_frequencies(self.grid_n) for _ in range(self.dim)]
            mesh = np.meshgrid(*axes, indexing="ij")
            out = np.stack(mesh)
            out.setflags(write=False)
            return out

        return self._table("freq", build)

    @property
    def wavevectors(self) -> np.ndarray:
        """Physical wavevectors k = (2*pi/L) * freq, shape (dim, grid...)."""

        def build():
            out = (2.0 * np.pi / self.box_len) * self.freq.astype(np.float64)
            out.setflags(write=False)
            return out

        return self._table("wavevectors", build)

    @property
    def k_sq(self) -> np.ndarray:
        """|k|^2 per mode."""

        def build():
            out = np.sum(self.wavevectors**2, axis=0)
            out.setflags(write=False)
            return out

        return self._table("k_sq", build)

    @property
    def dealias_mask(self) -> np.ndarray:
        """Two-thirds-rule mask: True where every |freq_i| <= grid_n/3.

        The Nyquist frequency is always excluded, so the retained mode set
        is closed under negation.
        """

        def build():
            cutoff = self.grid_n / 3.0
            mask = np.ones(self.shape, dtype=bool)
            for f in self.freq:
                mask &= np.abs(f) <= cutoff
            mask.setflags(write=False)
            return mask

        return self._table("dealias_mask", build)

    @property
    def active_mask(self) -> np.ndarray:
        """Retained modes: dealiased and mean-zero (k=0 dropped)."""

        def build():
            mask = self.dealias_mask & (self.k_sq > 0)
            mask.setflags(write=False)
            return mask

        return self._table("active_mask", build)

    @property
    def lambda1(self) -> float:
        """Smallest retained nonzero |k|^2 (discrete Poincare constant)."""
        return float(self.k_sq[self.active_mask].min())

    # -- mirror bookkeeping -------------------------------------------------

    @property
    def mirror_index(self) -> tuple:
        """Per-axis index arrays mapping each mode to its negation -k."""

        def build():
            n = self.grid_n
            rev = (-np.arange(n)) % n
            return tuple(rev for _ in range(self.dim))

        return self._table("mirror_index", build)

    def conj_mirror(self, coeffs: np.ndarray) -> np.ndarray:
        """Return the array c(-k) conjugated, i.e. the Hermitian transpose
        of a coefficient cube (component axes untouched)."""
        out = coeffs
        for axis_offset, rev in enumerate(self.mirror_index):
            out = np.take(out, rev, axis=out.ndim - self.dim + axis_offset)
        return np.conj(out)

    @property
    def canonical_mask(self) -> np.ndarray:
        """One representative per {k, -k} pair of the active modes.

        A mode is canonical when its first nonzero integer frequency is
        positive (lexicographic rule).
        """

        def build():
            freq = self.freq
            canon = np.zeros(self.shape, dtype=bool)
            undecided = np.ones(self.shape, dtype=bool)
            for f in freq:
                canon |= undecided & (f > 0)
                undecided &= f == 0
            canon &= self.active_mask
            canon.setflags(write=False)
            return canon

        return self._table("canonical_mask", build)

    @property
    def canonical_indices(self) -> np.ndarray:
        """Flat indices of canonical modes, in C order."""

        def build():
            out = np.flatnonzero(self.canonical_mask.ravel())
            out.setflags(write=False)
            return out

        return self._table("canonical_indices", build)

    @property
    def mirror_of_canonical(self) -> np.ndarray:
        """Flat indices of the -k partners of the canonical modes."""

        def build():
            n = self.grid_n
            unravel = np.unravel_index(self.canonical_indices, self.shape)
            mirrored = tuple((-ax) % n for ax in unravel)
            out = np.ravel_multi_index(mirrored, self.shape)
            out.setflags(write=False)
            return out

        return self._table("mirror_of_canonical", build)

    # -- grid ---------------------------------------------------------------

    @property
    def grid(self) -> np.ndarray:
        """Collocation points, shape (dim, grid...)."""

        def build():
            x = np.linspace(0.0, self.box_len, self.grid_n, endpoint=False)
            out = np.stack(np.meshgrid(*([x] * self.dim), indexing="ij"))
            out.setflags(write=False)
            return out

        return self._table("grid", build)

    def describe(self) -> dict:
        return {
            "dim": self.dim,
            "grid_n": self.grid_n,
            "box_len": self.box_len,
            "lambda1": self.lambda1,
            "n_active_modes": int(self.active_mask.sum()),
        }
