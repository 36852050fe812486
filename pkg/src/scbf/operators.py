"""Spectral realizations of the Stokes, advection and damping operators.

All nonlinear products are formed pseudo-spectrally on the collocation
grid and dealiased with the two-thirds rule before re-entering
coefficient space, so the skew-symmetry of the advection form and the
sign identities of the damping term hold to rounding for dealiased
fields.  Lebesgue norms are grid quadrature (exact for band-limited
integrands on the uniform periodic grid).
"""

import numpy as np
from scipy import fft as _fft

from .domain import ConfigurationError, DomainSpec
from .fields import SpectralField, dealias, leray_project, to_grid

# -- inner products and norms ---------------------------------------------------


def inner_h(u: SpectralField, v: SpectralField) -> float:
    """L^2 inner product (u, v)."""
    u._check_same_domain(v)
    return float(
        u.domain.volume * np.sum(u.coeffs * np.conj(v.coeffs)).real
    )


def norm_h(u: SpectralField) -> float:
    return float(np.sqrt(u.domain.volume * np.sum(np.abs(u.coeffs) ** 2)))


def norm_v(u: SpectralField) -> float:
    """Gradient (Dirichlet) norm ||grad u||_{L^2}."""
    ksq = u.domain.k_sq
    return float(
        np.sqrt(u.domain.volume * np.sum(ksq * np.sum(np.abs(u.coeffs) ** 2, axis=0)))
    )


def norm_v_dual(u: SpectralField) -> float:
    """Dual norm: sqrt(sum |uhat(k)|^2 / |k|^2), the V' norm of a mean-zero
    functional in the spectral Gelfand triple."""
    ksq = u.domain.k_sq
    mag = np.sum(np.abs(u.coeffs) ** 2, axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        weighted = np.where(ksq > 0, mag / np.where(ksq > 0, ksq, 1.0), 0.0)
    return float(np.sqrt(u.domain.volume * np.sum(weighted)))


def norm_lp(u: SpectralField, p: float) -> float:
    """Lebesgue norm ||u||_{L^p} by grid quadrature, p in [1, inf)."""
    if p < 1:
        raise ConfigurationError(f"Lebesgue exponent must be >= 1, got {p}")
    speed = pointwise_magnitude(u)
    return float((u.domain.cell_volume * np.sum(speed**p)) ** (1.0 / p))


def pointwise_magnitude(u: SpectralField) -> np.ndarray:
    """|u(x)| on the grid."""
    values = u.to_grid()
    return np.sqrt(np.sum(values**2, axis=0))


def norms(u: SpectralField, lp_exponents=()) -> dict:
    """Bundle of H, V, V' and requested Lebesgue norms."""
    out = {
        "H": norm_h(u),
        "V": norm_v(u),
        "V_dual": norm_v_dual(u),
        "Lp": {p: norm_lp(u, p) for p in lp_exponents},
    }
    return out


# -- linear operators ---------------------------------------------------------------


def stokes_apply(u: SpectralField) -> SpectralField:
    """A u: multiply each mode by |k|^2 (minus projected Laplacian)."""
    return SpectralField(u.domain, u.coeffs * u.domain.k_sq[np.newaxis])


def project(domain: DomainSpec, raw_coeffs: np.ndarray) -> SpectralField:
    """Leray projection of raw coefficients (mean mode zeroed)."""
    out = raw_coeffs.copy()
    out[(slice(None),) + (0,) * domain.dim] = 0.0
    return SpectralField(domain, leray_project(domain, out))


# -- advection -----------------------------------------------------------------------


def _advection_grid(u: SpectralField, v: SpectralField) -> np.ndarray:
    """(u . grad) v evaluated on the grid, shape (dim, grid...)."""
    dom = u.domain
    k = dom.wavevectors
    u_grid = u.to_grid()
    out = np.zeros(dom.field_shape)
    for i in range(dom.dim):
        # d v / d x_i for all components at once
        dv_i = to_grid(dom, 1j * k[i][np.newaxis] * v.coeffs)
        out += u_grid[i][np.newaxis] * dv_i
    return out


def trilinear_b(u: SpectralField, v: SpectralField, w: SpectralField) -> float:
    """b(u, v, w) = integral (u.grad)v . w, pseudo-spectral with dealiasing."""
    u._check_same_domain(v)
    u._check_same_domain(w)
    dom = u.domain
    prod = _advection_grid(u, v)
    axes = tuple(range(1, dom.dim + 1))
    prod_hat = dealias(dom, _fft.fftn(prod, axes=axes) / dom.n_points)
    return float(dom.volume * np.sum(prod_hat * np.conj(w.coeffs)).real)


def operator_b(u: SpectralField) -> SpectralField:
    """B(u) = P [ (u.grad) u ], dealiased and projected."""
    dom = u.domain
    prod = _advection_grid(u, u)
    axes = tuple(range(1, dom.dim + 1))
    prod_hat = dealias(dom, _fft.fftn(prod, axes=axes) / dom.n_points)
    return project(dom, prod_hat)


# -- Forchheimer damping ----------------------------------------------------------------


def forchheimer_grid(u_grid: np.ndarray, r: float) -> np.ndarray:
    """Pointwise |u|^(r-1) u; the |u| = 0 branch returns 0 for every r >= 1."""
    if r < 1:
        raise ConfigurationError(f"absorption exponent must be >= 1, got {r}")
    if r == 1.0:
        return u_grid
    speed = np.sqrt(np.sum(u_grid**2, axis=0))
    if float(r) == int(r) and int(r) % 2 == 1:
        factor = speed ** (int(r) - 1)
    else:
        with np.errstate(divide="ignore"):
            factor = np.where(speed > 0, speed ** (r - 1.0), 0.0)
    return u_grid * factor[np.newaxis]


def operator_c(u: SpectralField, r: float) -> SpectralField:
    """C(u) = P [ |u|^(r-1) u ], evaluated pointwise, dealiased, projected."""
    dom = u.domain
    values = forchheimer_grid(u.to_grid(), r)
    axes = tuple(range(1, dom.dim + 1))
    prod_hat = dealias(dom, _fft.fftn(values, axes=axes) / dom.n_points)
    return project(dom, prod_hat)


def damping_pairings(u: SpectralField, w: SpectralField, r: float) -> float:
    """<C(u), w> by grid quadrature (equals the spectral pairing for
    divergence-free dealiased w)."""
    u._check_same_domain(w)
    dom = u.domain
    cu = forchheimer_grid(u.to_grid(), r)
    return float(dom.cell_volume * np.sum(cu * w.to_grid()))


def weighted_difference_norm_sq(
    u_weight: SpectralField, diff: SpectralField, r: float
) -> float:
    """|| |u|^((r-1)/2) (u1 - u2) ||_H^2 by grid quadrature."""
    speed = pointwise_magnitude(u_weight)
    d = diff.to_grid()
    with np.errstate(divide="ignore"):
        wgt = np.where(speed > 0, speed ** (r - 1.0), 0.0) if r != 1.0 else 1.0
    return float(diff.domain.cell_volume * np.sum(wgt * np.sum(d**2, axis=0)))
