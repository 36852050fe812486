"""Colored two-sided noise and its stationary Ornstein-Uhlenbeck response.

Randomness is counter-based: the Gaussian draws consumed by step g of a
path are a pure function of (seed, g), with signed step indices mapped
into one Philox key space.  Shifting a realization in time therefore
re-indexes the same draws, and the shift identity for the response
process holds bit-exactly on the step grid.

Per retained Fourier mode k the response solves the scalar complex SDE

    d y_k = -(mu |k|^2 + chi) y_k dt + sigma_k dW_k,

discretized exactly in law: the one-step map over a step of length h is

    y  ->  exp(-gamma h) y + sigma * sqrt((1 - exp(-2 gamma h)) / (2 gamma)) * zeta,

with zeta standard complex Gaussian, projected onto the divergence-free
plane of the mode.  Paths are initialized from the exact stationary law
N(0, sigma^2 / (2 gamma)) instead of integrating from the remote past.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .domain import ConfigurationError, DomainSpec
from .fields import SpectralField

_TAG_STEP = 0
_TAG_INIT = 1


def zigzag(n: int) -> int:
    """Map a signed step index to the nonnegative integers."""
    return 2 * n if n >= 0 else -2 * n - 1


def _stream(seed: int, tag: int, index: int) -> np.random.Generator:
    key = np.array([np.uint64(seed), np.uint64((zigzag(index) << 2) | tag)],
                   dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


# -- coloring -------------------------------------------------------------------


@dataclass(frozen=True)
class ColoringSpectrum:
    """Diagonal noise coloring sigma(k) = base_amp * |k|^(-s) on the
    retained modes, with sigma(0) = 0 and sigma(-k) = sigma(k).

    delta is the smoothing exponent of the nominal covariance class; the
    continuum summability rule s > d/2 + 2*delta is recorded, not enforced.
    """

    domain: DomainSpec
    delta: float
    s: float
    base_amp: float
    sigma: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not (0.0 < self.delta < 0.5):
            raise ConfigurationError(
                f"smoothing exponent delta must lie in (0, 1/2), got {self.delta}"
            )
        if not self.s > 0:
            raise ConfigurationError(f"spectral slope s must be positive, got {self.s}")
        if self.base_amp < 0:
            raise ConfigurationError("base_amp must be nonnegative")
        ksq = self.domain.k_sq
        with np.errstate(divide="ignore"):
            sigma = np.where(
                self.domain.active_mask,
                self.base_amp * np.where(ksq > 0, ksq, 1.0) ** (-self.s / 2.0),
                0.0,
            )
        sigma.setflags(write=False)
        object.__setattr__(self, "sigma", sigma)

    @property
    def certifies_exponent(self) -> bool:
        """Whether s clears the continuum summability rule s > d/2 + 2 delta."""
        return self.s > self.domain.dim / 2.0 + 2.0 * self.delta

    def report(self, r: float, mu: float, chi: float) -> dict:
        """Discrete sums and the damping-norm moment proxy used in reports."""
        sq = self.sigma**2
        ksq = self.domain.k_sq
        active = self.domain.active_mask
        with np.errstate(divide="ignore", invalid="ignore"):
            hs = np.where(active, sq / np.where(active, ksq, 1.0) ** (2.0 * self.delta), 0.0)
        return {
            "sum_sigma_sq": float(sq.sum()),
            "sum_sigma_sq_smoothed": float(hs.sum()),
            "moment_proxy_Lr1": moment_proxy_lr1(self, r, mu, chi),
            "certifies_exponent": self.certifies_exponent,
            "required_slope": self.domain.dim / 2.0 + 2.0 * self.delta,
        }


def build_coloring(domain: DomainSpec, delta: float, base_amp: float,
                   s: float) -> ColoringSpectrum:
    return ColoringSpectrum(domain=domain, delta=delta, s=s, base_amp=base_amp)


# -- stationary moments ------------------------------------------------------------


def _mode_arrays(spectrum: ColoringSpectrum, mu: float, chi: float):
    """Canonical-mode tables: wavevectors, gamma, sigma."""
    dom = spectrum.domain
    cidx = dom.canonical_indices
    kc = dom.wavevectors.reshape(dom.dim, -1)[:, cidx]
    gamma = mu * dom.k_sq.ravel()[cidx] + chi
    sigma = spectrum.sigma.ravel()[cidx]
    return kc, gamma, sigma


def stationary_pointwise_covariance(
    spectrum: ColoringSpectrum, mu: float, chi: float
) -> np.ndarray:
    """Covariance matrix of the stationary field value at one grid point:

        Sigma = sum_k  sigma_k^2/(2 gamma_k) * (I - k k^T / |k|^2)

    summed over the full (two-sided) retained lattice.
    """
    dom = spectrum.domain
    kc, gamma, sigma = _mode_arrays(spectrum, mu, chi)
    s_mode = sigma**2 / (2.0 * gamma)
    ksq = np.sum(kc**2, axis=0)
    proj_sum = (
        np.eye(dom.dim) * s_mode.sum()
        - np.einsum("im,jm,m->ij", kc, kc, s_mode / ksq)
    )
    return 2.0 * proj_sum  # canonical modes plus their mirrors


def stationary_h2_mean(spectrum: ColoringSpectrum, mu: float, chi: float) -> float:
    """E ||Y(t)||_H^2 of the stationary response, in closed form."""
    cov = stationary_pointwise_covariance(spectrum, mu, chi)
    return spectrum.domain.volume * float(np.trace(cov))


def stationary_l4_fourth_moment(
    spectrum: ColoringSpectrum, mu: float, chi: float
) -> float:
    """E ||Y(t)||_{L^4}^4 in closed form (Isserlis on the Gaussian value)."""
    cov = stationary_pointwise_covariance(spectrum, mu, chi)
    tr = float(np.trace(cov))
    tr2 = float(np.trace(cov @ cov))
    return spectrum.domain.volume * (tr**2 + 2.0 * tr2)


def moment_proxy_lr1(spectrum: ColoringSpectrum, r: float, mu: float,
                     chi: float) -> float:
    """Proxy for E ||Y||_{L^{r+1}}^{r+1}: isotropic Gaussian moment with the
    exact pointwise variance (exact only when the covariance is isotropic)."""
    dom = spectrum.domain
    cov = stationary_pointwise_covariance(spectrum, mu, chi)
    var = float(np.trace(cov)) / dom.dim
    p = r + 1.0
    d = dom.dim
    moment = (
        (2.0 * var) ** (p / 2.0)
        * math.gamma((p + d) / 2.0)
        / math.gamma(d / 2.0)
    )
    return dom.volume * moment


def stationary_mode_variance(sigma_k: float, gamma_k: float) -> float:
    """Per-mode stationary variance sigma^2 / (2 gamma); strictly decreasing
    in chi through gamma = mu |k|^2 + chi."""
    return sigma_k**2 / (2.0 * gamma_k)


def stationary_mode_autocov(sigma_k: float, gamma_k: float, lag: float) -> float:
    return stationary_mode_variance(sigma_k, gamma_k) * math.exp(-gamma_k * lag)


# -- driving draws ------------------------------------------------------------------


@dataclass(frozen=True)
class NoiseRealization:
    """One sample path of the driving noise: omega in code form.

    Draws for the step from grid time g*dt to (g+1)*dt come from the
    counter (seed, g + shift_steps); the time shift by s = m*dt is the
    realization with shift_steps increased by m.
    """

    spectrum: ColoringSpectrum
    seed: int
    dt: float
    shift_steps: int = 0

    def __post_init__(self):
        if not self.dt > 0:
            raise ConfigurationError("dt must be positive")

    @property
    def domain(self) -> DomainSpec:
        return self.spectrum.domain

    def shifted(self, s: float) -> "NoiseRealization":
        """theta_s omega for s an integer multiple of dt."""
        return replace(self, shift_steps=self.shift_steps + self.steps_of(s))

    def steps_of(self, t: float) -> int:
        m = t / self.dt
        m_round = round(m)
        if abs(m - m_round) > 1e-9 * max(1.0, abs(m)):
            raise ConfigurationError(
                f"time {t} is not an integer multiple of dt={self.dt}"
            )
        return int(m_round)

    def _n_canonical(self) -> int:
        return len(self.domain.canonical_indices)

    def standard_draws(self, g: int, tag: int = _TAG_STEP) -> np.ndarray:
        """Standard complex Gaussian draws for global step index g,
        shape (dim, n_canonical), E|zeta|^2 = 1.  Pure function of
        (seed, g + shift_steps); draw order is fixed."""
        rng = _stream(self.seed, tag, g + self.shift_steps)
        z = rng.standard_normal((2, self.domain.dim, self._n_canonical()))
        return (z[0] + 1j * z[1]) / np.sqrt(2.0)

    def wiener_increment(self, g: int) -> np.ndarray:
        """Wiener increment over step g: sqrt(dt) times the standard draws
        (variance dt per complex mode component)."""
        return np.sqrt(self.dt) * self.standard_draws(g, _TAG_STEP)


# -- exact one-step update -----------------------------------------------------------


def ou_exact_step(state, h: float, gamma, sigma, draw):
    """Exact-in-law update of the linear SDE over a step of length h:

        new = exp(-gamma h) * state + sigma * sqrt(-expm1(-2 gamma h)/(2 gamma)) * draw

    where draw has unit variance.  Works elementwise on arrays.
    """
    if h <= 0:
        raise ConfigurationError(f"step length must be positive, got {h}")
    gamma = np.asarray(gamma, dtype=np.float64)
    if np.any(gamma <= 0):
        raise ConfigurationError("gamma must be positive")
    decay = np.exp(-gamma * h)
    std = np.asarray(sigma) * np.sqrt(-np.expm1(-2.0 * gamma * h) / (2.0 * gamma))
    return decay * state + std * draw


# -- the response process --------------------------------------------------------------


class OUProcess:
    """Stationary mode-diagonal Ornstein-Uhlenbeck response for one
    noise realization and one (mu, chi) pair."""

    def __init__(self, omega: NoiseRealization, mu: float, chi: float):
        if mu <= 0:
            raise ConfigurationError("mu must be positive")
        if chi < 0:
            raise ConfigurationError("chi must be nonnegative")
        self.omega = omega
        self.mu = mu
        self.chi = chi
        dom = omega.domain
        self._cidx = dom.canonical_indices
        self._midx = dom.mirror_of_canonical
        kc, gamma, sigma = _mode_arrays(omega.spectrum, mu, chi)
        self._kc = kc
        self._ksq_c = np.sum(kc**2, axis=0)
        self.gamma = gamma
        self.sigma = sigma
        h = omega.dt
        self._decay = np.exp(-gamma * h)
        self._step_std = sigma * np.sqrt(-np.expm1(-2.0 * gamma * h) / (2.0 * gamma))
        self._stat_std = sigma / np.sqrt(2.0 * gamma)

    @property
    def domain(self) -> DomainSpec:
        return self.omega.domain

    @property
    def dt(self) -> float:
        return self.omega.dt

    # canonical-mode state vectors, shape (dim, n_canonical)

    def _project(self, z: np.ndarray) -> np.ndarray:
        kdotz = np.sum(self._kc * z, axis=0)
        return z - self._kc * (kdotz / self._ksq_c)[np.newaxis]

    def stationary_modes(self, g: int) -> np.ndarray:
        zeta = self.omega.standard_draws(g, _TAG_INIT)
        return self._stat_std[np.newaxis] * self._project(zeta)

    def step_modes(self, modes: np.ndarray, g: int) -> np.ndarray:
        """Advance canonical-mode state from grid index g to g+1."""
        zeta = self.omega.standard_draws(g, _TAG_STEP)
        return (
            self._decay[np.newaxis] * modes
            + self._step_std[np.newaxis] * self._project(zeta)
        )

    def field_from_modes(self, modes: np.ndarray) -> SpectralField:
        dom = self.domain
        coeffs = np.zeros((dom.dim, dom.n_points), dtype=np.complex128)
        coeffs[:, self._cidx] = modes
        coeffs[:, self._midx] = np.conj(modes)
        return SpectralField(dom, coeffs.reshape(dom.field_shape))

    def modes_from_field(self, f: SpectralField) -> np.ndarray:
        return f.coeffs.reshape(self.domain.dim, -1)[:, self._cidx]

    def path(self, t0: float, t1: float, state_stride: int = 1,
             lp_exponents=(), initial_modes=None) -> "OUPath":
        """Generate the response on the grid [t0, t1].

        States are retained every `state_stride` steps (plus both ends);
        quadrature norms are recorded at every step.  `initial_modes`
        overrides the stationary draw at t0 (testing hook).
        """
        if not t1 > t0:
            raise ConfigurationError("need t0 < t1")
        g0 = self.omega.steps_of(t0)
        g1 = self.omega.steps_of(t1)
        return OUPath(self, g0, g1, state_stride, tuple(lp_exponents),
                      initial_modes)


class OUPath:
    """Stored response trajectory on a step grid [g0*dt, g1*dt].

    Holds per-step quadrature norms and checkpointed states; any state on
    the grid is recovered bit-exactly by replaying from the nearest
    checkpoint at or before it.
    """

    def __init__(self, process: OUProcess, g0: int, g1: int,
                 state_stride: int, lp_exponents: tuple, initial_modes=None):
        if state_stride < 1:
            raise ConfigurationError("state_stride must be >= 1")
        self.process = process
        self.g0 = g0
        self.g1 = g1
        self.state_stride = state_stride
        self.lp_exponents = lp_exponents
        n = g1 - g0 + 1
        self.h2 = np.empty(n)
        self.lp_pow = {p: np.empty(n) for p in lp_exponents}
        self._checkpoints = {}
        modes = (initial_modes.copy() if initial_modes is not None
                 else process.stationary_modes(g0))
        for j, g in enumerate(range(g0, g1 + 1)):
            if (g - g0) % state_stride == 0 or g == g1:
                self._checkpoints[g] = modes.copy()
            self._record_norms(j, modes)
            if g < g1:
                modes = process.step_modes(modes, g)

    def _record_norms(self, j: int, modes: np.ndarray):
        dom = self.process.domain
        # canonical modes carry half the spectrum; mirrors double |.|^2
        self.h2[j] = 2.0 * dom.volume * float(np.sum(np.abs(modes) ** 2))
        if not self.lp_exponents:
            return
        f = self.process.field_from_modes(modes)
        speed_sq = np.sum(f.to_grid() ** 2, axis=0)
        for p in self.lp_exponents:
            self.lp_pow[p][j] = dom.cell_volume * float(
                np.sum(speed_sq ** (p / 2.0))
            )

    # -- accessors ---------------------------------------------------------

    @property
    def dt(self) -> float:
        return self.process.dt

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.g0, self.g1 + 1) * self.dt

    def index_of(self, t: float) -> int:
        g = self.process.omega.steps_of(t)
        if not (self.g0 <= g <= self.g1):
            raise ConfigurationError(
                f"time {t} outside stored window [{self.g0 * self.dt}, "
                f"{self.g1 * self.dt}]"
            )
        return g

    def norm_series(self, kind) -> np.ndarray:
        """Per-step series: 'H2' for ||Y||_H^2, or a float p for ||Y||_p^p."""
        if kind == "H2":
            return self.h2
        return self.lp_pow[kind]

    def modes_at(self, g: int) -> np.ndarray:
        if not (self.g0 <= g <= self.g1):
            raise ConfigurationError(f"step {g} outside stored window")
        candidates = [c for c in self._checkpoints if c <= g]
        start = max(candidates)
        modes = self._checkpoints[start].copy()
        for gg in range(start, g):
            modes = self.process.step_modes(modes, gg)
        return modes

    def state(self, t: float) -> SpectralField:
        return self.process.field_from_modes(self.modes_at(self.index_of(t)))

    def iterate_states(self, t_from: float):
        """Yield (g, SpectralField) from t_from to the window end."""
        g = self.index_of(t_from)
        modes = self.modes_at(g)
        while True:
            yield g, self.process.field_from_modes(modes)
            if g == self.g1:
                return
            modes = self.process.step_modes(modes, g)
            g += 1


# -- derived diagnostics -------------------------------------------------------------


def ergodic_average(path: OUPath, p: float, t: float) -> float:
    """Left-point Riemann time average (1/t) integral_{-t}^0 ||Y(s)||_p^p ds.

    The window [-t, 0] must be contained in the stored path.
    """
    if t <= 0:
        raise ConfigurationError("averaging window must have positive length")
    g_lo = path.index_of(-t)
    g_hi = path.index_of(0.0)
    series = path.norm_series(p)
    j0, j1 = g_lo - path.g0, g_hi - path.g0
    return float(np.sum(series[j0:j1]) * path.dt / t)


def noise_smallness_report(path: OUPath, params, windows) -> dict:
    """Empirical check of the decay condition R * avg ||Y||_4^4 <= alpha.

    Reports the time average over each window, the first window length
    from which the condition holds, and whether it holds at the largest
    window.
    """
    R = params.absorption_rate_constant
    alpha = params.alpha
    averages = {w: ergodic_average(path, 4.0, w) for w in windows}
    t0 = None
    for w in sorted(windows):
        if R * averages[w] <= alpha:
            t0 = w
            break
    return {
        "averages": averages,
        "threshold": alpha / R,
        "empirical_t0": t0,
        "holds_at_largest": R * averages[max(windows)] <= alpha,
    }


def chi_difference_residual(path1: OUPath, path2: OUPath) -> np.ndarray:
    """Per-step defect of the exact-step relation linking two responses of
    the same realization at different chi.

    Per mode, each path satisfies y_i(g+1) = a_i y_i(g) + s_i zeta_g with
    the same projected draw zeta_g, so

        s_2 [y_1(g+1) - a_1 y_1(g)] - s_1 [y_2(g+1) - a_2 y_2(g)] = 0

    to rounding; as dt -> 0 this is the linear relation satisfied by the
    difference of the two responses.  Returns the worst normalized defect
    per step.
    """
    p1, p2 = path1.process, path2.process
    if p1.omega != p2.omega:
        raise ConfigurationError("paths must share one noise realization")
    if (path1.g0, path1.g1) != (path2.g0, path2.g1):
        raise ConfigurationError("paths must cover the same window")
    if p1.mu != p2.mu:
        raise ConfigurationError("paths must share mu")
    a1, s1 = p1._decay, p1._step_std
    a2, s2 = p2._decay, p2._step_std
    nsteps = path1.g1 - path1.g0
    out = np.zeros(nsteps)
    it1 = path1.iterate_states(path1.g0 * path1.dt)
    it2 = path2.iterate_states(path2.g0 * path2.dt)
    _, f1 = next(it1)
    _, f2 = next(it2)
    y1 = p1.modes_from_field(f1)
    y2 = p2.modes_from_field(f2)
    for j in range(nsteps):
        _, f1 = next(it1)
        _, f2 = next(it2)
        y1_next = p1.modes_from_field(f1)
        y2_next = p2.modes_from_field(f2)
        incr1 = y1_next - a1[np.newaxis] * y1
        incr2 = y2_next - a2[np.newaxis] * y2
        defect = s2[np.newaxis] * incr1 - s1[np.newaxis] * incr2
        scale = (s1 + s2)[np.newaxis] * (
            np.abs(y1_next) + np.abs(y1) + np.abs(y2_next) + np.abs(y2)
        )
        ok = scale > 0
        if np.any(ok):
            out[j] = float(np.max(np.abs(defect[ok]) / scale[ok]))
        y1, y2 = y1_next, y2_next
    return out
