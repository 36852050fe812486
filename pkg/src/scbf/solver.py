"""IMEX time integration of the noise-removed velocity equation.

The state v = u - Y solves

    dv/dt = -mu A v - B(v + Y) - alpha v - beta C(v + Y) + (chi - alpha) Y + f

on the dealiased Galerkin modes.  One step treats the diagonal stiff part
(mu A + alpha) implicitly and everything else explicitly at the left
endpoint:

    v_next = (v + dt * [ -B(w) - beta C(w) + (chi - alpha) Y + f ])
             / (1 + dt (mu |k|^2 + alpha)),      w = v + Y.

Each step is a per-mode diagonal solve; mean-zero, divergence-free and
dealiasing are preserved exactly.
"""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import fft as _fft

from .domain import ConfigurationError
from .fields import SpectralField, dealias, to_grid
from .noise import OUPath
from .operators import forchheimer_grid, inner_h, leray_project, norm_h, norm_v
from .params import PhysicalParams


class DivergenceError(RuntimeError):
    """Stability guard tripped: the state norm left the configured bounds."""

    def __init__(self, step: int, time: float, norm: float):
        self.step = step
        self.time = time
        self.norm = norm
        super().__init__(
            f"solution norm {norm:.3e} exceeded the stability guard at "
            f"step {step} (t={time:.6g}); reduce dt or amplitudes"
        )


@dataclass
class SolverConfig:
    """Time-integration settings for one run."""

    params: PhysicalParams
    dt: float
    store_every: int = 1
    forcing: Optional[SpectralField] = None
    guard_factor: float = 1e6
    # testing switches: drop the advection / damping terms
    enable_advection: bool = True
    enable_forchheimer: bool = True

    def __post_init__(self):
        if not self.dt > 0:
            raise ConfigurationError("dt must be positive")
        if self.store_every < 1:
            raise ConfigurationError("store_every must be >= 1")
        if self.guard_factor <= 1:
            raise ConfigurationError("guard_factor must exceed 1")

    def substeps_per_ou_step(self, ou_dt: float) -> int:
        m = self.dt / ou_dt
        m_round = round(m)
        if m_round < 1 or abs(m - m_round) > 1e-9 * max(1.0, m):
            raise ConfigurationError(
                f"solver dt={self.dt} must be a positive integer multiple "
                f"of the noise dt={ou_dt}"
            )
        return int(m_round)


LEDGER_COLUMNS = (
    "step",        # solver step index, 0-based
    "time",        # time at the start of the step
    "vH2",         # ||v||_H^2
    "vV2",         # ||v||_V^2
    "wLr1",        # ||v+Y||_{L^{r+1}}^{r+1}
    "b_wvU",       # b(v+Y, v, Y)
    "C_wv",        # <C(v+Y), v>
    "C_wU",        # <C(v+Y), Y>
    "f_v",         # <f, v>
    "U_v",         # (Y, v)
)


@dataclass
class EnergyLedger:
    """One row per solver step with every term of the energy balance,
    evaluated at the step's start state.  Column order is LEDGER_COLUMNS."""

    rows: list = field(default_factory=list)

    def append(self, row: dict):
        self.rows.append(tuple(row[c] for c in LEDGER_COLUMNS))

    def column(self, name: str) -> np.ndarray:
        i = LEDGER_COLUMNS.index(name)
        return np.array([r[i] for r in self.rows])

    def __len__(self):
        return len(self.rows)


@dataclass
class Trajectory:
    """Stored solve: snapshot states of v plus the per-step ledger."""

    times: list                 # times of stored states
    states: list                # SpectralField v at those times
    ledger: EnergyLedger
    dt: float
    params: PhysicalParams
    t_start: float
    ou: Optional[OUPath] = None

    def state_at(self, t: float) -> SpectralField:
        for tt, s in zip(self.times, self.states):
            if abs(tt - t) <= 1e-9 * max(1.0, abs(t)):
                return s
        raise ConfigurationError(f"no stored state at t={t}")

    @property
    def final_state(self) -> SpectralField:
        return self.states[-1]


# -- right-hand side ---------------------------------------------------------------


def _nonlinear_coeffs(w: SpectralField, cfg: SolverConfig):
    """Raw dealiased+projected coefficient cubes of B(w) and C(w), plus the
    grid samples of w for reuse.  Disabled terms come back as zeros."""
    dom = w.domain
    axes = tuple(range(1, dom.dim + 1))
    w_grid = w.to_grid()
    zero = (slice(None),) + (0,) * dom.dim

    if cfg.enable_advection:
        k = dom.wavevectors
        # all d^2 derivatives in one batched transform: grad[i, j] = d w_j / d x_i
        grad_hat = 1j * k[:, np.newaxis] * w.coeffs[np.newaxis]
        grad = _fft.ifftn(grad_hat * dom.n_points,
                            axes=tuple(range(2, dom.dim + 2))).real
        adv = np.einsum("i...,ij...->j...", w_grid, grad)
        b_hat = dealias(dom, _fft.fftn(adv, axes=axes) / dom.n_points)
        b_hat[zero] = 0.0
        b_hat = leray_project(dom, b_hat)
    else:
        b_hat = np.zeros(dom.field_shape, dtype=np.complex128)

    if cfg.enable_forchheimer:
        cw_grid = forchheimer_grid(w_grid, cfg.params.r)
        c_hat = dealias(dom, _fft.fftn(cw_grid, axes=axes) / dom.n_points)
        c_hat[zero] = 0.0
        c_hat = leray_project(dom, c_hat)
    else:
        c_hat = np.zeros(dom.field_shape, dtype=np.complex128)

    return b_hat, c_hat, w_grid


def rhs_transformed(
    v: SpectralField,
    upsilon: SpectralField,
    params: PhysicalParams,
    forcing: Optional[SpectralField] = None,
):
    """Right-hand side of the transformed system at one instant.

    Returns (total, explicit, stiff): the stiff part -mu A v - alpha v is
    what the IMEX step treats implicitly; explicit is everything else.
    """
    v._check_same_domain(upsilon)
    dom = v.domain
    cfg = SolverConfig(params=params, dt=1.0, forcing=forcing)
    w = v + upsilon
    b_hat, c_hat, _ = _nonlinear_coeffs(w, cfg)
    explicit = -b_hat - params.beta * c_hat + (params.chi - params.alpha) * upsilon.coeffs
    if forcing is not None:
        explicit = explicit + forcing.coeffs
    stiff = -(params.mu * dom.k_sq)[np.newaxis] * v.coeffs - params.alpha * v.coeffs
    return (
        SpectralField(dom, explicit + stiff),
        SpectralField(dom, explicit),
        SpectralField(dom, stiff),
    )


# -- stepping ------------------------------------------------------------------------


def _ledger_row(step, time, v, upsilon, w_grid, b_hat, c_hat, cfg):
    dom = v.domain
    r = cfg.params.r
    speed = np.sqrt(np.sum(w_grid**2, axis=0))
    w_lr1 = dom.cell_volume * float(np.sum(speed ** (r + 1.0)))
    c_field = SpectralField(dom, c_hat)
    b_field = SpectralField(dom, b_hat)
    f_v = inner_h(cfg.forcing, v) if cfg.forcing is not None else 0.0
    return {
        "step": step,
        "time": time,
        "vH2": norm_h(v) ** 2,
        "vV2": norm_v(v) ** 2,
        "wLr1": w_lr1,
        # b(w, v, Y) = <B(w), Y> since b(w, Y, Y) vanishes
        "b_wvU": inner_h(b_field, upsilon),
        "C_wv": inner_h(c_field, v),
        "C_wU": inner_h(c_field, upsilon),
        "f_v": f_v,
        "U_v": inner_h(upsilon, v),
    }


def _step_core(v, upsilon, cfg, *, step=None, time=None, want_row=False):
    dom = v.domain
    p = cfg.params
    w = v + upsilon
    b_hat, c_hat, w_grid = _nonlinear_coeffs(w, cfg)
    explicit = -b_hat - p.beta * c_hat + (p.chi - p.alpha) * upsilon.coeffs
    if cfg.forcing is not None:
        explicit = explicit + cfg.forcing.coeffs
    denom = 1.0 + cfg.dt * (p.mu * dom.k_sq + p.alpha)
    v_next = SpectralField(dom, (v.coeffs + cfg.dt * explicit) / denom[np.newaxis])
    row = None
    if want_row:
        row = _ledger_row(step, time, v, upsilon, w_grid, b_hat, c_hat, cfg)
    return v_next, row


def step(v: SpectralField, upsilon_now: SpectralField,
         cfg: SolverConfig) -> SpectralField:
    """One IMEX step from the state v with Y sampled at the step start."""
    v._check_same_domain(upsilon_now)
    v_next, _ = _step_core(v, upsilon_now, cfg)
    return v_next


def _zero_like(domain) -> SpectralField:
    return SpectralField.zero(domain)


def _ou_state_feed(ou, domain, t_start, n_steps, m_sub):
    """Yield Y at each solver step time; constant zero when ou is None."""
    if ou is None:
        z = _zero_like(domain)
        for _ in range(n_steps + 1):
            yield z
        return
    it = ou.iterate_states(t_start)
    for j in range(n_steps + 1):
        g, state = next(it)
        yield state
        if j < n_steps:
            for _ in range(m_sub - 1):
                next(it)


def solve_transformed(
    v0: SpectralField,
    ou: Optional[OUPath],
    T: float,
    cfg: SolverConfig,
    t_start: float = 0.0,
) -> Trajectory:
    """Integrate the transformed state from t_start over a horizon T.

    The OU path must cover [t_start, t_start + T] on a step grid that the
    solver dt subdivides evenly; states are stored every `store_every`
    steps plus the final time, and the ledger gets one row per step.
    Deterministic: inputs fix every stored byte.
    """
    if T < 0:
        raise ConfigurationError("horizon T must be nonnegative")
    n_steps = round(T / cfg.dt)
    if abs(n_steps * cfg.dt - T) > 1e-9 * max(1.0, T):
        raise ConfigurationError(f"horizon {T} is not a multiple of dt={cfg.dt}")
    m_sub = 1 if ou is None else cfg.substeps_per_ou_step(ou.dt)
    if ou is not None:
        ou.index_of(t_start)
        ou.index_of(t_start + T)

    guard = cfg.guard_factor * max(norm_h(v0), 1.0)
    ledger = EnergyLedger()
    times = [t_start]
    states = [v0.copy()]
    v = v0
    feed = _ou_state_feed(ou, v0.domain, t_start, n_steps, m_sub)
    for n in range(n_steps):
        t_n = t_start + n * cfg.dt
        ups = next(feed)
        v, row = _step_core(v, ups, cfg, step=n, time=t_n, want_row=True)
        ledger.append(row)
        if norm_h(v) > guard:
            raise DivergenceError(n, t_n + cfg.dt, norm_h(v))
        n_next = n + 1
        if n_next == n_steps or n_next % cfg.store_every == 0:
            times.append(t_start + n_next * cfg.dt)
            states.append(v)
    return Trajectory(
        times=times, states=states, ledger=ledger, dt=cfg.dt,
        params=cfg.params, t_start=t_start, ou=ou,
    )


def _advance(v, ou, t_start, n_steps, cfg):
    """Lean loop without ledger or storage; returns the final state."""
    m_sub = 1 if ou is None else cfg.substeps_per_ou_step(ou.dt)
    guard = cfg.guard_factor * max(norm_h(v), 1.0)
    feed = _ou_state_feed(ou, v.domain, t_start, n_steps, m_sub)
    for n in range(n_steps):
        ups = next(feed)
        v, _ = _step_core(v, ups, cfg)
        if norm_h(v) > guard:
            raise DivergenceError(n, t_start + (n + 1) * cfg.dt, norm_h(v))
    return v


def _advance_ensemble(members, ou, t_start, n_steps, cfg):
    """Advance several states through the same realization in one batched
    loop; same algebra as `_step_core`, vectorized over the members."""
    dom = members[0].domain
    p = cfg.params
    state = np.stack([m.coeffs for m in members])  # (B, dim, grid...)
    grid_axes = tuple(range(2, dom.dim + 2))
    k = dom.wavevectors
    ksq = dom.k_sq
    ksq_safe = np.where(ksq > 0, ksq, 1.0)
    mask = dom.dealias_mask & (ksq > 0)
    denom = 1.0 + cfg.dt * (p.mu * ksq + p.alpha)
    guards = cfg.guard_factor * np.maximum(
        [norm_h(m) for m in members], 1.0
    )
    vol = dom.volume
    f_coeffs = cfg.forcing.coeffs if cfg.forcing is not None else None
    m_sub = 1 if ou is None else cfg.substeps_per_ou_step(ou.dt)
    feed = _ou_state_feed(ou, dom, t_start, n_steps, m_sub)
    for n in range(n_steps):
        ups = next(feed).coeffs
        w = state + ups[np.newaxis]
        w_grid = _fft.ifftn(w * dom.n_points, axes=grid_axes).real
        explicit = np.zeros_like(state)
        if cfg.enable_advection:
            grad_hat = 1j * k[np.newaxis, :, np.newaxis] * w[:, np.newaxis]
            grad = _fft.ifftn(grad_hat * dom.n_points,
                                axes=tuple(range(3, dom.dim + 3))).real
            adv = np.einsum("bi...,bij...->bj...", w_grid, grad)
            explicit -= _fft.fftn(adv, axes=grid_axes) / dom.n_points
        if cfg.enable_forchheimer:
            speed = np.sqrt(np.sum(w_grid**2, axis=1))
            if p.r == 1.0:
                cw = w_grid
            else:
                with np.errstate(divide="ignore"):
                    factor = np.where(speed > 0, speed ** (p.r - 1.0), 0.0)
                cw = w_grid * factor[:, np.newaxis]
            explicit -= p.beta * (_fft.fftn(cw, axes=grid_axes) / dom.n_points)
        explicit *= mask
        kdot = np.sum(k[np.newaxis] * explicit, axis=1)
        explicit -= k[np.newaxis] * (kdot / ksq_safe)[:, np.newaxis]
        explicit += (p.chi - p.alpha) * ups[np.newaxis]
        if f_coeffs is not None:
            explicit += f_coeffs[np.newaxis]
        state = (state + cfg.dt * explicit) / denom[np.newaxis, np.newaxis]
        norms_sq = vol * np.sum(np.abs(state) ** 2, axis=grid_axes).sum(axis=1)
        if np.any(norms_sq > guards**2):
            b = int(np.argmax(norms_sq))
            raise DivergenceError(n, t_start + (n + 1) * cfg.dt,
                                  math.sqrt(float(norms_sq[b])))
    return [SpectralField(dom, state[b]) for b in range(len(members))]


def pullback_ensemble(
    t: float,
    ou: Optional[OUPath],
    members,
    cfg: SolverConfig,
) -> list:
    """Batched pullback: phi(t, theta_{-t} omega, x) for every member."""
    if t < 0:
        raise ConfigurationError("pullback horizon must be nonnegative")
    if t == 0:
        return [m.copy() for m in members]
    n_steps = round(t / cfg.dt)
    if abs(n_steps * cfg.dt - t) > 1e-9 * max(1.0, t):
        raise ConfigurationError(f"horizon {t} is not a multiple of dt={cfg.dt}")
    if ou is None:
        return _advance_ensemble(members, None, -t, n_steps, cfg)
    y_start = ou.state(-t)
    vs = [m - y_start for m in members]
    v_ends = _advance_ensemble(vs, ou, -t, n_steps, cfg)
    y_end = ou.state(0.0)
    return [v + y_end for v in v_ends]


def cocycle_phi(
    t: float,
    ou: Optional[OUPath],
    x: SpectralField,
    cfg: SolverConfig,
) -> SpectralField:
    """Solution map u(t) = phi(t, omega, x): transformed solve started from
    v(0) = x - Y(0), then u(t) = v(t) + Y(t).  For t = 0 returns x exactly.
    """
    if t < 0:
        raise ConfigurationError("cocycle time must be nonnegative")
    if t == 0:
        return x.copy()
    n_steps = round(t / cfg.dt)
    if abs(n_steps * cfg.dt - t) > 1e-9 * max(1.0, t):
        raise ConfigurationError(f"time {t} is not a multiple of dt={cfg.dt}")
    if ou is None:
        return _advance(x, None, 0.0, n_steps, cfg)
    v0 = x - ou.state(0.0)
    v_end = _advance(v0, ou, 0.0, n_steps, cfg)
    return v_end + ou.state(t)


def pullback_solve(
    t: float,
    ou: Optional[OUPath],
    x: SpectralField,
    cfg: SolverConfig,
) -> SpectralField:
    """State at time 0 of the run started at -t from x:
    phi(t, theta_{-t} omega, x), with v(-t) = x - Y(-t)."""
    if t < 0:
        raise ConfigurationError("pullback horizon must be nonnegative")
    if t == 0:
        return x.copy()
    n_steps = round(t / cfg.dt)
    if abs(n_steps * cfg.dt - t) > 1e-9 * max(1.0, t):
        raise ConfigurationError(f"horizon {t} is not a multiple of dt={cfg.dt}")
    if ou is None:
        return _advance(x, None, -t, n_steps, cfg)
    v = x - ou.state(-t)
    v_end = _advance(v, ou, -t, n_steps, cfg)
    return v_end + ou.state(0.0)
