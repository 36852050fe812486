"""Experiment configuration: one TOML file drives every run and check.

The file has fixed sections (domain, params, noise, forcing, initial,
run, checks); `reference_toml` emits a fully commented reference with the
defaults inline.  A config validates completely before any computation,
and its canonical hash is embedded in every artifact it produces.
"""

import sys
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

import numpy as np

from .domain import ConfigurationError, DomainSpec
from .fields import SpectralField, random_field, shear_field, taylor_green_field
from .noise import ColoringSpectrum, NoiseRealization
from .params import PhysicalParams
from .snapshots import content_hash
from .solver import SolverConfig

FIELD_KINDS = ("zero", "random", "shear", "taylor-green")

CHECK_NAMES = (
    "operator-identities",
    "inequality-sweeps",
    "closed-form-shear",
    "energy-equality",
    "ou-statistics",
    "chi-independence",
    "cocycle",
    "data-continuity",
    "absorption",
    "kappa-decay",
    "pullback-contraction",
)


@dataclass(frozen=True)
class FieldSpec:
    kind: str = "zero"
    amp: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in FIELD_KINDS:
            raise ConfigurationError(
                f"unknown field kind {self.kind!r}; choose from {FIELD_KINDS}"
            )

    def build(self, domain: DomainSpec) -> SpectralField:
        if self.kind == "zero" or self.amp == 0.0:
            return SpectralField.zero(domain)
        if self.kind == "random":
            raw = random_field(domain, self.seed)
            from .operators import norm_h

            scale = self.amp / max(norm_h(raw), 1e-300)
            return raw * scale
        if self.kind == "shear":
            return shear_field(domain, self.amp)
        return taylor_green_field(domain, self.amp)


@dataclass(frozen=True)
class ExperimentConfig:
    # domain
    dim: int = 2
    grid_n: int = 32
    box_len: float = 2.0 * np.pi
    # params
    mu: float = 1.0
    alpha: float = 1.0
    beta: float = 1.0
    r: float = 3.0
    chi: float = 0.0
    # noise
    seed: int = 1234
    dt: float = 0.005
    delta: float = 0.25
    s: float = 2.5
    base_amp: float = 0.05
    # forcing / initial data
    forcing: FieldSpec = field(default_factory=FieldSpec)
    initial: FieldSpec = field(default_factory=lambda: FieldSpec("random", 0.5, 42))
    # run
    T: float = 5.0
    solver_dt_multiple: int = 1
    store_every: int = 10
    horizons: tuple = (5.0, 10.0, 20.0, 40.0)
    ensemble_size: int = 20
    guard_factor: float = 1e6
    # checks
    check_names: tuple = ("energy-equality",)
    tolerance: float = 1e-8
    sweep_samples: int = 500

    def __post_init__(self):
        # everything fails fast, before any computation
        self.domain()
        self.params().validate_regime(self.dim)
        self.spectrum()
        if self.solver_dt_multiple < 1:
            raise ConfigurationError("solver_dt_multiple must be >= 1")
        if self.T < 0:
            raise ConfigurationError("T must be nonnegative")
        if not self.horizons or any(h <= 0 for h in self.horizons):
            raise ConfigurationError("horizons must be positive")
        if self.ensemble_size < 1:
            raise ConfigurationError("ensemble_size must be >= 1")
        if self.sweep_samples < 1:
            raise ConfigurationError("sweep_samples must be >= 1")
        if self.tolerance <= 0:
            raise ConfigurationError("tolerance must be positive")
        for name in self.check_names:
            if name not in CHECK_NAMES:
                raise ConfigurationError(
                    f"unknown check {name!r}; choose from {CHECK_NAMES}"
                )

    # -- builders --------------------------------------------------------------

    def domain(self) -> DomainSpec:
        return DomainSpec(dim=self.dim, grid_n=self.grid_n, box_len=self.box_len)

    def params(self) -> PhysicalParams:
        return PhysicalParams(mu=self.mu, alpha=self.alpha, beta=self.beta,
                              r=self.r, chi=self.chi)

    def spectrum(self, domain=None) -> ColoringSpectrum:
        return ColoringSpectrum(domain=domain or self.domain(), delta=self.delta,
                                s=self.s, base_amp=self.base_amp)

    def omega(self, seed=None, domain=None) -> NoiseRealization:
        return NoiseRealization(spectrum=self.spectrum(domain),
                                seed=self.seed if seed is None else seed,
                                dt=self.dt)

    def solver_config(self, domain=None) -> SolverConfig:
        dom = domain or self.domain()
        return SolverConfig(
            params=self.params(),
            dt=self.dt * self.solver_dt_multiple,
            store_every=self.store_every,
            forcing=self.forcing.build(dom) if self.forcing.kind != "zero" else None,
            guard_factor=self.guard_factor,
        )

    def initial_field(self, domain=None) -> SpectralField:
        return self.initial.build(domain or self.domain())

    # -- (de)serialization --------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "domain": {"dim": self.dim, "grid_n": self.grid_n,
                       "box_len": self.box_len},
            "params": {"mu": self.mu, "alpha": self.alpha, "beta": self.beta,
                       "r": self.r, "chi": self.chi},
            "noise": {"seed": self.seed, "dt": self.dt, "delta": self.delta,
                      "s": self.s, "base_amp": self.base_amp},
            "forcing": asdict(self.forcing),
            "initial": asdict(self.initial),
            "run": {"T": self.T, "solver_dt_multiple": self.solver_dt_multiple,
                    "store_every": self.store_every,
                    "horizons": list(self.horizons),
                    "ensemble_size": self.ensemble_size,
                    "guard_factor": self.guard_factor},
            "checks": {"names": list(self.check_names),
                       "tolerance": self.tolerance,
                       "sweep_samples": self.sweep_samples},
        }

    @property
    def hash(self) -> str:
        return content_hash(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        def block(name):
            sub = data.get(name, {})
            if not isinstance(sub, dict):
                raise ConfigurationError(f"section [{name}] must be a table")
            return sub

        dom, par, noi = block("domain"), block("params"), block("noise")
        run, chk = block("run"), block("checks")
        kwargs = {}
        mapping = [
            (dom, {"dim": int, "grid_n": int, "box_len": float}),
            (par, {"mu": float, "alpha": float, "beta": float, "r": float,
                   "chi": float}),
            (noi, {"seed": int, "dt": float, "delta": float, "s": float,
                   "base_amp": float}),
            (run, {"T": float, "solver_dt_multiple": int, "store_every": int,
                   "ensemble_size": int, "guard_factor": float}),
            (chk, {"tolerance": float, "sweep_samples": int}),
        ]
        for sub, fields_ in mapping:
            for key, cast in fields_.items():
                if key in sub:
                    kwargs[key] = cast(sub[key])
        if "horizons" in run:
            kwargs["horizons"] = tuple(float(h) for h in run["horizons"])
        if "names" in chk:
            kwargs["check_names"] = tuple(str(n) for n in chk["names"])
        for section in ("forcing", "initial"):
            sub = block(section)
            if sub:
                kwargs[section] = FieldSpec(
                    kind=str(sub.get("kind", "zero")),
                    amp=float(sub.get("amp", 0.0)),
                    seed=int(sub.get("seed", 0)),
                )
        known = {"domain", "params", "noise", "forcing", "initial", "run",
                 "checks"}
        unknown = set(data) - known
        if unknown:
            raise ConfigurationError(f"unknown config sections: {sorted(unknown)}")
        return cls(**kwargs)

    @classmethod
    def from_toml(cls, path) -> "ExperimentConfig":
        with open(path, "rb") as fh:
            try:
                data = tomllib.load(fh)
            except tomllib.TOMLDecodeError as exc:
                raise ConfigurationError(f"cannot parse {path}: {exc}") from exc
        return cls.from_dict(data)

    def with_overrides(self, **kwargs) -> "ExperimentConfig":
        return replace(self, **kwargs)


REFERENCE_TOML = """\
# scbf experiment configuration (reference; values shown are the defaults)

[domain]
dim = 2                     # 2 or 3
grid_n = 32                 # points per axis, power of two (16 is the 3D default)
box_len = 6.283185307179586 # side length; 2*pi makes the Poincare constant 1

[params]
mu = 1.0       # effective viscosity, > 0
alpha = 1.0    # Darcy drag, > 0
beta = 1.0     # Forchheimer coefficient, > 0
r = 3.0        # absorption exponent >= 1; d=3 needs r > 3, or r = 3 with 2*beta*mu >= 1
chi = 0.0      # shift parameter of the noise-removal process, >= 0

[noise]
seed = 1234    # 64-bit seed; all draws are a pure function of (seed, step index)
dt = 0.005     # noise step; the solver step is solver_dt_multiple times this
delta = 0.25   # smoothing exponent, in (0, 1/2)
s = 2.5        # spectral slope: sigma(k) = base_amp * |k|^-s
base_amp = 0.05  # overall noise amplitude; 0 turns the noise off

[forcing]      # time-independent forcing field
kind = "zero"  # zero | random | shear | taylor-green
amp = 0.0      # target H norm (random) or mode amplitude (shear/taylor-green)
seed = 0       # sampler seed for kind = "random"

[initial]      # initial velocity x
kind = "random"
amp = 0.5
seed = 42

[run]
T = 5.0                  # forward horizon
solver_dt_multiple = 1   # solver dt = this * noise dt
store_every = 10         # snapshot stride, in solver steps
horizons = [5.0, 10.0, 20.0, 40.0]  # pullback horizons
ensemble_size = 20       # initial conditions for ensemble experiments
guard_factor = 1e6       # abort when ||v||_H exceeds guard_factor * initial scale

[checks]
names = ["energy-equality"]  # any of: operator-identities, inequality-sweeps,
                             # closed-form-shear, energy-equality, ou-statistics,
                             # chi-independence, cocycle, data-continuity,
                             # absorption, kappa-decay, pullback-contraction
tolerance = 1e-8
sweep_samples = 500
"""


def write_reference_config(path) -> None:
    Path(path).write_text(REFERENCE_TOML)
