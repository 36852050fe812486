"""Pseudo-spectral simulator and attractor diagnostics for stochastic
convective Brinkman-Forchheimer flow on a periodic box."""

from .domain import ConfigurationError, DomainSpec
from .fields import (
    SpectralField,
    random_field,
    shear_field,
    taylor_green_field,
)
from .noise import (
    ColoringSpectrum,
    NoiseRealization,
    OUPath,
    OUProcess,
    build_coloring,
    ou_exact_step,
)
from .params import PhysicalParams
from .solver import (
    DivergenceError,
    EnergyLedger,
    SolverConfig,
    Trajectory,
    cocycle_phi,
    pullback_solve,
    solve_transformed,
    step,
)

__version__ = "0.1.0"

__all__ = [
    "ColoringSpectrum",
    "ConfigurationError",
    "DivergenceError",
    "DomainSpec",
    "EnergyLedger",
    "NoiseRealization",
    "OUPath",
    "OUProcess",
    "PhysicalParams",
    "SolverConfig",
    "SpectralField",
    "Trajectory",
    "build_coloring",
    "cocycle_phi",
    "ou_exact_step",
    "pullback_solve",
    "random_field",
    "shear_field",
    "solve_transformed",
    "step",
    "taylor_green_field",
]
