"""Acceptance gate: the eleven desk-scale verification criteria.

Each criterion pins its own experiment configuration (2D grid 32^2, 3D
grid 16^3, steps in [2.5e-3, 1e-2], horizons <= 40) and delegates to the
named checks.  `run_criterion(n)` returns the check dict; `run_all()`
executes the gate in order.
"""

from .checks import (
    check_absorption,
    check_chi_independence,
    check_closed_form_shear,
    check_cocycle,
    check_data_continuity,
    check_energy_equality,
    check_inequality_sweeps,
    check_kappa_decay,
    check_operator_identities,
    check_ou_statistics,
    check_pullback_contraction,
)
from .config import ExperimentConfig, FieldSpec

# the workhorse 2D configuration: unit box constant, moderate noise
_BASE = ExperimentConfig(
    dim=2, grid_n=32,
    mu=1.0, alpha=1.0, beta=1.0, r=3.0, chi=0.0,
    seed=1234, dt=2.5e-3, delta=0.25, s=2.5, base_amp=0.05,
    initial=FieldSpec("random", 0.5, 42),
    T=2.5, store_every=10,
    sweep_samples=500, tolerance=1e-8,
)

# pullback absorption: drag-dominated decay so the energy-bound clock and
# the dynamics agree; r = 3 selects the plain-weight radius class
_ABSORPTION = _BASE.with_overrides(
    mu=0.1, beta=0.02, r=3.0,
    dt=5e-3, base_amp=1e-4, seed=11,
    horizons=(1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 8.0, 10.0),
    ensemble_size=20,
)

# radius-class decay: r = 2 selects the quartic-weight class; the noise
# amplitude sits below the decay threshold alpha / R
_KAPPA = _BASE.with_overrides(
    r=2.0, dt=1e-2, base_amp=0.05, seed=100,
    horizons=(5.0, 10.0, 20.0, 40.0),
)

# pullback contraction, slow-decay regime so the horizon-40 gap stays
# far above rounding
_PULLBACK = _BASE.with_overrides(
    r=2.0, mu=0.1, alpha=0.4, beta=0.5,
    dt=5e-3, base_amp=0.05, seed=13,
    horizons=(5.0, 10.0, 20.0, 40.0),
)

CRITERIA = (
    ("operator identities on randomized fields",
     lambda: check_operator_identities(_BASE)),
    ("inequality sweeps across the admissible regimes",
     lambda: check_inequality_sweeps(_BASE)),
    ("closed-form shear-mode decay",
     lambda: check_closed_form_shear(_BASE.with_overrides(T=5.0))),
    ("energy equality, first order in dt and monotone without noise",
     lambda: check_energy_equality(_BASE)),
    ("response-process statistics, shift identity and difference defect",
     lambda: check_ou_statistics(_BASE.with_overrides(dt=5e-3))),
    ("shift-parameter independence of the solution map",
     lambda: check_chi_independence(_BASE)),
    ("cocycle property under increment re-indexing",
     lambda: check_cocycle(_BASE)),
    ("continuity in the initial data and forcing",
     lambda: check_data_continuity(_BASE.with_overrides(T=2.0))),
    ("pullback absorption into the radius ball",
     lambda: check_absorption(_ABSORPTION)),
    ("weighted radius decay over growing horizons",
     lambda: check_kappa_decay(_KAPPA)),
    ("pullback contraction and per-step difference monotonicity",
     lambda: check_pullback_contraction(_PULLBACK)),
)


def run_criterion(number: int) -> dict:
    """Execute acceptance criterion `number` (1-based)."""
    description, fn = CRITERIA[number - 1]
    result = fn()
    result["criterion"] = number
    result["description"] = description
    return result


def run_all(report=print) -> list:
    results = []
    for i in range(1, len(CRITERIA) + 1):
        result = run_criterion(i)
        status = "PASS" if result["passed"] else "FAIL"
        report(f"criterion {i:2d} [{status}] {result['description']}")
        results.append(result)
    return results
