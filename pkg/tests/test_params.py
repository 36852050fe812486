"""Coefficient validation, admissible regimes, registered constants."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scbf.domain import ConfigurationError
from scbf.params import (
    PhysicalParams,
    advection_young_constant,
    energy_bound_constant,
    forchheimer_young_constant,
    local_monotonicity_eta,
)


class TestValidation:
    def test_positive_coefficients(self):
        with pytest.raises(ConfigurationError):
            PhysicalParams(mu=0.0, alpha=1.0, beta=1.0, r=2.0)
        with pytest.raises(ConfigurationError):
            PhysicalParams(mu=1.0, alpha=-1.0, beta=1.0, r=2.0)

    def test_r_and_chi_bounds(self):
        with pytest.raises(ConfigurationError):
            PhysicalParams(mu=1.0, alpha=1.0, beta=1.0, r=0.5)
        with pytest.raises(ConfigurationError):
            PhysicalParams(mu=1.0, alpha=1.0, beta=1.0, r=2.0, chi=-0.1)


class TestRegimes:
    def test_2d_everything_admissible(self):
        for r in (1.0, 2.0, 3.0, 5.5):
            PhysicalParams(mu=1.0, alpha=1.0, beta=1.0, r=r).validate_regime(2)

    def test_3d_needs_strong_damping(self):
        p = PhysicalParams(mu=1.0, alpha=1.0, beta=1.0, r=2.0)
        with pytest.raises(ConfigurationError, match="open problem"):
            p.validate_regime(3)

    def test_3d_boundary_case(self):
        ok = PhysicalParams(mu=0.5, alpha=1.0, beta=1.0, r=3.0)
        ok.validate_regime(3)
        bad = PhysicalParams(mu=0.49, alpha=1.0, beta=1.0, r=3.0)
        assert not bad.regime_admissible(3)

    def test_3d_large_r(self):
        PhysicalParams(mu=1.0, alpha=1.0, beta=1.0, r=4.0).validate_regime(3)


class TestConstants:
    def test_threshold_value(self):
        p = PhysicalParams(mu=1.0, alpha=1.0, beta=1.0, r=2.0)
        assert p.absorption_rate_constant == 729.0 / 8.0
        assert p.noise_decay_threshold == 8.0 / 729.0

    def test_threshold_scales_with_mu_cubed(self):
        p1 = PhysicalParams(mu=1.0, alpha=1.0, beta=1.0, r=2.0)
        p2 = PhysicalParams(mu=2.0, alpha=1.0, beta=1.0, r=2.0)
        assert p2.absorption_rate_constant == p1.absorption_rate_constant / 8.0

    def test_eta_formula(self):
        # r = 5, mu = beta = 1: (r-3)/(2 mu (r-1)) * (2/(beta mu (r-1)))^(2/(r-3))
        p = PhysicalParams(mu=1.0, alpha=1.0, beta=1.0, r=5.0)
        expected = (2.0 / 8.0) * (2.0 / 4.0) ** 1.0
        assert local_monotonicity_eta(p) == pytest.approx(expected)

    def test_eta_needs_r_above_three(self):
        with pytest.raises(ConfigurationError):
            local_monotonicity_eta(PhysicalParams(mu=1, alpha=1, beta=1, r=3.0))

    def test_forchheimer_young_r3(self):
        p = PhysicalParams(mu=1.0, alpha=1.0, beta=1.0, r=3.0)
        assert forchheimer_young_constant(p) == pytest.approx(27.0 / 4.0)

    def test_advection_young_r3(self):
        p = PhysicalParams(mu=1.0, alpha=1.0, beta=1.0, r=3.0)
        assert advection_young_constant(p) == pytest.approx(4.0)


@settings(max_examples=50, deadline=None)
@given(
    mu=st.floats(min_value=0.05, max_value=5.0),
    alpha=st.floats(min_value=0.05, max_value=5.0),
    beta=st.floats(min_value=0.05, max_value=5.0),
    r=st.floats(min_value=1.0, max_value=6.0),
    chi=st.floats(min_value=0.0, max_value=3.0),
)
def test_energy_bound_constant_positive_finite(mu, alpha, beta, r, chi):
    p = PhysicalParams(mu=mu, alpha=alpha, beta=beta, r=r, chi=chi)
    c = energy_bound_constant(p, lambda1=1.0)
    assert c > 0.0 and c < float("inf")
