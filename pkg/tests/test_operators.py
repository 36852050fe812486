"""Operator identities and bounds on the discrete box."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scbf.domain import ConfigurationError
from scbf.fields import SpectralField, random_field, shear_field, taylor_green_field
from scbf.operators import (
    damping_pairings,
    inner_h,
    norm_h,
    norm_lp,
    norm_v,
    norm_v_dual,
    norms,
    operator_b,
    operator_c,
    stokes_apply,
    trilinear_b,
    weighted_difference_norm_sq,
)


class TestStokes:
    def test_shear_mode_eigenvalue(self, dom2):
        u = shear_field(dom2)
        au = stokes_apply(u)
        assert np.allclose(au.coeffs, u.coeffs)  # |k|^2 = 1 for the shear mode

    def test_zero(self, dom2):
        assert norm_h(stokes_apply(SpectralField.zero(dom2))) == 0.0

    def test_pairing_identity(self, dom2):
        u = random_field(dom2, 3)
        assert np.isclose(inner_h(stokes_apply(u), u), norm_v(u) ** 2, rtol=1e-12)


class TestTrilinearForm:
    def test_second_slot_vanishing(self, dom2):
        u = random_field(dom2, 4)
        v = random_field(dom2, 5)
        scale = norm_v(u) * norm_lp(v, 4.0) ** 2
        assert abs(trilinear_b(u, v, v)) <= 1e-10 * scale

    def test_antisymmetry(self, dom3):
        u = random_field(dom3, 6)
        v = random_field(dom3, 7)
        w = random_field(dom3, 8)
        s = abs(trilinear_b(u, v, w)) + abs(trilinear_b(u, w, v))
        assert abs(trilinear_b(u, v, w) + trilinear_b(u, w, v)) <= 1e-10 * max(
            s, 1e-300
        )

    def test_shear_self_advection_vanishes(self, dom2):
        u = shear_field(dom2)
        for seed in (9, 10, 11):
            w = random_field(dom2, seed)
            assert abs(trilinear_b(u, u, w)) <= 1e-12

    def test_advection_operator_shear(self, dom2):
        assert norm_h(operator_b(shear_field(dom2))) <= 1e-14

    def test_advection_energy_conservation_taylor_green(self, dom2):
        u = taylor_green_field(dom2)
        assert abs(inner_h(operator_b(u), u)) <= 1e-10 * norm_h(u) ** 3

    def test_domain_mismatch(self, dom2, dom2_small):
        with pytest.raises(ConfigurationError):
            trilinear_b(random_field(dom2, 1), random_field(dom2, 2),
                        random_field(dom2_small, 3))


class TestDamping:
    def test_zero_input(self, dom2):
        assert norm_h(operator_c(SpectralField.zero(dom2), 3.0)) == 0.0

    def test_r_equal_one_is_identity(self, dom2):
        u = random_field(dom2, 12)
        cu = operator_c(u, 1.0)
        assert np.abs(cu.coeffs - u.coeffs).max() <= 1e-13

    def test_cubed_shear_mode_amplitudes(self, dom2):
        # sin^3 y = (3 sin y - sin 3y) / 4 carried by the first component
        u = shear_field(dom2)
        cu = operator_c(u, 3.0)
        base = u.coeffs[0][0, 1]
        assert np.isclose(cu.coeffs[0][0, 1], 0.75 * base, rtol=1e-12)
        assert np.isclose(cu.coeffs[0][0, 3], -0.25 * base / 1.0, rtol=1e-12)
        # pointwise-grid oracle
        expected = np.sin(dom2.grid[1]) ** 3
        assert np.allclose(cu.to_grid()[0], expected, atol=1e-12)

    def test_pairing_identity(self, dom3):
        u = random_field(dom3, 13)
        for r in (1.0, 2.5, 3.0, 5.0):
            lhs = inner_h(operator_c(u, r), u)
            rhs = norm_lp(u, r + 1.0) ** (r + 1.0)
            assert np.isclose(lhs, rhs, rtol=1e-8)
            assert np.isclose(damping_pairings(u, u, r), rhs, rtol=1e-12)

    def test_rejects_r_below_one(self, dom2):
        with pytest.raises(ConfigurationError):
            operator_c(random_field(dom2, 1), 0.5)


class TestNorms:
    def test_zero_field(self, dom2):
        z = SpectralField.zero(dom2)
        out = norms(z, lp_exponents=(2.0, 4.0))
        assert out["H"] == out["V"] == out["V_dual"] == 0.0
        assert out["Lp"][4.0] == 0.0

    def test_single_mode_saturates_poincare(self, dom2):
        u = shear_field(dom2)
        u = u * (1.0 / norm_h(u))
        assert np.isclose(norm_h(u), 1.0, rtol=1e-12)
        assert np.isclose(norm_v(u), 1.0, rtol=1e-12)  # lambda1 = 1 saturated

    def test_poincare_sweep(self, dom3):
        lam = dom3.lambda1
        for seed in range(20):
            u = random_field(dom3, 800 + seed)
            assert lam * norm_h(u) ** 2 <= norm_v(u) ** 2 * (1 + 1e-12)

    def test_lp_rejects_small_exponent(self, dom2):
        with pytest.raises(ConfigurationError):
            norm_lp(random_field(dom2, 1), 0.99)

    def test_dual_norm_single_mode(self, dom2):
        u = SpectralField.from_modes(dom2, {(0, 2): np.array([0.5, 0.0])})
        # |k| = 2: dual norm is H norm / 2
        assert np.isclose(norm_v_dual(u), norm_h(u) / 2.0, rtol=1e-12)

    def test_ladyzhenskaya_sweep_2d(self, dom2):
        c = 2.0 ** 0.25
        for seed in range(1000):
            u = random_field(dom2, 9000 + seed)
            ratio = norm_lp(u, 4.0) / (norm_h(u) ** 0.5 * norm_v(u) ** 0.5)
            assert ratio <= c

    def test_interpolation_inequality_sampled_fields(self, dom2, dom3):
        from scbf.analysis import interpolation_margin

        cases = [(2.0, 6.0, 0.5), (2.0, 4.0, 0.25), (3.0, 8.0, 0.6)]
        for dom in (dom2, dom3):
            for seed in range(30):
                u = random_field(dom, 7000 + seed)
                for s1, s2, a in cases:
                    margin, scale = interpolation_margin(u, s1, s2, a)
                    assert margin <= 1e-10 * scale

    def test_ladyzhenskaya_sweep_3d(self, dom3):
        c = 2.0 ** 0.5
        for seed in range(50):
            u = random_field(dom3, 9500 + seed)
            ratio = norm_lp(u, 4.0) / (norm_h(u) ** 0.25 * norm_v(u) ** 0.75)
            assert ratio <= c

    def test_advection_dual_bound(self, dom2):
        for seed in range(50):
            u = random_field(dom2, 500 + seed)
            assert norm_v_dual(operator_b(u)) <= norm_lp(u, 4.0) ** 2 * (1 + 1e-10)


@settings(max_examples=40, deadline=None)
@given(
    a=st.floats(min_value=-5, max_value=5),
    b=st.floats(min_value=-5, max_value=5),
    r=st.floats(min_value=1.0, max_value=6.0),
)
def test_pointwise_damping_lower_bound(a, b, r):
    # scalar version of the damping difference bound that the grid sweep
    # integrates: |a-b|^{r+1} <= c_r (|a|^{r-1} + |b|^{r-1}) |a-b|^2
    c_r = 1.0 if r <= 2.0 else 2.0 ** (r - 2.0)
    lhs = abs(a - b) ** (r + 1.0)
    rhs = c_r * (abs(a) ** (r - 1.0) + abs(b) ** (r - 1.0)) * (a - b) ** 2
    assert lhs <= rhs * (1 + 1e-9) + 1e-12


def test_weighted_difference_norm_matches_quadrature(dom2_small):
    u1 = random_field(dom2_small, 31)
    u2 = random_field(dom2_small, 32)
    d = u1 - u2
    got = weighted_difference_norm_sq(u1, d, 3.0)
    g1 = u1.to_grid()
    gd = d.to_grid()
    speed_sq = np.sum(g1**2, axis=0)
    expected = dom2_small.cell_volume * np.sum(speed_sq * np.sum(gd**2, axis=0))
    assert np.isclose(got, expected, rtol=1e-12)
