"""Coloring spectrum, counter-based draws and the exact response process."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scbf.domain import ConfigurationError, DomainSpec
from scbf.noise import (
    ColoringSpectrum,
    NoiseRealization,
    OUProcess,
    build_coloring,
    chi_difference_residual,
    ergodic_average,
    ou_exact_step,
    stationary_h2_mean,
    stationary_l4_fourth_moment,
    stationary_mode_variance,
    zigzag,
)
from scbf.operators import norm_h, norm_lp


@pytest.fixture(scope="module")
def spectrum(dom2_small):
    return build_coloring(dom2_small, delta=0.25, base_amp=0.1, s=2.5)


@pytest.fixture(scope="module")
def omega(spectrum):
    return NoiseRealization(spectrum=spectrum, seed=424242, dt=0.01)


class TestColoring:
    def test_zero_amplitude(self, dom2_small):
        spec = build_coloring(dom2_small, 0.25, 0.0, 2.5)
        assert np.all(spec.sigma == 0.0)

    def test_power_law_and_symmetry(self, spectrum, dom2_small):
        sig = spectrum.sigma
        ksq = dom2_small.k_sq
        active = dom2_small.active_mask
        expected = 0.1 * ksq[active] ** (-2.5 / 2.0)
        assert np.allclose(sig[active], expected, rtol=1e-12)
        mirrored = dom2_small.conj_mirror(sig.astype(complex)).real
        assert np.array_equal(sig, mirrored)
        assert sig[(0,) * dom2_small.dim] == 0.0

    def test_delta_bounds(self, dom2_small):
        for bad in (0.0, 0.5, 0.7, -0.1):
            with pytest.raises(ConfigurationError, match="delta"):
                build_coloring(dom2_small, bad, 0.1, 2.5)

    def test_concentrated_spectrum_sums(self, dom2_small):
        # steep slope: sums are dominated by the |k| = 1 shell
        spec = build_coloring(dom2_small, 0.25, 1.0, s=10.0)
        rep = spec.report(3.0, 1.0, 0.0)
        shell = 4.0 * 1.0  # four modes at |k|^2 = 1, sigma = 1
        assert rep["sum_sigma_sq"] == pytest.approx(shell, rel=1e-3)
        assert rep["sum_sigma_sq_smoothed"] == pytest.approx(shell, rel=1e-3)

    def test_certifying_exponent(self, dom2_small):
        assert build_coloring(dom2_small, 0.25, 0.1, 2.5).certifies_exponent
        assert not build_coloring(dom2_small, 0.25, 0.1, 1.0).certifies_exponent


class TestStreams:
    def test_zigzag_bijection(self):
        seen = {zigzag(n) for n in range(-500, 500)}
        assert len(seen) == 1000
        assert min(seen) == 0

    def test_draws_reproducible_and_independent(self, omega):
        a = omega.standard_draws(5)
        b = omega.standard_draws(5)
        c = omega.standard_draws(-5)
        assert np.array_equal(a, b)
        assert not np.array_equal(a, c)

    def test_shift_reindexes_draws(self, omega):
        shifted = omega.shifted(3 * omega.dt)
        assert np.array_equal(shifted.standard_draws(2), omega.standard_draws(5))

    def test_shift_requires_grid_alignment(self, omega):
        with pytest.raises(ConfigurationError, match="multiple"):
            omega.shifted(0.5 * omega.dt)

    def test_wiener_increment_variance_scaling(self, omega):
        inc = omega.wiener_increment(0)
        assert np.allclose(inc, math.sqrt(omega.dt) * omega.standard_draws(0))


class TestExactStep:
    def test_noiseless_decay(self):
        new = ou_exact_step(1.0, h=0.3, gamma=2.0, sigma=0.0, draw=0.0)
        assert new == pytest.approx(math.exp(-0.6))

    def test_zero_stays_zero(self):
        assert ou_exact_step(0.0, 1.0, 1.0, 0.0, 0.0) == 0.0

    def test_rejects_bad_step(self):
        with pytest.raises(ConfigurationError):
            ou_exact_step(1.0, h=0.0, gamma=1.0, sigma=1.0, draw=0.0)
        with pytest.raises(ConfigurationError):
            ou_exact_step(1.0, h=0.1, gamma=0.0, sigma=1.0, draw=0.0)

    def test_long_step_is_stationary_draw(self):
        # h -> infinity forgets the initial state: Monte Carlo variance
        # against sigma^2/(2 gamma)
        rng = np.random.default_rng(7)
        draws = rng.standard_normal(10_000)
        new = ou_exact_step(123.0, h=80.0, gamma=0.5, sigma=2.0, draw=draws)
        var_true = 4.0 / 1.0
        assert abs(np.mean(new)) <= 3.0 * math.sqrt(var_true / 10_000) + 1e-12
        assert abs(np.var(new) - var_true) <= 3.0 * var_true * math.sqrt(2 / 10_000)


class TestPaths:
    def test_zero_spectrum_path_is_zero(self, dom2_small):
        spec = build_coloring(dom2_small, 0.25, 0.0, 2.5)
        om = NoiseRealization(spectrum=spec, seed=1, dt=0.01)
        path = OUProcess(om, 1.0, 0.0).path(0.0, 0.2)
        assert np.all(path.h2 == 0.0)
        assert norm_h(path.state(0.1)) == 0.0

    def test_states_divergence_free_and_real(self, omega):
        path = OUProcess(omega, 1.0, 0.5).path(-0.1, 0.1)
        st_field = path.state(0.05)
        assert st_field.max_divergence() <= 1e-12
        assert st_field.hermitian_defect() <= 1e-13
        assert st_field.mean_mode() == 0.0

    def test_reproducible(self, omega):
        p1 = OUProcess(omega, 1.0, 0.0).path(0.0, 0.2)
        p2 = OUProcess(omega, 1.0, 0.0).path(0.0, 0.2)
        assert np.array_equal(p1.state(0.2).coeffs, p2.state(0.2).coeffs)

    def test_recursion_between_stored_states(self, omega):
        proc = OUProcess(omega, 1.0, 0.3)
        path = proc.path(0.0, 0.05)
        g = path.index_of(0.02)
        modes = path.modes_at(g)
        stepped = proc.step_modes(modes, g)
        assert np.array_equal(stepped, path.modes_at(g + 1))

    def test_checkpoint_replay_bit_exact(self, omega):
        proc = OUProcess(omega, 1.0, 0.0)
        dense = proc.path(0.0, 0.3, state_stride=1)
        sparse = proc.path(0.0, 0.3, state_stride=10)
        for t in (0.07, 0.13, 0.29):
            assert np.array_equal(dense.state(t).coeffs, sparse.state(t).coeffs)

    def test_window_errors(self, omega):
        proc = OUProcess(omega, 1.0, 0.0)
        with pytest.raises(ConfigurationError):
            proc.path(0.2, 0.1)
        path = proc.path(0.0, 0.1)
        with pytest.raises(ConfigurationError, match="outside"):
            path.state(0.2)
        with pytest.raises(ConfigurationError, match="multiple"):
            path.state(0.005)

    def test_shift_identity_bit_exact(self, omega):
        proc = OUProcess(omega, 1.0, 0.0)
        path = proc.path(0.0, 0.3)
        m = 17
        shifted = OUProcess(omega.shifted(m * omega.dt), 1.0, 0.0)
        path_s = shifted.path(-m * omega.dt, 0.3 - m * omega.dt)
        for j in (-m, 0, 5, 13):
            assert np.array_equal(
                path_s.state(j * omega.dt).coeffs,
                path.state((j + m) * omega.dt).coeffs,
            )

    def test_flow_composition(self, omega):
        assert omega.shifted(0.0) == omega
        two_step = omega.shifted(0.03).shifted(0.05)
        assert two_step == omega.shifted(0.08)


class TestChiDifference:
    def test_same_chi_zero_difference(self, omega):
        p1 = OUProcess(omega, 1.0, 0.7).path(0.0, 0.1)
        p2 = OUProcess(omega, 1.0, 0.7).path(0.0, 0.1)
        for t in (0.0, 0.05, 0.1):
            assert np.array_equal(p1.state(t).coeffs, p2.state(t).coeffs)

    def test_generic_defect_at_rounding(self, omega):
        p1 = OUProcess(omega, 1.0, 0.0).path(0.0, 0.2)
        p2 = OUProcess(omega, 1.0, 1.3).path(0.0, 0.2)
        assert chi_difference_residual(p1, p2).max() <= 1e-10

    def test_zero_noise_closed_form(self, dom2_small):
        # with sigma = 0 and a supplied initial state, each mode decays
        # like exp(-gamma t); the difference solves the linear system
        spec = build_coloring(dom2_small, 0.25, 0.0, 2.5)
        om = NoiseRealization(spectrum=spec, seed=3, dt=0.01)
        proc1 = OUProcess(om, 1.0, 0.4)
        proc2 = OUProcess(om, 1.0, 0.0)
        rng = np.random.default_rng(5)
        init = rng.standard_normal(proc1.stationary_modes(0).shape) + 0.0j
        init = proc1._project(init)
        p1 = proc1.path(0.0, 0.5, initial_modes=init)
        p2 = proc2.path(0.0, 0.5, initial_modes=init)
        t = 0.5
        expected = (
            np.exp(-proc1.gamma * t)[np.newaxis] * init
            - np.exp(-proc2.gamma * t)[np.newaxis] * init
        )
        got = proc1.modes_from_field(p1.state(t)) - proc2.modes_from_field(
            p2.state(t)
        )
        assert np.abs(got - expected).max() <= 1e-12 * max(np.abs(init).max(), 1.0)

    def test_mismatched_windows_rejected(self, omega):
        p1 = OUProcess(omega, 1.0, 0.0).path(0.0, 0.1)
        p2 = OUProcess(omega, 1.0, 1.0).path(0.0, 0.2)
        with pytest.raises(ConfigurationError):
            chi_difference_residual(p1, p2)


class TestStationaryLaw:
    def test_variance_monotone_in_chi(self):
        chis = np.linspace(0, 5, 11)
        vs = [stationary_mode_variance(1.0, 2.0 + c) for c in chis]
        assert all(a > b for a, b in zip(vs, vs[1:]))

    def test_h2_mean_monte_carlo(self, spectrum):
        exact = stationary_h2_mean(spectrum, 1.0, 0.0)
        n = 3000
        total = 0.0
        for i in range(n):
            om = NoiseRealization(spectrum=spectrum, seed=50_000 + i, dt=0.01)
            proc = OUProcess(om, 1.0, 0.0)
            total += 2.0 * spectrum.domain.volume * float(
                np.sum(np.abs(proc.stationary_modes(0)) ** 2)
            )
        assert abs(total / n - exact) <= 0.1 * exact

    def test_chi_shrinks_h2_mean(self, spectrum):
        a = stationary_h2_mean(spectrum, 1.0, 0.0)
        b = stationary_h2_mean(spectrum, 1.0, 5.0)
        assert b < a

    def test_fourth_moment_positive(self, spectrum):
        assert stationary_l4_fourth_moment(spectrum, 1.0, 0.0) > 0.0


class TestErgodicAverage:
    def test_zero_spectrum(self, dom2_small):
        spec = build_coloring(dom2_small, 0.25, 0.0, 2.5)
        om = NoiseRealization(spectrum=spec, seed=1, dt=0.01)
        path = OUProcess(om, 1.0, 0.0).path(-1.0, 0.0, lp_exponents=(4.0,))
        assert ergodic_average(path, 4.0, 1.0) == 0.0

    def test_window_validation(self, omega):
        path = OUProcess(omega, 1.0, 0.0).path(-0.1, 0.0, lp_exponents=(4.0,))
        with pytest.raises(ConfigurationError):
            ergodic_average(path, 4.0, 0.0)
        with pytest.raises(ConfigurationError):
            ergodic_average(path, 4.0, 1.0)

    def test_amplitude_scaling_quartic(self, dom2_small):
        # scaling the amplitude by c scales the fourth-moment average by c^4
        out = []
        for amp in (0.1, 0.2):
            spec = build_coloring(dom2_small, 0.25, amp, 2.5)
            om = NoiseRealization(spectrum=spec, seed=9, dt=0.01)
            path = OUProcess(om, 1.0, 0.0).path(-5.0, 0.0, lp_exponents=(4.0,))
            out.append(ergodic_average(path, 4.0, 5.0))
        assert out[1] == pytest.approx(16.0 * out[0], rel=1e-10)

    def test_time_average_approaches_ensemble_mean(self, dom2_small):
        # ergodicity at desk scale: 10% agreement over a window of 200,
        # with a flat enough spectrum that the average self-averages
        spec = build_coloring(dom2_small, 0.2, 0.1, 1.6)
        om = NoiseRealization(spectrum=spec, seed=79, dt=0.01)
        path = OUProcess(om, 2.0, 0.0).path(-200.0, 0.0, lp_exponents=(4.0,))
        t_avg = ergodic_average(path, 4.0, 200.0)
        exact = stationary_l4_fourth_moment(spec, 2.0, 0.0)
        assert abs(t_avg - exact) <= 0.10 * exact


@settings(max_examples=200, deadline=None)
@given(n=st.integers(min_value=-10**9, max_value=10**9))
def test_zigzag_nonnegative_and_invertible(n):
    z = zigzag(n)
    assert z >= 0
    back = z // 2 if z % 2 == 0 else -(z + 1) // 2
    assert back == n
