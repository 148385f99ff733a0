import math
from dataclasses import replace

import numpy as np
import pytest

from sqnls.genus1 import (
    abel_map,
    alpha_from_m,
    char_speed,
    elliptic_parameter,
    endpoint_residuals,
    modulation_constants,
    mu_from_m,
    period_integrals,
    psi_asy_g1,
    seg_integral_inv_r,
    solve_endpoint,
)
from sqnls.phase_geometry import first_breaking_time, second_breaking_time
from sqnls.scattering import BarrierParams
from sqnls.specfun import QuadratureSpec, complete_elliptic

Q = 1.0
SQRT2 = math.sqrt(2.0)
QUAD = QuadratureSpec(target_abs_tol=1e-12)


def _s2_point(x=0.25, frac=0.5, eps=0.05):
    p = BarrierParams(1.0, 1.0, eps)
    t1 = first_breaking_time(x, p)
    t2 = second_breaking_time(x, p)
    t = t1 + frac * (t2 - t1)
    mu = (p.L - x) / (2 * t)
    return p, x, t, solve_endpoint(mu, p.q)


class TestEndpointFromM:
    def test_limit_real(self):
        assert abs(alpha_from_m(1e-10, Q) - Q / SQRT2) < 1e-9

    def test_limit_iq(self):
        assert abs(alpha_from_m(1.0 - 1e-10, Q) - 1j * Q) < 1e-4

    def test_small_m_expansion(self):
        # alpha = q/sqrt2 + (3iq/8) m + O(m^2); the remainder is quadratic
        rem = [abs(alpha_from_m(m, Q) - (Q / SQRT2 + 3j * Q * m / 8)) for m in (0.05, 0.025)]
        assert rem[0] < 6e-4
        assert abs(rem[0] / rem[1] - 4.0) < 0.5

    @pytest.mark.parametrize("m", [0.1, 0.5, 0.9])
    def test_round_trip(self, m):
        assert abs(elliptic_parameter(alpha_from_m(m, Q), Q) - m) < 1e-10

    def test_domain(self):
        with pytest.raises(ValueError):
            alpha_from_m(0.0, Q)
        with pytest.raises(ValueError):
            alpha_from_m(1.0, Q)


class TestSolveEndpoint:
    def test_mu_monotone(self):
        ms = np.linspace(1e-6, 1 - 1e-6, 50)
        mus = [mu_from_m(float(m), Q) for m in ms]
        assert all(b < a for a, b in zip(mus[:-1], mus[1:]))

    @pytest.mark.parametrize("mu", [0.1, 0.5, 0.9, 1.2, 1.39])
    def test_residuals_small(self, mu):
        st = solve_endpoint(mu, Q)
        scale = 1.0 * Q * Q  # residuals evaluated at reference t = 1
        assert st.res_moment < 1e-10 * scale
        assert st.res_gap < 1e-10 * scale

    def test_limiting_values(self):
        st_hi = solve_endpoint(0.999 * SQRT2 * Q, Q)
        assert st_hi.alpha.imag < 0.05 * Q
        st_lo = solve_endpoint(0.01 * SQRT2 * Q, Q)
        assert abs(st_lo.alpha - 1j * Q) < 0.05 * Q

    def test_out_of_window(self):
        with pytest.raises(ValueError):
            solve_endpoint(SQRT2 * Q, Q)
        with pytest.raises(ValueError):
            solve_endpoint(0.0, Q)


class TestEndpointResiduals:
    def test_moment_at_real_alpha(self):
        # F_M(q/sqrt2) = 2 t q (q - mu/sqrt2)
        t, mu = 0.7, 1.1
        f_m, _ = endpoint_residuals(Q / SQRT2 + 0j, -2 * mu * t, t, Q)
        assert abs(f_m - 2 * t * Q * (Q - mu / SQRT2)) < 1e-14

    def test_gap_at_iq(self):
        # F_G(iq) = -4 i q t mu
        t, mu = 0.4, 0.8
        _, f_g = endpoint_residuals(1j * Q, -2 * mu * t, t, Q)
        assert abs(f_g + 4j * Q * t * mu) < 1e-10

    def test_solved_state_consistency(self):
        st = solve_endpoint(0.8, Q)
        f_m, f_g = endpoint_residuals(st.alpha, -2 * 0.8 * 2.5, 2.5, Q)
        assert abs(f_m) < 1e-10 * 2.5
        assert abs(f_g) < 1e-9 * 2.5


class TestCharSpeed:
    def test_real_alpha_limit(self):
        assert abs(char_speed(Q / SQRT2 + 0j, Q) + Q / SQRT2) < 1e-14

    def test_degenerate_at_iq(self):
        with pytest.raises(ZeroDivisionError):
            char_speed(1j * Q, Q)

    @pytest.mark.parametrize("mu", [0.3, 0.7, 1.1, 1.39])
    def test_selfsimilar_characteristic(self, mu):
        # on the solution branch the speed collapses to -2 mu
        st = solve_endpoint(mu, Q)
        assert abs(char_speed(st.alpha, Q) + 2 * mu) < 1e-12

    def test_whitham_residual(self):
        p = BarrierParams(1.0, 1.0, 0.05)
        x, t, h = 0.3, 0.3, 1e-4

        def alpha_at(xx, tt):
            return solve_endpoint((p.L - xx) / (2 * tt), p.q).alpha

        a_t = (alpha_at(x, t + h) - alpha_at(x, t - h)) / (2 * h)
        a_x = (alpha_at(x + h, t) - alpha_at(x - h, t)) / (2 * h)
        c = char_speed(alpha_at(x, t), p.q)
        assert abs(a_t + c * a_x) / abs(a_x) < 1e-4


class TestPeriods:
    @pytest.mark.parametrize("mu", [0.3, 0.7, 1.1, 1.35])
    def test_elliptic_reduction(self, mu):
        st = solve_endpoint(mu, Q)
        K, _ = complete_elliptic(st.m)
        seg = seg_integral_inv_r(st.alpha, Q, QUAD)
        assert abs(seg - 2j * K / abs(st.alpha + 1j * Q)) < 1e-8

    @pytest.mark.parametrize("mu", [0.3, 0.9, 1.35])
    def test_h_real_negative(self, mu):
        st = solve_endpoint(mu, Q)
        H, a_per, a_inf, c_nu = period_integrals(st.alpha, Q, QUAD)
        assert H < 0
        # normalized a-period is 2 pi i by construction
        assert abs(c_nu * a_per - 2j * math.pi) < 1e-12

    @pytest.mark.parametrize("mu", [0.3, 0.9, 1.35])
    def test_abel_anchors(self, mu):
        st = solve_endpoint(mu, Q)
        H, _, _, c_nu = period_integrals(st.alpha, Q, QUAD)
        assert abel_map(1j * Q, st.alpha, c_nu, Q, QUAD) == 0.0
        a_ast = abel_map(st.alpha.conjugate(), st.alpha, c_nu, Q, QUAD)
        assert abs(a_ast - (1j * math.pi + 0.5 * H)) < 1e-8

    def test_dual_path_invariance(self):
        st = solve_endpoint(0.8, Q)
        _, _, _, c_nu = period_integrals(st.alpha, Q, QUAD)
        z = 3.0 - 0.4j
        direct = abel_map(z, st.alpha, c_nu, Q, QUAD)
        spec = QuadratureSpec(1e-12, endpoint_singularity="inverse_sqrt_left")
        from sqnls.phase_geometry import big_r
        from sqnls.specfun import quad_path
        detour = c_nu * quad_path(lambda lam: 1.0 / big_r(lam, st.alpha, Q),
                                  [1j * Q, 6.0 + 2.0j, z], spec)
        assert abs(direct - detour) < 1e-10

    def test_degenerate_rejected(self):
        with pytest.raises(ValueError):
            period_integrals(1j * Q, Q)


class TestModulationConstants:
    def test_lemma_tau_consistency(self):
        p, x, t, st = _s2_point()
        mods = modulation_constants(st.alpha, x, t, p)
        assert abs(mods.tau1_b_period + mods.Omega) < 1e-8

    def test_riemann_constant(self):
        p, x, t, st = _s2_point()
        mods = modulation_constants(st.alpha, x, t, p)
        assert mods.K_riemann == 1j * math.pi + 0.5 * mods.H

    def test_selfsimilar_scaling(self):
        # Omega / t and eta / t depend on (x, t) only through mu
        p = BarrierParams(1.0, 1.0, 0.05)
        x1, t1v = 0.25, 0.4
        mu = (p.L - x1) / (2 * t1v)
        st = solve_endpoint(mu, p.q)
        t2v = 0.3
        x2 = p.L - 2 * mu * t2v
        m1 = modulation_constants(st.alpha, x1, t1v, p)
        m2 = modulation_constants(st.alpha, x2, t2v, p)
        assert abs(m1.Omega / t1v - m2.Omega / t2v) < 1e-8 * max(1.0, abs(m1.Omega / t1v))
        assert abs(m1.eta / t1v - m2.eta / t2v) < 1e-8 * max(1.0, abs(m1.eta / t1v))

    def test_xi0_positive_on_grid(self):
        for mu in np.linspace(0.05, 1.4, 10):
            st = solve_endpoint(float(mu), Q)
            assert mu - st.alpha.real > 0

    def test_beyond_t2_rejected(self):
        p = BarrierParams(1.0, 1.0, 0.05)
        x = 0.25
        t2 = second_breaking_time(x, p)
        mu = (p.L - x) / (2 * (t2 + 0.05))
        st = solve_endpoint(mu, p.q)
        with pytest.raises(ValueError):
            modulation_constants(st.alpha, x, t2 + 0.05, p)


class TestWaveForm:
    def test_fast_phase_periodicity(self):
        p, x, t, st = _s2_point()
        mods = modulation_constants(st.alpha, x, t, p)
        base = psi_asy_g1(x, t, p, st, mods)
        shifted = psi_asy_g1(x, t, p, st, replace(mods, Omega=mods.Omega + 2 * math.pi * p.eps))
        assert abs(shifted - base) < 1e-10
        t0_shift = psi_asy_g1(x, t, p, st, replace(mods, T0=mods.T0 + 2 * math.pi))
        assert abs(t0_shift - base) < 1e-10

    def test_amplitude_prefactor_limit(self):
        st = solve_endpoint(0.999 * SQRT2 * Q, Q)
        assert Q - st.alpha.imag > 0.95 * Q

    def test_bounded_over_fast_phase_scan(self):
        p, x, t, st = _s2_point()
        mods = modulation_constants(st.alpha, x, t, p)
        amps = []
        for k in range(200):
            shift = replace(mods, Omega=mods.Omega + p.eps * 2 * math.pi * k / 200)
            amps.append(abs(psi_asy_g1(x, t, p, st, shift)))
        assert np.all(np.isfinite(amps))
        assert max(amps) < 2.5 * p.q
        assert min(amps) > 0.0
