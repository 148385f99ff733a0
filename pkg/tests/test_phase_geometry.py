import numpy as np
import pytest

from sqnls.genus1 import solve_endpoint
from sqnls.phase_geometry import (
    SaddleError,
    big_r,
    big_s,
    first_breaking_time,
    level_topology,
    rho1_real_roots,
    rho1_value,
    second_breaking_time,
    trace_zero_level,
)
from sqnls.scattering import BarrierParams

P = BarrierParams(1.0, 1.0, 0.1)


class TestLevelTopology:
    def test_initial(self):
        topo = level_topology(-1.0, 0.0, 1.0)
        assert topo.case == "initial"
        assert topo.crossings == ()

    def test_pre_break_crossings(self):
        # b = -1, t = 1/4: crossings (1 -+ sqrt(1/2))
        topo = level_topology(-1.0, 0.25, 1.0)
        assert topo.case == "pre_break"
        z0, z1 = topo.crossings
        assert abs(z0 - 0.2928932188134524) < 1e-14
        assert abs(z1 - 1.7071067811865475) < 1e-14
        assert abs(topo.asymptote - 2.0) < 1e-14
        assert abs(z0) < abs(z1)
        # both crossings on the half-plane Re(b z) < 0
        assert -1.0 * z0 < 0 and -1.0 * z1 < 0

    def test_post_break(self):
        topo = level_topology(-1.0, 0.4, 1.0)  # T_c = 1/(2 sqrt2) ~ 0.3536
        assert topo.case == "post_break"
        assert topo.crossings == ()

    def test_b_zero_rejected(self):
        with pytest.raises(ValueError):
            level_topology(0.0, 0.1, 1.0)


class TestTrace:
    def test_saddle_error_at_critical_point(self):
        # Im(z^2) = 0 traced into the saddle at the origin
        phase = lambda z: (z * z, 2 * z)
        with pytest.raises(SaddleError):
            trace_zero_level(phase, 2.0 + 0j, lambda z: None,
                             direction=-1.0 + 0j, base_step=0.05, max_steps=200)

    def test_simple_hyperbola(self):
        # level Im(z^2) = 2xy = 0 through (1, 0) is the real axis
        phase = lambda z: (z * z, 2 * z)
        got = trace_zero_level(phase, 1.0 + 0j, lambda z: "done" if z.real > 3 else None,
                               direction=1.0 + 0j, base_step=0.05)
        assert np.max(np.abs(got.points.imag)) < 1e-10
        assert got.endpoints[1] == "done"


class TestRho1:
    def _setup(self, mu, t):
        st = solve_endpoint(mu, 1.0)
        xi0 = mu - st.alpha.real
        return st.alpha, xi0, t

    def test_two_roots_small_t(self):
        alpha, xi0, t = self._setup(0.9, 0.05)
        roots = rho1_real_roots(alpha, xi0, t, 1.0, 1.0)
        assert len(roots) == 2
        assert roots[0] < roots[1] < 0
        for lam in roots:
            assert abs(rho1_value(lam, alpha, xi0, t, 1.0, 1.0)) < 1e-9

    def test_no_roots_large_t(self):
        alpha, xi0, t = self._setup(0.9, 5.0)
        assert rho1_real_roots(alpha, xi0, t, 1.0, 1.0) == []

    def test_double_root_at_t2(self):
        x = 0.5
        t2 = second_breaking_time(x, P)
        mu = (P.L - x) / (2 * t2)
        st = solve_endpoint(mu, P.q)
        xi0 = mu - st.alpha.real
        roots = rho1_real_roots(st.alpha, xi0, t2, P.L, P.q, double_tol=1e-7)
        assert len(roots) == 2
        assert abs(roots[0] - roots[1]) < 1e-3

    def test_big_s_normalization(self):
        alpha = 0.5 + 0.6j
        for lam in (-8.0, -2.0, 3.0, 11.0):
            s = big_s(lam, alpha, 1.0)
            assert abs(s.imag) < 1e-14
            assert s.real > 0
        assert abs(big_s(-1e8, alpha, 1.0) - 1.0) < 1e-7

    def test_big_r_square(self):
        alpha = 0.5 + 0.6j
        for z in (0.3 + 1.4j, -2.0 - 0.3j, 1.9 + 0.1j):
            r = big_r(z, alpha, 1.0)
            quartic = (z - 1j) * (z + 1j) * (z - alpha) * (z - alpha.conjugate())
            assert abs(r * r - quartic) < 1e-12 * abs(quartic)


class TestBreakingTimes:
    def test_first_breaking_values(self):
        assert abs(first_breaking_time(0.0, P) - 0.3535533905932738) < 1e-15
        assert abs(first_breaking_time(0.5, P) - first_breaking_time(-0.5, P)) == 0
        assert first_breaking_time(1.0 - 1e-9, P) < 1e-9
        with pytest.raises(ValueError):
            first_breaking_time(1.0, P)

    @pytest.mark.parametrize("x", [0.25, 0.5, 0.75])
    def test_second_after_first(self, x):
        t2 = second_breaking_time(x, P, tol=1e-8)
        assert t2 > first_breaking_time(x, P)

    def test_root_count_flips_across_t2(self):
        x = 0.5
        t2 = second_breaking_time(x, P)

        def count(t):
            mu = (P.L - x) / (2 * t)
            st = solve_endpoint(mu, P.q)
            return len(rho1_real_roots(st.alpha, mu - st.alpha.real, t, P.L, P.q))

        assert count(t2 - 1e-3) == 2
        assert count(t2 + 1e-3) == 0

    def test_pinch_at_origin(self):
        # the oscillatory window has zero width at x = 0: T2 descends to
        # T1(0) only in the limit x -> 0, so the double-root search fails
        with pytest.raises(RuntimeError):
            second_breaking_time(0.0, P)
