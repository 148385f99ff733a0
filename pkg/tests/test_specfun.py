import cmath
import math

import numpy as np
import pytest

from sqnls.specfun import (
    QuadratureConvergenceError,
    QuadratureSpec,
    complete_elliptic,
    complete_elliptic_series,
    dilog,
    ellipe,
    ellipk,
    quad_path,
    quad_ray_to_inf,
    theta_sum,
)


class TestCompleteElliptic:
    def test_degenerate_circle(self):
        K, E = complete_elliptic(0.0)
        assert abs(K - math.pi / 2) < 1e-15
        assert abs(E - math.pi / 2) < 1e-15

    def test_complete_degeneration(self):
        assert ellipe(1.0) == 1.0
        with pytest.raises(ValueError):
            ellipk(1.0)

    def test_agm_vs_series_cross_check(self):
        K, E = complete_elliptic(0.5)
        Ks, Es = complete_elliptic_series(0.5)
        assert abs(K - Ks) < 1e-12
        assert abs(E - Es) < 1e-12

    @pytest.mark.parametrize("m", [0.1, 0.3, 0.5, 0.7, 0.9])
    def test_legendre_relation(self, m):
        K, E = complete_elliptic(m)
        K1, E1 = complete_elliptic(1.0 - m)
        assert abs(E * K1 + E1 * K - K * K1 - math.pi / 2) < 1e-11

    def test_monotonicity(self):
        ms = np.linspace(0.0, 0.95, 40)
        Ks = [ellipk(m) for m in ms]
        Es = [ellipe(m) for m in ms]
        assert all(b > a for a, b in zip(Ks[:-1], Ks[1:]))
        assert all(b < a for a, b in zip(Es[:-1], Es[1:]))

    def test_domain_errors(self):
        for bad in (-0.1, 1.5, math.inf, math.nan):
            with pytest.raises(ValueError):
                ellipk(bad)


class TestDilog:
    def test_empty_sum(self):
        assert dilog(0.0) == 0.0

    def test_basel_values(self):
        assert abs(dilog(1.0) - math.pi ** 2 / 6) < 1e-12
        assert abs(dilog(-1.0) + math.pi ** 2 / 12) < 1e-12

    @pytest.mark.parametrize("x", [0.05, 0.2, 0.37, 0.5, 0.64, 0.8, 0.95])
    def test_reflection_identity(self, x):
        lhs = dilog(x) + dilog(1.0 - x)
        rhs = math.pi ** 2 / 6 - math.log(x) * math.log(1.0 - x)
        assert abs(lhs - rhs) < 1e-11

    def test_inversion_branch_continuity(self):
        # values straddling x = -1 must join smoothly
        assert abs(dilog(-1.0 - 1e-9) - dilog(-1.0 + 1e-9)) < 1e-8

    def test_known_negative_value(self):
        # Li2(-3) from the inversion identity against the direct series at -1/3
        direct = -dilog(-1.0 / 3.0) - math.pi ** 2 / 6 - 0.5 * math.log(3.0) ** 2
        assert abs(dilog(-3.0) - direct) < 1e-14

    def test_domain_errors(self):
        for bad in (1.0 + 1e-12, math.inf, math.nan):
            with pytest.raises(ValueError):
                dilog(bad)


class TestThetaSum:
    @pytest.mark.parametrize("seed", range(5))
    def test_automorphic_relations(self, seed):
        rng = np.random.default_rng(seed)
        w = complex(rng.uniform(-2, 2), rng.uniform(-4, 4))
        H = -float(rng.uniform(0.5, 5.0))
        t0 = theta_sum(w, H)
        assert abs(theta_sum(w + 2j * math.pi, H) - t0) < 1e-12 * abs(t0)
        shifted = theta_sum(w + H, H)
        assert abs(shifted - cmath.exp(-H / 2 - w) * t0) < 1e-12 * max(abs(shifted), 1.0)

    def test_even(self):
        w, H = 0.7 - 1.1j, -2.3
        assert theta_sum(-w, H) == theta_sum(w, H)

    def test_truncation_doubling(self):
        w, H = 1.3 + 0.4j, -0.8
        base = theta_sum(w, H)
        big = max(abs(w.real), abs(H))
        n = int(math.ceil((big + math.sqrt(big * big + 2 * abs(H) * math.log(1e16))) / abs(H))) + 2
        doubled = theta_sum(w, H, n_override=2 * n)
        assert abs(doubled - base) < 1e-13 * abs(base)

    def test_divergent_domain(self):
        with pytest.raises(ValueError):
            theta_sum(0.3, 0.0)
        with pytest.raises(ValueError):
            theta_sum(0.3, 1.0)

    def test_hard_cap(self):
        with pytest.raises(QuadratureConvergenceError):
            theta_sum(1e9, -1e-6)


class TestQuadPath:
    def test_inverse_sqrt_left(self):
        spec = QuadratureSpec(target_abs_tol=1e-12, endpoint_singularity="inverse_sqrt_left")
        val = quad_path(lambda z: 1.0 / cmath.sqrt(z), [0.0, 1.0], spec)
        assert abs(val - 2.0) < 1e-11

    def test_unit_circle_residue(self):
        # any closed polyline winding once about 0 integrates dz/z to 2 pi i
        poly = [1, 1j, -1, -1j, 1]
        val = quad_path(lambda z: 1.0 / z, poly, QuadratureSpec(1e-12))
        assert abs(val - 2j * math.pi) < 1e-11

    def test_arctangent_tail(self):
        val = quad_ray_to_inf(lambda lam: 1.0 / (1.0 + lam ** 2), 0.0, 1.0, 2,
                              QuadratureSpec(1e-12))
        assert abs(val - math.pi / 2) < 1e-11

    def test_additive_over_concatenation(self):
        f = lambda z: cmath.exp(z) / (1 + z * z / 9)
        spec = QuadratureSpec(1e-12)
        whole = quad_path(f, [0.0, 1.0 + 1.0j], spec)
        part = quad_path(f, [0.0, 0.4 + 0.4j], spec) + quad_path(f, [0.4 + 0.4j, 1.0 + 1.0j], spec)
        assert abs(whole - part) < 1e-11

    def test_antisymmetric_under_reversal(self):
        f = lambda z: z * z - 1.0 / (z + 5)
        spec = QuadratureSpec(1e-12)
        fwd = quad_path(f, [-1.0, 2.0 + 1.0j], spec)
        bwd = quad_path(f, [2.0 + 1.0j, -1.0], spec)
        assert abs(fwd + bwd) < 1e-11

    def test_log_endpoint(self):
        spec = QuadratureSpec(target_abs_tol=1e-12, endpoint_singularity="log_left")
        val = quad_path(lambda z: cmath.log(z), [0.0, 1.0], spec)
        assert abs(val + 1.0) < 1e-10

    def test_convergence_error_carries_estimate(self):
        spec = QuadratureSpec(target_abs_tol=1e-13, max_subdivisions=2)
        with pytest.raises(QuadratureConvergenceError) as err:
            quad_path(lambda z: 1.0 / cmath.sqrt(abs(z.real) + 1e-30), [-1.0, 1.0], spec)
        assert err.value.error_bound > 0

    def test_spec_validation(self):
        with pytest.raises(ValueError):
            QuadratureSpec(target_abs_tol=-1.0)
        with pytest.raises(ValueError):
            QuadratureSpec(max_subdivisions=0)
        with pytest.raises(ValueError):
            QuadratureSpec(endpoint_singularity="cube_root")

    def test_tail_needs_decay_rate(self):
        with pytest.raises(ValueError):
            quad_ray_to_inf(lambda z: 1.0 / (1 + abs(z)), 0.0, 1.0, 1, QuadratureSpec(1e-8))
