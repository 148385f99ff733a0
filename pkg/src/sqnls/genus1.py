"""Post-break (oscillatory) asymptotics: endpoint system, periods, theta form.

The moving band endpoint alpha depends on (x, t) only through the
self-similar variable mu = -(x-L)/(2t) and solves a pair of elliptic
integral equations. All Abelian periods are reduced to integrals along the
straight cuts [iq, alpha], [alpha*, -iq] (homotopy invariance makes the
straight-cut realization canonical); boundary values on the cuts are closed
forms, so no quadrature path ever hugs a singularity.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from scipy.optimize import brentq

from .phase_geometry import big_r, big_s, rho1_real_roots
from .scattering import BarrierParams, chi_integral
from .specfun import QuadratureSpec, complete_elliptic, quad_path, quad_ray_to_inf, theta_sum

__all__ = [
    "EndpointState",
    "ModulationParams",
    "elliptic_parameter",
    "alpha_from_m",
    "mu_from_m",
    "solve_endpoint",
    "endpoint_residuals",
    "char_speed",
    "period_integrals",
    "abel_map",
    "modulation_constants",
    "psi_asy_g1",
]

# boundary side of R entering oriented-contour integrals: the plus side is
# the left of the overall -iq -> +iq orientation of the cut system, which in
# the local coordinate u = Im((z-c)/d) of each half-cut is u < 0 on the upper
# band (traversed alpha -> iq) and u > 0 on the lower one (-iq -> alpha*)
_BAND1_SIDE = -1.0
_BAND2_SIDE = +1.0


@dataclass(frozen=True)
class EndpointState:
    """Solved band endpoint at one value of the self-similar variable."""

    mu: float
    m: float
    alpha: complex
    res_moment: float
    res_gap: float


@dataclass(frozen=True)
class ModulationParams:
    """Slowly varying constants entering the theta-function wave form."""

    Omega: float
    eta: float
    H: float
    K_riemann: complex
    A_inf: complex
    T0: float
    Y0: float
    c_nu: complex
    c_tau: complex
    tau1_b_period: float
    reality_defect: float = 0.0  # worst |Im| discarded when storing the reals

    def __post_init__(self):
        if self.H >= 0:
            raise ValueError("the b-period H must be negative")


def elliptic_parameter(alpha: complex, q: float) -> float:
    """m = 1 - |alpha - iq|^2 / |alpha + iq|^2, in [0, 1] for alpha in C+."""
    return 1.0 - abs(alpha - 1j * q) ** 2 / abs(alpha + 1j * q) ** 2


def _cap_a(m: float) -> float:
    # helper ((2-m)E - 2(1-m)K)/(m^2 E); removable singularity at m = 0
    if m < 1e-4:
        return 0.375 + 0.1875 * m
    K, E = complete_elliptic(m)
    return ((2.0 - m) * E - 2.0 * (1.0 - m) * K) / (m * m * E)


def alpha_from_m(m: float, q: float) -> complex:
    """Band endpoint alpha = q (sqrt(4A - (1+mA)^2) + i m A) from the parameter m."""
    if not (0 < m < 1):
        raise ValueError("m must lie in (0, 1)")
    A = _cap_a(m)
    rad = 4.0 * A - (1.0 + m * A) ** 2
    if rad < -1e-12:
        raise ValueError(f"negative radicand {rad} in the endpoint formula")
    return q * (math.sqrt(max(rad, 0.0)) + 1j * m * A)


def mu_from_m(m: float, q: float) -> float:
    """Self-similar variable produced by the endpoint at parameter m.

    From the moment relation: mu = (2 a^2 - b^2 + q^2) / (2 a) with
    alpha = a + ib.
    """
    al = alpha_from_m(m, q)
    a, b = al.real, al.imag
    return (2 * a * a - b * b + q * q) / (2 * a)


def solve_endpoint(mu: float, q: float) -> EndpointState:
    """Invert mu(m) on (0, 1) and package the endpoint with its residuals.

    Residuals of the moment and gap functions are evaluated at the reference
    point t = 1 on the ray of constant mu.
    """
    if not (0 < mu < math.sqrt(2.0) * q):
        raise ValueError(f"mu = {mu} outside the oscillatory window (0, sqrt2 q)")
    m_lo, m_hi = 1e-14, 1.0 - 1e-14
    f_lo = mu_from_m(m_lo, q) - mu
    f_hi = mu_from_m(m_hi, q) - mu
    if f_lo * f_hi > 0:
        raise RuntimeError(f"no sign change for mu = {mu}: [{f_lo}, {f_hi}]")
    m = brentq(lambda mm: mu_from_m(mm, q) - mu, m_lo, m_hi, xtol=1e-15, rtol=8.9e-16)
    alpha = alpha_from_m(m, q)
    f_m, f_g = endpoint_residuals(alpha, -2.0 * mu, 1.0, q)
    return EndpointState(mu=mu, m=m, alpha=alpha,
                         res_moment=abs(f_m), res_gap=abs(f_g))


def endpoint_residuals(alpha: complex, x_minus_l: float, t: float, q: float,
                       quad: QuadratureSpec | None = None) -> tuple[complex, complex]:
    """Moment and gap functions (F_M, F_G) at a trial endpoint.

    F_M is the closed quadratic form; F_G integrates S(lam) times the linear
    factor along the straight segment from alpha* to alpha.
    """
    if quad is None:
        quad = QuadratureSpec(target_abs_tol=1e-12, endpoint_singularity="inverse_sqrt_both")
    else:
        quad = QuadratureSpec(quad.target_abs_tol, quad.max_subdivisions, "inverse_sqrt_both")
    a = complex(alpha)
    ac = a.conjugate()
    f_m = t / 4.0 * (3 * a * a + 2 * a * ac + 3 * ac * ac + 4 * q * q) \
        + x_minus_l / 2.0 * (a + ac)
    if abs(a.imag) < 1e-14:
        # degenerate real endpoint: S integrand collapses, integral vanishes
        return f_m, 0.0 + 0.0j

    def integrand(lam: complex) -> complex:
        return big_s(lam, a, q) * (t * (2 * lam + a + ac) + x_minus_l)

    f_g = quad_path(integrand, [ac, a], quad)
    return f_m, f_g


def endpoint_residuals_params(alpha: complex, x: float, t: float, p: BarrierParams,
                              quad: QuadratureSpec | None = None) -> tuple[complex, complex]:
    return endpoint_residuals(alpha, x - p.L, t, p.q, quad)


def char_speed(alpha: complex, q: float) -> complex:
    """Characteristic speed of the moving Riemann invariant pair (alpha, iq)."""
    a = complex(alpha)
    ac = a.conjugate()
    if abs(a - 1j * q) < 1e-12 * q:
        raise ZeroDivisionError("speed degenerates at alpha = iq (K(1) diverges)")
    m = elliptic_parameter(a, q)
    if a.imag == 0:
        return -a  # m = 0: the elliptic term carries the factor alpha - alpha* = 0
    K, E = complete_elliptic(m)
    denom = (a - 1j * q) * K + (1j * q - ac) * E
    if abs(denom) < 1e-14 * q:
        raise ZeroDivisionError("vanishing denominator in the speed formula")
    return -0.5 * (a + ac) - (a - ac) * (a - 1j * q) * K / denom


# ---------------------------------------------------------------------------
# cut geometry and boundary-value integrals
# ---------------------------------------------------------------------------

def _cut1(alpha: complex, q: float) -> tuple[complex, complex]:
    # segment [iq, alpha] as midpoint and half-vector; s = -1 at iq, +1 at alpha
    return 0.5 * (1j * q + alpha), 0.5 * (alpha - 1j * q)


def _cut2(alpha: complex, q: float) -> tuple[complex, complex]:
    # segment [-iq, alpha*]; s = -1 at -iq, +1 at alpha*
    c1, d1 = _cut1(alpha, q)
    return c1.conjugate(), d1.conjugate()


def _other_factor(z: complex, c: complex, d: complex) -> complex:
    # quadratic sqrt factor with cut c +- d, ~ (z - c) at infinity
    return (z - c) * cmath.sqrt(1.0 - (d / (z - c)) ** 2)


def _r_on_cut(s: float, c: complex, d: complex, c_other: complex, d_other: complex,
              u_sign: float) -> tuple[complex, complex]:
    """(z, R_side) at parameter s in (-1, 1) on the cut c +- d.

    The boundary value of the local factor is u_sign * i * d * sqrt(1-s^2);
    the opposite cut's factor is single-valued there.
    """
    z = c + s * d
    loc = u_sign * 1j * d * math.sqrt(max(1.0 - s * s, 0.0))
    return z, loc * _other_factor(z, c_other, d_other)


def _cut_integral(g, cut: str, alpha: complex, q: float, quad: QuadratureSpec,
                  u_sign: float) -> complex:
    """integral over s in (-1, 1) of g(z(s), R_side(z(s))) dz along a cut.

    Orientation is increasing s (iq -> alpha on cut 1, -iq -> alpha* on
    cut 2). Integrands with 1/R blow up like an inverse square root at both
    ends, which the endpoint substitution absorbs.
    """
    c1, d1 = _cut1(alpha, q)
    c2, d2 = _cut2(alpha, q)
    if cut == "band1":
        c, d, co, do = c1, d1, c2, d2
    elif cut == "band2":
        c, d, co, do = c2, d2, c1, d1
    else:
        raise ValueError("cut must be 'band1' or 'band2'")
    spec = QuadratureSpec(quad.target_abs_tol, quad.max_subdivisions, "inverse_sqrt_both")

    def param_integrand(s: complex) -> complex:
        z, r_side = _r_on_cut(s.real, c, d, co, do, u_sign)
        return g(z, r_side) * d

    return quad_path(param_integrand, [-1.0, 1.0], spec)


def _a_cycle(num, alpha: complex, q: float, quad: QuadratureSpec) -> complex:
    """a-period of num(z)/R(z) dz: twice the straight-segment integral alpha -> alpha*."""
    spec = QuadratureSpec(quad.target_abs_tol, quad.max_subdivisions, "inverse_sqrt_both")
    val = quad_path(lambda z: num(z) / big_r(z, alpha, q), [alpha, alpha.conjugate()], spec)
    return 2.0 * val


def _b_cycle(num, alpha: complex, q: float, quad: QuadratureSpec) -> complex:
    """b-period of num(z)/R(z) dz as a collapsed two-sided integral over [iq, alpha].

    A loop winding once around the cut equals the jump integral
    2 * int_{iq->alpha} num / R_side with the _BAND1_SIDE boundary value.
    """
    return 2.0 * _cut_integral(lambda z, r: num(z) / r, "band1", alpha, q, quad, _BAND1_SIDE)


def seg_integral_inv_r(alpha: complex, q: float, quad: QuadratureSpec | None = None) -> complex:
    """integral_{alpha*}^{alpha} dz / R(z) along the straight segment.

    Matches 2i K(m) / |alpha + iq| (elliptic reduction of the endpoint
    Jacobian); used as the production value behind the a-period.
    """
    if quad is None:
        quad = QuadratureSpec(target_abs_tol=1e-12)
    spec = QuadratureSpec(quad.target_abs_tol, quad.max_subdivisions, "inverse_sqrt_both")
    return quad_path(lambda z: 1.0 / big_r(z, alpha, q), [alpha.conjugate(), alpha], spec)


def period_integrals(alpha: complex, q: float, quad: QuadratureSpec | None = None
                     ) -> tuple[float, complex, complex, complex]:
    """(H, a_period, A_inf, c_nu) of the normalized holomorphic differential.

    a_period is realized as twice the straight segment alpha -> alpha*;
    c_nu = 2 pi i / a_period; H = c_nu * b-cycle; A_inf integrates the
    normalized differential from iq to infinity up the imaginary axis.
    """
    if quad is None:
        quad = QuadratureSpec(target_abs_tol=1e-11)
    if abs(alpha - 1j * q) < 1e-12 * q:
        raise ValueError("alpha = iq: the surface degenerates")
    a_period = -2.0 * seg_integral_inv_r(alpha, q, quad)  # alpha -> alpha* orientation
    c_nu = 2j * math.pi / a_period
    b_per = _b_cycle(lambda z: 1.0 + 0j, alpha, q, quad)
    H_val = c_nu * b_per
    if abs(H_val.imag) > 1e-8 * max(1.0, abs(H_val)):
        raise RuntimeError(f"b-period came out non-real: {H_val}")
    H_real = H_val.real
    if H_real > 0:
        raise RuntimeError(f"b-period positive ({H_real}); orientation conventions broken")
    tail_spec = QuadratureSpec(quad.target_abs_tol, quad.max_subdivisions, "inverse_sqrt_left")
    a_inf = c_nu * quad_ray_to_inf(lambda z: 1.0 / big_r(z, alpha, q), 1j * q, 1j, 2, tail_spec)
    return H_real, a_period, a_inf, c_nu


def abel_map(z: complex, alpha: complex, c_nu: complex, q: float,
             quad: QuadratureSpec | None = None) -> complex:
    """A(z) = int_{iq}^{z} c_nu / R on a cut-avoiding path.

    Straight segment when it clears both cuts; otherwise a detour through a
    waypoint with large positive real part (the cuts live in Re <= Re alpha).
    """
    if quad is None:
        quad = QuadratureSpec(target_abs_tol=1e-11)
    z = complex(z)
    start = 1j * q
    sing = "inverse_sqrt_both" if _is_cut_end(z, alpha, q) else "inverse_sqrt_left"
    path = [start, z]
    if not _path_clears_cuts(path, alpha, q):
        w = max(alpha.real, z.real) + 2.0 * (q + abs(alpha)) + 0.5j * (q + z.imag)
        path = [start, w, z]
        if not _path_clears_cuts(path, alpha, q):
            raise ValueError(f"no cut-avoiding two-leg path from iq to {z}")
    spec = QuadratureSpec(quad.target_abs_tol, quad.max_subdivisions, sing)
    return c_nu * quad_path(lambda lam: 1.0 / big_r(lam, alpha, q), path, spec)


def _is_cut_end(z: complex, alpha: complex, q: float) -> bool:
    return min(abs(z - alpha), abs(z - alpha.conjugate()),
               abs(z - 1j * q), abs(z + 1j * q)) < 1e-12 * q


def _path_clears_cuts(path: list[complex], alpha: complex, q: float) -> bool:
    cuts = [(1j * q, alpha), (alpha.conjugate(), -1j * q)]
    for a0, a1 in zip(path[:-1], path[1:]):
        for b0, b1 in cuts:
            if _segments_too_close(a0, a1, b0, b1, 0.02 * q):
                return False
    return True


def _segments_too_close(a0: complex, a1: complex, b0: complex, b1: complex,
                        clearance: float) -> bool:
    # shared endpoints (paths starting at iq or ending at alpha*) are fine
    shared = [p for p in (a0, a1) if min(abs(p - b0), abs(p - b1)) < 1e-12]
    n = 12
    worst = math.inf
    for i in range(n + 1):
        s = i / n
        pa = a0 + s * (a1 - a0)
        if shared and min(abs(pa - sh) for sh in shared) < 0.15 * abs(a1 - a0):
            continue
        worst = min(worst, _point_seg_dist(pa, b0, b1))
    return worst < clearance


def _point_seg_dist(z: complex, b0: complex, b1: complex) -> float:
    u = b1 - b0
    t = ((z - b0).real * u.real + (z - b0).imag * u.imag) / abs(u) ** 2
    t = min(1.0, max(0.0, t))
    return abs(z - (b0 + t * u))


# ---------------------------------------------------------------------------
# the full set of modulation constants
# ---------------------------------------------------------------------------

def _weight_j(z: complex, on_band: int, xi0: float, xi1: float, q: float,
              chi_quad: QuadratureSpec) -> complex:
    """Band weight log-term minus twice the spectral chi transforms."""
    if on_band == 1:
        logterm = cmath.log(2.0 * (z + 1j * q) / q)
    else:
        logterm = cmath.log(q / (2.0 * (z - 1j * q)))
    chi = chi_integral(z, xi1, q, chi_quad) + chi_integral(z, xi0, q, chi_quad)
    return logterm - 2.0 * chi


def modulation_constants(alpha: complex, x: float, t: float, p: BarrierParams,
                         quad: QuadratureSpec | None = None) -> ModulationParams:
    """All slow constants of the oscillatory wave form at one (x, t).

    Assumes alpha solves the endpoint system at mu = -(x-L)/(2t). Reality of
    Omega, eta, T0, Y0 and H is enforced to 1e-8 and violations raise, since
    they indicate a broken branch or path convention upstream.
    """
    if quad is None:
        quad = QuadratureSpec(target_abs_tol=1e-10)
    chi_quad = QuadratureSpec(target_abs_tol=min(1e-11, quad.target_abs_tol), max_subdivisions=quad.max_subdivisions)
    q, L = p.q, p.L
    a = complex(alpha)
    ac = a.conjugate()
    mu = -(x - L) / (2.0 * t)
    xi0 = mu - a.real
    roots = rho1_real_roots(a, xi0, t, L, q)
    if not roots:
        raise ValueError("rho1 has no real roots here: (x, t) is past the second breaking time")
    xi1 = roots[0]

    def rho(z: complex, r_val: complex | None = None) -> complex:
        s_val = (r_val / (z * z + q * q)) if r_val is not None else big_s(z, a, q)
        return (2.0 * t * z + (x - L)) - s_val * (t * (2.0 * z + a + ac) + (x - L))

    # Omega: real part of the collapsed loop integral around the upper band
    loop_band1 = -2.0 * _cut_integral(
        lambda z, r: (r / (z * z + q * q)) * (t * (2 * z + a + ac) + (x - L)),
        "band1", a, q, quad, _BAND1_SIDE)
    omega_val = loop_band1.real
    if abs(loop_band1.imag) > 1e-8 * max(1.0, abs(loop_band1)):
        raise RuntimeError(f"gap-jump constant not real: {loop_band1}")

    # eta = -theta0(iq) + 2 int_inf^iq rho, up the imaginary axis
    theta0_iq = 2 * t * (1j * q) ** 2 + 2 * (x - L) * (1j * q)
    tail_spec = QuadratureSpec(quad.target_abs_tol, quad.max_subdivisions, "inverse_sqrt_left")
    eta_val = -theta0_iq - 2.0 * quad_ray_to_inf(lambda z: rho(z), 1j * q, 1j, 2, tail_spec)
    if abs(eta_val.imag) > 1e-8 * max(1.0, abs(eta_val)):
        raise RuntimeError(f"band-jump constant not real: {eta_val}")

    # holomorphic differential data
    H_real, a_period, a_inf, c_nu = period_integrals(a, q, quad)
    k_riemann = 1j * math.pi + 0.5 * H_real

    # second-kind differential: numerator z^2 - Re(alpha) z + c_tau, a-period zero
    num2 = lambda z: z * z - a.real * z
    c_tau = -_a_cycle(num2, a, q, quad) / a_period
    b_num = _b_cycle(lambda z: num2(z) + c_tau, a, q, quad)

    # slopes of the real linear polynomials in the essential singularity of s;
    # expanding the Cauchy integrals of s0, s1 at infinity gives
    # p' = (1/2 pi i) * (oriented weight integral), real since the gap
    # integral of 1/R is imaginary and the band integrals pair up
    gap_spec = QuadratureSpec(quad.target_abs_tol, quad.max_subdivisions, "inverse_sqrt_both")
    gap_path_lower = quad_path(lambda z: 1.0 / big_r(z, a, q), [ac, xi0 + 0j], gap_spec)
    gap_path_upper = quad_path(lambda z: 1.0 / big_r(z, a, q), [xi0 + 0j, a], gap_spec)
    gap_inv_r = gap_path_lower + gap_path_upper
    p1_slope_c = -1j * omega_val / (2 * math.pi) * gap_inv_r
    if abs(p1_slope_c.imag) > 1e-8 * max(1.0, abs(p1_slope_c)):
        raise RuntimeError(f"p1 slope not real: {p1_slope_c}")
    p1_slope = p1_slope_c.real
    tau1_b_c = p1_slope * b_num
    tau1_b = tau1_b_c.real
    if abs(tau1_b_c - tau1_b) > 1e-8 * max(1.0, abs(tau1_b)):
        raise RuntimeError("tau1 b-period not real")

    # p0: band pieces with the j weight, gap pieces with the constant -i pi/2
    def j_over_r(z: complex, r_side: complex, band: int) -> complex:
        return _weight_j(z, band, xi0, xi1, q, chi_quad) / r_side

    band1_slope = -_cut_integral(lambda z, r: j_over_r(z, r, 1), "band1", a, q, quad, _BAND1_SIDE)
    band2_slope = _cut_integral(lambda z, r: j_over_r(z, r, 2), "band2", a, q, quad, _BAND2_SIDE)
    gaps_slope = (-0.5j * math.pi) * gap_inv_r
    p0_slope = (band1_slope + band2_slope + gaps_slope) / (2 * math.pi)
    if abs(p0_slope.imag) > 1e-7 * max(1.0, abs(p0_slope)):
        raise RuntimeError(f"p0 slope not real: {p0_slope}")

    def j_moment(z: complex, r_side: complex, band: int) -> complex:
        return (z - a.real) * _weight_j(z, band, xi0, xi1, q, chi_quad) / r_side

    band1_mom = -_cut_integral(lambda z, r: j_moment(z, r, 1), "band1", a, q, quad, _BAND1_SIDE)
    band2_mom = _cut_integral(lambda z, r: j_moment(z, r, 2), "band2", a, q, quad, _BAND2_SIDE)
    gap_mom = (-0.5j * math.pi) * (
        quad_path(lambda z: (z - a.real) / big_r(z, a, q), [ac, xi0 + 0j], gap_spec)
        + quad_path(lambda z: (z - a.real) / big_r(z, a, q), [xi0 + 0j, a], gap_spec))
    p0_const = (band1_mom + band2_mom + gap_mom) / (2 * math.pi) + math.pi / 4.0

    # T0 and the tau1 consistency check against -Omega
    t0_val = p0_slope.real * b_num
    if abs(t0_val.imag) > 1e-8 * max(1.0, abs(t0_val)):
        raise RuntimeError(f"T0 not real: {t0_val}")

    # Y0 = p0_const + p0' (iq - int_{iq}^{inf} (num2 + c_tau)/R - 1)
    resid_spec = QuadratureSpec(quad.target_abs_tol, quad.max_subdivisions, "inverse_sqrt_left")
    resid = quad_ray_to_inf(lambda z: (num2(z) + c_tau) / big_r(z, a, q) - 1.0,
                            1j * q, 1.0, 2, resid_spec)
    y0_val = p0_const + p0_slope.real * (1j * q - resid)
    if abs(y0_val.imag) > 1e-7 * max(1.0, abs(y0_val)):
        raise RuntimeError(f"Y0 not real: {y0_val}")

    defect = max(abs(loop_band1.imag), abs(eta_val.imag), abs(t0_val.imag),
                 abs(y0_val.imag), abs(p0_slope.imag), abs(p1_slope_c.imag))
    return ModulationParams(
        Omega=float(omega_val),
        eta=float(eta_val.real),
        H=float(H_real),
        K_riemann=k_riemann,
        A_inf=a_inf,
        T0=float(t0_val.real),
        Y0=float(y0_val.real),
        c_nu=c_nu,
        c_tau=c_tau,
        tau1_b_period=float(tau1_b),
        reality_defect=float(defect),
    )


def psi_asy_g1(x: float, t: float, p: BarrierParams, state: EndpointState,
               mods: ModulationParams) -> complex:
    """Leading-order one-phase wave form from solved endpoint and constants."""
    q, eps = p.q, p.eps
    H = mods.H
    fast = math.fmod(mods.Omega / eps, 2.0 * math.pi)
    arg_shift = 1j * (mods.T0 - fast)
    two_a = 2.0 * mods.A_inf
    th_num0 = theta_sum(0.0, H)
    th_den0 = theta_sum(two_a, H)
    th_num1 = theta_sum(two_a + arg_shift, H)
    th_den1 = theta_sum(arg_shift, H)
    for name, val in (("Theta(2A)", th_den0), ("Theta(iT)", th_den1)):
        if abs(val) < 1e-12:
            raise ZeroDivisionError(
                f"{name} vanished; upstream reality violation (zeros need complex T)")
    amp = q - state.alpha.imag
    return amp * (th_num0 / th_den0) * (th_num1 / th_den1) * cmath.exp(-2j * mods.Y0)
