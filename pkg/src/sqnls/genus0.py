"""Pre-break asymptotics inside the barrier support (and the quiescent exterior).

In the plane-wave window the wave form is q exp(i(q^2 t/eps + omega)) with a
slow phase correction omega. omega comes either from two half-line integrals
of the reflection weight or from a closed dilogarithm form; both are kept and
cross-checked. The module also carries the traced band contour machinery and
the finite-difference diagnostic showing omega fails the rescaled Laplace
equation (while the arctan family satisfies it exactly).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .phase_geometry import (
    SaddleError,
    TracedContour,
    first_breaking_time,
    level_topology,
    quartic_surd,
    trace_zero_level,
)
from .scattering import BarrierParams, BranchCut, nu_branch, nu_imag_cut
from .specfun import QuadratureSpec, dilog, quad_ray_to_inf

__all__ = [
    "Genus0State",
    "RegionError",
    "genus0_state",
    "stationary_points_g0",
    "exterior_stationary_point",
    "build_band_g0",
    "gfun_g0",
    "omega_phase",
    "omega_selfsimilar",
    "psi_asy_g0",
    "wkb_laplace_residual",
]


class RegionError(ValueError):
    """(x, t) lies outside the region this evaluator covers."""


@dataclass(frozen=True)
class Genus0State:
    """Stationary points, band contour and slow phase at one (x, t) in S1."""

    x: float
    t: float
    xi0: float
    xi1: float
    band: TracedContour
    omega: float

    def __post_init__(self):
        if not (self.xi1 < 0 < self.xi0):
            raise ValueError("stationary points must straddle the origin")


def genus0_state(x: float, t: float, p: "BarrierParams") -> Genus0State:
    """Assemble the full plane-wave-window state at one interior (x, t)."""
    xi0, xi1 = stationary_points_g0(x, t, p)
    band = build_band_g0(x, t, p)
    omega = omega_phase(x, t, p, method="dilog")
    return Genus0State(x=x, t=t, xi0=xi0, xi1=xi1, band=band, omega=omega)


def stationary_points_g0(x: float, t: float, p: BarrierParams) -> tuple[float, float]:
    """Real stationary points (xi0, xi1) of the two modified phases in S1."""
    if abs(x) >= p.L:
        raise RegionError("|x| must be < L; use the exterior helper for |x| > L")
    if t <= 0:
        raise RegionError("t must be positive")
    if t >= first_breaking_time(x, p):
        raise RegionError(f"t = {t} is at or past the first breaking time")
    bm = x - p.L
    bp = x + p.L
    xi0 = -bm / (4 * t) * (1.0 + quartic_surd(bm, t, p.q))
    xi1 = -bp / (4 * t) * (1.0 + quartic_surd(bp, t, p.q))
    return xi0, xi1


def exterior_stationary_point(x: float, t: float, p: BarrierParams, k: int = 0) -> float:
    """Stationary point of the k-th unmodified phase for x outside the support.

    k = 0 has the closed form -(x-L)/(2t); higher harmonics are located by a
    bracketed root solve, seeded by the small-time value -(x+(2k-1)L)/(2t).
    """
    if x <= p.L:
        raise RegionError("exterior helper expects x > L")
    if t <= 0:
        raise RegionError("t must be positive")
    if k == 0:
        return -(x - p.L) / (2 * t)
    from scipy.optimize import brentq

    def dtheta(z: float) -> float:
        nu = -math.sqrt(z * z + p.q * p.q)
        return 4 * t * z + 2 * (x - p.L) + 4 * k * p.L * z / nu

    guess = -(x + (2 * k - 1) * p.L) / (2 * t)
    lo, hi = 3 * guess, -1e-12
    return brentq(dtheta, lo, hi, xtol=1e-14)


# ---------------------------------------------------------------------------
# band contour
# ---------------------------------------------------------------------------

def _phi0_imagcut(z: complex, x: float, t: float, p: BarrierParams) -> tuple[complex, complex]:
    # phi0 with the straight nu-branch; its zero level set is branch independent
    nu = nu_imag_cut(z, p.q)
    b = x - p.L
    val = 2 * nu * (t * z + b) - t * p.q ** 2
    der = 2 * (z / nu) * (t * z + b) + 2 * t * nu
    return val, der


def _leave_branch_point(phase, pnt: complex, h0: float, want) -> complex:
    """First point off a square-root branch point along the level curve.

    Samples a small circle for sign changes of Im(phase - phase(pnt)) and
    returns the crossing that satisfies the `want` direction predicate.
    Sign flips caused by the branch jump across the imaginary segment are
    discontinuities, not level crossings; they are rejected by the residual
    check (a genuine crossing drives Im phase to roundoff).
    """
    from scipy.optimize import brentq

    thetas = np.linspace(-math.pi, math.pi, 241)
    vals = [phase(pnt + h0 * cmath.exp(1j * th))[0].imag for th in thetas]
    candidates = []
    for i in range(len(thetas) - 1):
        if vals[i] == 0.0 or (vals[i] > 0) != (vals[i + 1] > 0):
            th_root = brentq(lambda th: phase(pnt + h0 * cmath.exp(1j * th))[0].imag,
                             thetas[i], thetas[i + 1], xtol=1e-13)
            z = pnt + h0 * cmath.exp(1j * th_root)
            if abs(phase(z)[0].imag) < 1e-8:
                candidates.append(z)
    for z in candidates:
        if want(z - pnt):
            return z
    raise SaddleError(f"no level branch leaves {pnt} in the wanted direction", [])


def build_band_g0(x: float, t: float, p: BarrierParams, base_step: float | None = None,
                  corrector_tol: float = 1e-10) -> TracedContour:
    """Trace the finite band of Im phi0 = 0 from -iq to +iq.

    The upper half is marched from just off +iq down to the real crossing
    point (known in closed form); the lower half is its conjugate mirror.
    """
    q = p.q
    if base_step is None:
        base_step = 1e-2 * q
    topo = level_topology(x - p.L, t, q)
    if topo.case != "pre_break":
        raise RegionError("band exists only for 0 < t < T1(x)")
    z0 = topo.crossings[0]
    side = 1.0 if (x - p.L) < 0 else -1.0  # band lies where Re((x-L) z) < 0

    def phase(z: complex):
        return _phi0_imagcut(z, x, t, p)

    # at small t the band hugs the imaginary segment and leaves +iq almost
    # straight down, so only a sign requirement on Re is safe
    seed = _leave_branch_point(phase, 1j * q, 1e-3 * q,
                               lambda d: side * d.real > 1e-6 * abs(d) and d.imag < 0.5 * abs(d))

    def stop(z: complex):
        if z.imag < 2.0 * base_step:
            return "real_axis"
        if abs(z - z0) < 2.0 * base_step:
            return "real_axis"
        return None

    upper = trace_zero_level(phase, seed, stop, direction=complex(side, -1.0),
                             base_step=base_step, corrector_tol=corrector_tol)
    up_pts = list(upper.points) + [complex(z0)]
    lower = [pt.conjugate() for pt in reversed(up_pts)]
    band_pts = np.array([-1j * q] + lower[:-1] + up_pts[::-1][1:] + [1j * q], dtype=complex)
    return TracedContour(band_pts, ("branch_point", "branch_point"), base_step)


def gfun_g0(z: complex, x: float, t: float, p: BarrierParams, band: TracedContour,
            side: int | None = None) -> tuple[complex, complex, complex]:
    """(g, phi0, phi1) with nu branched along the traced band contour."""
    cut = BranchCut("curved_polyline", polyline=tuple(band.points))
    nu = nu_branch(z, cut, p.q, side=side)
    b = x - p.L
    theta0 = 2 * t * z * z + 2 * b * z
    g = 0.5 * theta0 - nu * (t * z + b) + 0.5 * t * p.q ** 2
    phi0 = 2 * nu * (t * z + b) - t * p.q ** 2
    phi1 = phi0 + 4 * p.L * nu
    return g, phi0, phi1


# ---------------------------------------------------------------------------
# the slow phase omega
# ---------------------------------------------------------------------------

def _log_weight(lam: float, q: float) -> float:
    nu = math.copysign(math.sqrt(lam * lam + q * q), lam) if lam != 0 else q
    return math.log1p(q * q / (nu + lam) ** 2) / nu


def omega_phase(x: float, t: float, p: BarrierParams, quad: QuadratureSpec | None = None,
                method: str = "dilog") -> float:
    """Slow phase correction omega(x, t) on S1.

    method 'integral': -(1/pi) (int_{-inf}^{xi1} - int_{xi0}^{inf}) of
    log(1 + |r0|^2)/nu with the real-axis branch of nu. method 'dilog':
    -(1/2 pi) [Li2(r0(xi0)^2) + Li2(r0(xi1)^2)] with the real arguments
    r0(xi)^2 = -q^2/(nu(xi) + xi)^2. The two agree to quadrature tolerance.
    """
    if quad is None:
        quad = QuadratureSpec(target_abs_tol=1e-11)
    xi0, xi1 = stationary_points_g0(x, t, p)
    q = p.q
    if method == "dilog":
        return -(_dilog_of_r0sq(xi0, q) + _dilog_of_r0sq(xi1, q)) / (2 * math.pi)
    if method != "integral":
        raise ValueError("method must be 'integral' or 'dilog'")
    f = lambda lam: _log_weight(complex(lam).real, q)
    left = quad_ray_to_inf(f, xi1, -1.0, 3, quad)   # = -int_{-inf}^{xi1}
    right = quad_ray_to_inf(f, xi0, +1.0, 3, quad)  # = +int_{xi0}^{inf}
    return float(((left + right) / math.pi).real)


def _dilog_of_r0sq(xi: float, q: float) -> float:
    nu = math.copysign(math.sqrt(xi * xi + q * q), xi)
    arg = -q * q / (nu + xi) ** 2
    if arg > 1e-12:
        raise ValueError(f"r0(xi)^2 = {arg} should be real and <= 0")
    return dilog(min(arg, 0.0))


def omega_selfsimilar(x: float, t: float, p: BarrierParams,
                      quad: QuadratureSpec | None = None) -> float:
    """omega rebuilt from its self-similar form F((x+L)/t) + F((x-L)/t) - omega0."""
    if quad is None:
        quad = QuadratureSpec(target_abs_tol=1e-11)
    q = p.q

    f = lambda lam: _log_weight(complex(lam).real, q)

    def F(zeta: float) -> float:
        lam_c = -zeta / 4 * (1 + math.sqrt(1 - 8 * q * q / (zeta * zeta)))
        return float((quad_ray_to_inf(f, lam_c, -1.0, 3, quad) / math.pi).real)

    omega0 = float(((quad_ray_to_inf(f, 0.0, -1.0, 3, quad)
                     - quad_ray_to_inf(f, 0.0, +1.0, 3, quad)) / math.pi).real)
    return F((x + p.L) / t) + F((x - p.L) / t) - omega0


def psi_asy_g0(x: float, t: float, p: BarrierParams,
               quad: QuadratureSpec | None = None) -> complex:
    """Leading-order wave form in S0 (zero) and S1 (nearly plane wave)."""
    if abs(x) > p.L:
        return 0.0 + 0.0j
    if abs(x) == p.L:
        raise RegionError("|x| = L sits on the region boundary")
    if t < 0:
        raise RegionError("t must be >= 0")
    if t >= first_breaking_time(x, p):
        raise RegionError("t past the first breaking time; use the genus-1 evaluator")
    if t == 0:
        return complex(p.q)
    omega = omega_phase(x, t, p, quad, method="dilog")
    return p.q * cmath.exp(1j * (p.q ** 2 * t / p.eps + omega))


# ---------------------------------------------------------------------------
# Laplace-residual diagnostic
# ---------------------------------------------------------------------------

def wkb_laplace_residual(x: float, t: float, p: BarrierParams, h: float,
                         surrogate: tuple[float, float] | None = None) -> float:
    """Central-difference estimate of omega_tt + q^2 omega_xx at (x, t).

    For the true omega the value stays bounded away from zero as h -> 0.
    Passing surrogate = (c1, c2) replaces omega by the self-similar family
    c1 + c2 (arctan(zeta+/q) + arctan(zeta-/q)), the exact kernel of the
    rescaled Laplace operator, for which the same stencil returns ~0.
    """
    if surrogate is None:
        w = lambda xx, tt: omega_phase(xx, tt, p, method="dilog")
    else:
        c1, c2 = surrogate

        def w(xx: float, tt: float) -> float:
            zp = (xx + p.L) / tt
            zm = (xx - p.L) / tt
            return 2 * c1 + c2 * (math.atan(zp / p.q) + math.atan(zm / p.q))

    for (xx, tt) in ((x + h, t), (x - h, t), (x, t + h), (x, t - h), (x, t)):
        if abs(xx) >= p.L or tt <= 0 or tt >= first_breaking_time(xx, p):
            raise RegionError("5-point stencil leaves the plane-wave region")
    w_tt = (w(x, t + h) - 2 * w(x, t) + w(x, t - h)) / (h * h)
    w_xx = (w(x + h, t) - 2 * w(x, t) + w(x - h, t)) / (h * h)
    return w_tt + p.q ** 2 * w_xx
