"""Exact forward-scattering data of the square barrier.

The barrier is exactly solvable: the transmission/reflection coefficients
are combinations of trigonometric functions of 2 L nu / eps with
nu = sqrt(z^2 + q^2). All operations below are closed-form evaluations plus
root finding; no ODE integration is ever performed.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import brentq

from .specfun import QuadratureSpec, quad_path, quad_ray_to_inf

__all__ = [
    "BarrierParams",
    "BranchCut",
    "SpectralWeights",
    "BranchBoundaryError",
    "nu_branch",
    "nu_imag_cut",
    "scattering_data",
    "reflection_coefficient",
    "harmonic_term",
    "r0_star",
    "eigenvalues",
    "eigenvalue_phase",
    "connection_coefficient",
    "kappa_weight",
    "chi_integral",
    "spectral_weights",
    "multistep_scattering",
]


class BranchBoundaryError(ValueError):
    """Evaluation point sits on a branch cut; request an explicit side."""


@dataclass(frozen=True)
class BarrierParams:
    """Barrier amplitude q, half-width L, and dispersion parameter eps.

    eps must stay a guard distance away from the eigenvalue-birth values
    eps_n = 4 L q / ((2n+1) pi) where a zero of a(z) crosses the origin.
    """

    q: float
    L: float
    eps: float
    birth_guard: float = 1e-9

    def __post_init__(self):
        for name in ("q", "L", "eps"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be a finite positive real")
        # 2 L q / eps = (n + 1/2) pi exactly at a birth value
        ratio = 2 * self.L * self.q / (self.eps * math.pi)
        n_near = round(ratio - 0.5)
        if n_near >= 0:
            eps_n = 4 * self.L * self.q / ((2 * n_near + 1) * math.pi)
            if abs(self.eps - eps_n) < self.birth_guard * eps_n:
                raise ValueError(
                    f"eps = {self.eps} is within the guard distance of the "
                    f"eigenvalue-birth value eps_{n_near} = {eps_n}"
                )


@dataclass(frozen=True)
class BranchCut:
    """Branch cut of nu = sqrt(z^2 + q^2) from -iq to +iq.

    kind 'imaginary_segment' is the straight cut; 'curved_polyline' carries
    an ordered list of vertices from -iq to +iq (conjugation-symmetric as a
    point set, e.g. a traced band contour).
    """

    kind: str
    polyline: tuple[complex, ...] | None = None

    def __post_init__(self):
        if self.kind not in ("imaginary_segment", "curved_polyline"):
            raise ValueError(f"unknown cut kind {self.kind!r}")
        if self.kind == "curved_polyline":
            if self.polyline is None or len(self.polyline) < 2:
                raise ValueError("curved cut needs a polyline with >= 2 vertices")

    def validate_endpoints(self, q: float, tol: float = 1e-9):
        if self.kind != "curved_polyline":
            return
        p = self.polyline
        if abs(p[0] + 1j * q) > tol * q or abs(p[-1] - 1j * q) > tol * q:
            raise ValueError("cut polyline must run from -iq to +iq")


@dataclass(frozen=True)
class SpectralWeights:
    """kappa, the two chi transforms, and delta = exp(chi0 + chi1).

    kappa is real and <= 0 on the real axis; off the axis it is the analytic
    continuation -(1/2 pi) log(1 + q^2 / (nu + z)^2).
    """

    kappa: complex
    chi_xi0: complex
    chi_xi1: complex
    delta: complex


# ---------------------------------------------------------------------------
# branches of nu
# ---------------------------------------------------------------------------

def nu_imag_cut(z: complex, q: float) -> complex:
    """sqrt(z^2 + q^2) cut on the imaginary segment [-iq, iq], ~ z at infinity."""
    z = complex(z)
    if z == 0:
        raise BranchBoundaryError("z = 0 lies on the imaginary-segment cut")
    return z * cmath.sqrt(1.0 + (q / z) ** 2)


def _dist_to_polyline(z: complex, pts: Sequence[complex]) -> float:
    d = math.inf
    for a, b in zip(pts[:-1], pts[1:]):
        u = b - a
        denom = abs(u) ** 2
        if denom == 0:
            d = min(d, abs(z - a))
            continue
        s = ((z - a).real * u.real + (z - a).imag * u.imag) / denom
        s = min(1.0, max(0.0, s))
        d = min(d, abs(z - (a + s * u)))
    return d


def _point_in_polygon(z: complex, verts: Sequence[complex]) -> bool:
    """Even-odd ray crossing; the polygon closes from the last vertex to the first."""
    x, y = z.real, z.imag
    inside = False
    n = len(verts)
    for i in range(n):
        x1, y1 = verts[i].real, verts[i].imag
        x2, y2 = verts[(i + 1) % n].real, verts[(i + 1) % n].imag
        if (y1 > y) != (y2 > y):
            x_cross = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
            if x_cross > x:
                inside = not inside
    return inside


def nu_branch(z: complex, cut: BranchCut, q: float, side: int | None = None) -> complex:
    """Branch of sqrt(z^2 + q^2) cut along `cut`, normalized nu ~ z at infinity.

    For z within 1e-12 q of the cut a side (+1 = left of the -iq -> +iq
    orientation, -1 = right) must be requested explicitly.
    """
    z = complex(z)
    if cut.kind == "imaginary_segment":
        on_cut = abs(z.real) < 1e-12 * q and abs(z.imag) < q * (1 + 1e-12)
        if on_cut:
            if side is None:
                raise BranchBoundaryError("z on the imaginary-segment cut; pass side=+1 or -1")
            # left of upward orientation is Re z < 0; nu continuous with -sqrt there
            mag = math.sqrt(max(q * q - z.imag ** 2, 0.0))
            return -mag if side > 0 else mag
        return nu_imag_cut(z, q)

    cut.validate_endpoints(q)
    pts = cut.polyline
    scale = q
    if _dist_to_polyline(z, pts) < 1e-12 * scale:
        if side is None:
            raise BranchBoundaryError("z on the cut polyline; pass side=+1 or -1")
        # displace along the local left normal only to decide the sign flip
        i_near = min(range(len(pts) - 1),
                     key=lambda i: _dist_to_polyline(z, [pts[i], pts[i + 1]]))
        tang = pts[i_near + 1] - pts[i_near]
        tang /= abs(tang)
        z_probe = z + side * 1j * tang * (1e-6 * scale)
        sign = -1.0 if _point_in_polygon(z_probe, pts) else 1.0
        return sign * _nu0_near_axis(z, q)
    sign = -1.0 if _point_in_polygon(z, pts) else 1.0
    return sign * _nu0_near_axis(z, q)


def _nu0_near_axis(z: complex, q: float) -> complex:
    # imaginary-cut branch, with a tiny real offset when z falls on the open
    # segment (the composite curved-cut branch is continuous there)
    if abs(z.real) < 1e-13 * q and abs(z.imag) < q:
        z = z + 1e-13 * q
    return nu_imag_cut(z, q)


# ---------------------------------------------------------------------------
# scattering coefficients
# ---------------------------------------------------------------------------

def _csinc(w: complex) -> complex:
    if abs(w) < 1e-4:
        w2 = w * w
        return 1.0 - w2 / 6.0 + w2 * w2 / 120.0
    return cmath.sin(w) / w


def scattering_data(z: complex, p: BarrierParams) -> tuple[complex, complex, complex]:
    """Exact (a, b, r) of the single barrier at spectral point z.

    a and b are entire; their values do not depend on the branch given to
    nu because only even combinations enter. Raises if z is (numerically)
    an eigenvalue, where r has a pole.
    """
    z = complex(z)
    q, L, eps = p.q, p.L, p.eps
    nu = cmath.sqrt(z * z + q * q)  # any branch; a, b are even in nu
    phi = 2.0 * L * nu / eps
    if abs(phi.imag) <= 30.0:
        # trig form, smooth through nu = 0
        a = (cmath.cos(phi) - 1j * z * (2 * L / eps) * _csinc(phi)) * cmath.exp(2j * L * z / eps)
        b = -q * (2 * L / eps) * _csinc(phi)
    else:
        # exponential split keeps the combined exponents moderate
        a = ((nu + z) / (2 * nu)) * cmath.exp(2j * L * (z - nu) / eps) \
            + ((nu - z) / (2 * nu)) * cmath.exp(2j * L * (z + nu) / eps)
        b = q * (cmath.exp(-2j * L * nu / eps) - cmath.exp(2j * L * nu / eps)) / (2j * nu)
    if abs(a) < 1e-300:
        raise ZeroDivisionError(f"a({z}) = 0 to machine precision: z is an eigenvalue, r has a pole")
    return a, b, b / a


def reflection_coefficient(z: complex, p: BarrierParams) -> complex:
    return scattering_data(z, p)[2]


# ---------------------------------------------------------------------------
# harmonic expansion of r
# ---------------------------------------------------------------------------

def r0_star(z: complex, q: float, cut: BranchCut | None = None) -> complex:
    """Schwarz reflection of r0: conj(r0(conj z)); equals conj(r0) on the real axis."""
    nu = nu_imag_cut(complex(z).conjugate(), q) if cut is None else \
        nu_branch(complex(z).conjugate(), cut, q)
    return (-1j * q / (nu + complex(z).conjugate())).conjugate()


def harmonic_term(z: complex, k: int, x: float, t: float, p: BarrierParams,
                  cut: BranchCut | None = None) -> tuple[complex, complex]:
    """(r_k, theta_k) of the multi-harmonic expansion of r e^{i theta/eps}.

    r_0 = -iq/(nu+z) and r_k = -r_0^{2k-1} (1 + r_0 r_0*) for every k >= 1;
    theta_k = 2 t z^2 + 2 (x-L) z + 4 k L nu. The factor 1 + r_0 r_0* is the
    analytic continuation of 1 + |r_0|^2 and equals 1 - r_0^2. The constant
    minus sign for k >= 1 is forced by the geometric-series expansion of the
    exact reflection coefficient (checked against partial sums in the tests).
    """
    if k < 0:
        raise ValueError("harmonic index k must be >= 0")
    z = complex(z)
    q = p.q
    nu = nu_imag_cut(z, q) if cut is None else nu_branch(z, cut, q)
    denom = nu + z
    if abs(denom) < 1e-14 * q:
        raise ZeroDivisionError("nu + z vanishes; r0 is singular here")
    r0 = -1j * q / denom
    theta_k = 2 * t * z * z + 2 * (x - p.L) * z + 4 * k * p.L * nu
    if k == 0:
        return r0, theta_k
    rk = -(r0 ** (2 * k - 1)) * (1.0 + r0 * r0_star(z, q, cut))
    return rk, theta_k


# ---------------------------------------------------------------------------
# eigenvalues on i(0, q)
# ---------------------------------------------------------------------------

def eigenvalue_phase(y: float, p: BarrierParams) -> float:
    """Phase whose half-integer-pi crossings locate the zeros of a(iy).

    On the imaginary axis a(iy) is proportional to q cos(Phi(y)) with
    Phi = 2 L sqrt(q^2-y^2)/eps - asin(y/q), strictly decreasing in y.
    """
    q = p.q
    s = math.sqrt(max(q * q - y * y, 0.0))
    return 2 * p.L * s / p.eps - math.asin(min(1.0, max(-1.0, y / q)))


def eigenvalues(p: BarrierParams) -> list[float]:
    """All y in (0, q) with a(iy) = 0, ascending.

    The bracketing function s cos(2Ls/eps) + y sin(2Ls/eps) equals
    q cos(Phi(y)), and Phi is monotone, so every root is isolated by one
    half-integer multiple of pi; each is refined by brentq.
    """
    q, L, eps = p.q, p.L, p.eps
    phi_top = 2 * L * q / eps  # Phi(0)
    roots = []
    j = 0
    while (j + 0.5) * math.pi < phi_top:
        target = (j + 0.5) * math.pi
        y_j = brentq(lambda y: eigenvalue_phase(y, p) - target, 0.0, q, xtol=1e-15, rtol=8.9e-16)
        roots.append(y_j)
        j += 1
    roots.sort()
    for y_prev, y_next in zip(roots[:-1], roots[1:]):
        if y_next - y_prev < 1e-12 * q:
            raise RuntimeError("eigenvalue brackets collapsed; refine the phase grid")
    return roots


def _a_on_axis(y: float, p: BarrierParams) -> float:
    # e^{2Ly/eps}-normalized a(iy); real-valued
    q = p.q
    s = math.sqrt(max(q * q - y * y, 0.0))
    phi = 2 * p.L * s / p.eps
    if s > 1e-9 * q:
        return (s * math.cos(phi) + y * math.sin(phi)) / s
    return math.cos(phi) + y * (2 * p.L / p.eps) * float(_csinc(complex(phi)).real)


def connection_coefficient(z_k: complex, p: BarrierParams) -> complex:
    """c_k = b(z_k) / a'(z_k) at a simple zero z_k of a.

    a' comes from a centered difference with step 1e-6 max(1, |z_k|); that
    matches the residue of r at z_k since a is entire and the zero simple.
    """
    z_k = complex(z_k)
    a_val, b_val, _ = (None, None, None)
    try:
        a_val, b_val, _ = scattering_data(z_k, p)
    except ZeroDivisionError:
        # dead-on eigenvalue: a underflowed, recompute b alone from trig form
        q, L, eps = p.q, p.L, p.eps
        nu = cmath.sqrt(z_k * z_k + q * q)
        b_val = -q * (2 * L / eps) * _csinc(2 * L * nu / eps)
        a_val = 0.0
    if abs(a_val) > 1e-10 * max(1.0, abs(b_val)):
        raise ValueError(f"|a(z_k)| = {abs(a_val):.2e}: z_k is not an eigenvalue")
    h = 1e-6 * max(1.0, abs(z_k))
    a_plus = scattering_data(z_k + h, p)[0]
    a_minus = scattering_data(z_k - h, p)[0]
    a_prime = (a_plus - a_minus) / (2 * h)
    if abs(a_prime) < 1e-10:
        raise ValueError("a'(z_k) vanishes: zero is not simple")
    return b_val / a_prime


# ---------------------------------------------------------------------------
# spectral weights kappa, chi, delta
# ---------------------------------------------------------------------------

def kappa_weight(s: complex, q: float) -> complex:
    """-(1/2 pi) log(1 + |r0|^2), analytically continued off the real axis."""
    s = complex(s)
    nu = nu_imag_cut(s, q) if s != 0 else complex(q)
    return -cmath.log(1.0 + q * q / (nu + s) ** 2) / (2 * math.pi)


def chi_integral(z: complex, a: float, q: float, quad: QuadratureSpec | None = None,
                 side: int | None = None) -> complex:
    """chi(z, a) = i * integral_{-inf}^{a} kappa(s) / (s - z) ds.

    For real z strictly below a, pass side=+1 (limit from above) or -1; the
    contour is deformed around s = z into the opposite half-plane, which is
    the analytic continuation of the corresponding boundary value.
    """
    z = complex(z)
    if quad is None:
        quad = QuadratureSpec(target_abs_tol=1e-11)

    def f(s: complex) -> complex:
        return kappa_weight(s, q) / (s - z)

    if z.imag == 0 and z.real < a:
        if side is None:
            raise BranchBoundaryError("real z below a: request side=+1 or -1")
        d = 0.5 * min(a - z.real, q)
        # detour into the half-plane opposite the requested side: below z for
        # the +-side limit, above z for the --side limit
        arc = [z + d * cmath.exp(1j * math.pi * (1 + side * k / 16)) for k in range(17)]
        tail = -quad_ray_to_inf(f, z.real - d, -1.0, 2, quad)
        mid = quad_path(f, arc, quad)
        head = quad_path(f, [z.real + d, a], quad)
        return 1j * (tail + mid + head)

    tail_spec = QuadratureSpec(target_abs_tol=quad.target_abs_tol,
                               max_subdivisions=quad.max_subdivisions)
    total = -quad_ray_to_inf(f, a, -1.0, 2, tail_spec)
    return 1j * total


def spectral_weights(z: complex, xi0: float, xi1: float, p: BarrierParams,
                     quad: QuadratureSpec | None = None, side: int | None = None) -> SpectralWeights:
    """kappa, chi(z, xi0), chi(z, xi1), and delta = exp(chi0 + chi1)."""
    if not (xi1 < xi0):
        raise ValueError("arguments must satisfy xi1 < xi0")
    z = complex(z)
    if z.imag == 0 and side is None and z.real < xi0:
        raise BranchBoundaryError("real z: request side=+1 or -1")
    chi0 = chi_integral(z, xi0, p.q, quad, side=side if z.imag == 0 else None)
    chi1 = chi_integral(z, xi1, p.q, quad, side=side if z.imag == 0 else None)
    return SpectralWeights(
        kappa=kappa_weight(z, p.q),
        chi_xi0=chi0,
        chi_xi1=chi1,
        delta=cmath.exp(chi0 + chi1),
    )


# ---------------------------------------------------------------------------
# piecewise-constant (multi-step) potentials
# ---------------------------------------------------------------------------

def multistep_scattering(steps: Sequence[tuple[tuple[float, float], complex]],
                         z: complex, eps: float) -> np.ndarray:
    """Scattering matrix of a piecewise-constant potential on [-L, L].

    steps is a list of ((x_left, x_right), amplitude); intervals must tile
    [-L, L] contiguously. The matrix is the ordered product of constant-
    coefficient transfer exponentials conjugated by the free phases.
    """
    if not steps:
        raise ValueError("empty step list")
    xs = [s[0] for s in steps]
    for (left, right) in xs:
        if not (right > left):
            raise ValueError("each interval needs x_right > x_left")
    for (_, right_prev), (left_next, _) in zip(xs[:-1], xs[1:]):
        if abs(right_prev - left_next) > 1e-12:
            raise ValueError("intervals do not tile contiguously")
    L = xs[-1][1]
    if abs(xs[0][0] + L) > 1e-12:
        raise ValueError("partition must cover a symmetric interval [-L, L]")

    z = complex(z)
    out = np.eye(2, dtype=complex)
    for (left, right), amp in steps:
        dx = (right - left) / eps
        amp = complex(amp)
        w = cmath.sqrt(z * z + abs(amp) ** 2)
        m = np.array([[-1j * z, amp], [-amp.conjugate(), 1j * z]], dtype=complex)
        block = cmath.cos(w * dx) * np.eye(2) + dx * _csinc(w * dx) * m
        out = out @ block
    free = np.array([[cmath.exp(1j * z * L / eps), 0], [0, cmath.exp(-1j * z * L / eps)]])
    return free @ out @ free
