"""Zero-level-set geometry of the modified phases and the breaking curves.

The pre-break phase geometry is controlled by a one-parameter family of
level sets Im(2 nu (t z + b) - t q^2) = 0; their topology is known in
closed form. The post-break boundary comes from a double-root condition on
the derivative density rho1 of the second modified phase.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, minimize_scalar

__all__ = [
    "LevelTopology",
    "TracedContour",
    "SaddleError",
    "level_topology",
    "trace_zero_level",
    "rho1_real_roots",
    "rho1_value",
    "first_breaking_time",
    "second_breaking_time",
    "quartic_surd",
    "big_s",
]


class SaddleError(RuntimeError):
    """Trace ran into a point with vanishing phase gradient."""

    def __init__(self, message: str, points: list[complex]):
        super().__init__(message)
        self.points = points


@dataclass(frozen=True)
class LevelTopology:
    """Topology of the level set Im(2 nu (tz + b) - t q^2) = 0 in C+.

    case 'initial' (t = 0): the set is R together with the segment
    [-iq, iq]; 'pre_break': a finite arc joining +-iq crossing R at the
    smaller point and an infinite branch crossing at the larger one;
    'post_break': no real crossings remain.
    """

    case: str
    crossings: tuple[float, ...]
    asymptote: float | None


@dataclass
class TracedContour:
    """Polyline on a zero level of an Im(phase), with labeled termini."""

    points: np.ndarray
    endpoints: tuple[str, str]
    step_bound: float = 0.0

    def conjugate(self) -> "TracedContour":
        return TracedContour(np.conj(self.points[::-1]),
                             (self.endpoints[1], self.endpoints[0]), self.step_bound)


def quartic_surd(b: float, t: float, q: float) -> float:
    """sqrt(1 - 8 t^2 q^2 / b^2); negative radicand raises past-breaking."""
    rad = 1.0 - 8.0 * t * t * q * q / (b * b)
    if rad < 0:
        raise ValueError(f"t = {t} is past the breaking time |b|/(2 sqrt2 q) for b = {b}")
    return math.sqrt(rad)


def level_topology(b: float, t: float, q: float) -> LevelTopology:
    """Evolution of the zero level of Im(2 nu (tz+b) - t q^2) with time."""
    if b == 0:
        raise ValueError("b must be nonzero")
    if t < 0:
        raise ValueError("t must be >= 0")
    if t == 0:
        return LevelTopology("initial", (), None)
    t_c = abs(b) / (2.0 * math.sqrt(2.0) * q)
    if t > t_c:
        return LevelTopology("post_break", (), -b / (2 * t))
    surd = quartic_surd(b, t, q)
    z0 = -b / (4 * t) * (1.0 - surd)
    z1 = -b / (4 * t) * (1.0 + surd)
    return LevelTopology("pre_break", (z0, z1), -b / (2 * t))


def trace_zero_level(phase, seed: complex, stop, *, direction: complex,
                     base_step: float, corrector_tol: float = 1e-10,
                     max_steps: int = 20000) -> TracedContour:
    """Predictor-corrector march along Im phase = 0 starting at `seed`.

    phase(z) must return (value, derivative). `stop(z)` returns a terminus
    label (string) once the trace should end, else None. `direction` picks
    the branch leaving the seed. The corrector is a Newton step in the
    normal direction, driven below corrector_tol at every accepted point.
    """
    pts: list[complex] = []
    z = complex(seed)
    val, der = phase(z)
    if abs(val.imag) > 1e-6:
        raise ValueError(f"seed is not on the level set: Im phase = {val.imag:.3e}")
    if abs(der) < 1e-12:
        raise SaddleError("phase gradient vanishes at the seed", pts)
    tangent = der.conjugate() / abs(der)
    if (tangent.real * direction.real + tangent.imag * direction.imag) < 0:
        tangent = -tangent
    pts.append(z)
    h = base_step
    label = None
    for _ in range(max_steps):
        lbl = stop(z)
        if lbl is not None:
            label = lbl
            break
        accepted = False
        while h >= base_step / 1024:
            z_try = z + h * tangent
            ok = True
            for _ in range(5):
                val, der = phase(z_try)
                if abs(der) < 1e-12:
                    raise SaddleError(f"gradient degenerate near {z_try}", pts)
                corr = -val.imag / abs(der)
                z_try = z_try + 1j * corr * der.conjugate() / abs(der)
                if abs(corr) < corrector_tol:
                    break
            else:
                ok = False
            if ok:
                val, der = phase(z_try)
                if abs(val.imag) > 10 * corrector_tol:
                    ok = False
            if ok:
                accepted = True
                break
            h *= 0.5
        if not accepted:
            raise SaddleError(f"corrector failed to converge near {z}", pts)
        new_tangent = der.conjugate() / abs(der)
        if (new_tangent.real * tangent.real + new_tangent.imag * tangent.imag) < 0:
            new_tangent = -new_tangent
        tangent = new_tangent
        z = z_try
        pts.append(z)
        h = min(base_step, h * 1.5)
    else:
        raise RuntimeError("trace exceeded max_steps without hitting a terminus")
    return TracedContour(np.array(pts, dtype=complex), ("seed", label), base_step)


# ---------------------------------------------------------------------------
# the second-phase density rho1 and the two breaking curves
# ---------------------------------------------------------------------------

def big_s(z: complex, alpha: complex, q: float) -> complex:
    """S(z) = sqrt((z - alpha)(z - alpha*) / (z^2 + q^2)) -> 1 at infinity.

    Branched on the straight segments [iq, alpha] and [alpha*, -iq]; on the
    real axis S is positive. Assembled from two quadratic square roots cut
    exactly on those segments.
    """
    return big_r(z, alpha, q) / (z * z + q * q)


def big_r(z: complex, alpha: complex, q: float) -> complex:
    """R(z) = sqrt((z-iq)(z-alpha)(z+iq)(z-alpha*)) ~ z^2 at infinity.

    Cut along [iq, alpha] and [alpha*, -iq]. Each factor pair is evaluated
    as (z - c) sqrt(1 - (d/(z-c))^2) whose principal-branch cut is exactly
    the segment c +- d.
    """
    z = complex(z)
    a = complex(alpha)
    c1 = 0.5 * (1j * q + a)
    d1 = 0.5 * (a - 1j * q)
    c2 = c1.conjugate()
    d2 = d1.conjugate()
    f1 = (z - c1) * cmath.sqrt(1.0 - (d1 / (z - c1)) ** 2) if z != c1 else 1j * abs(d1) * _mid_sign(c1, d1)
    f2 = (z - c2) * cmath.sqrt(1.0 - (d2 / (z - c2)) ** 2) if z != c2 else 1j * abs(d2) * _mid_sign(c2, d2)
    return f1 * f2


def _mid_sign(c: complex, d: complex) -> complex:
    # value at the cut midpoint is ambiguous; nudge off the segment
    z = c + 1e-12 * 1j * d / abs(d)
    return (z - c) * cmath.sqrt(1.0 - (d / (z - c)) ** 2) / (1j * abs(d))


def rho1_value(lam: float, alpha: complex, xi0: float, t: float, L: float, q: float) -> float:
    """rho1 on the negative real axis with the real-axis branch values.

    rho1 = 4 t S(lam)(lam - xi0) + 4 L lam / nu(lam); S is the positive real
    branch and nu = sign(lam) sqrt(lam^2 + q^2).
    """
    s_val = big_s(lam, alpha, q)
    s_real = abs(s_val)  # S > 0 on R, continuity from S -> 1 at -infinity
    nu = math.copysign(math.sqrt(lam * lam + q * q), lam) if lam != 0 else q
    return 4.0 * t * s_real * (lam - xi0) + 4.0 * L * lam / nu


def rho1_real_roots(alpha: complex, xi0: float, t: float, L: float, q: float,
                    double_tol: float = 1e-9) -> list[float]:
    """Real zeros of rho1 on lambda < 0: two simple roots, one double, or none.

    The function is negative at both window ends with at most one interior
    bump, so the root count follows the sign of the bump maximum. A double
    root (|max| < double_tol) is reported twice.
    """
    if t <= 0:
        raise ValueError("t must be positive")
    lam_hi = -1e-9 * q
    lam_lo = -(2.0 * L / t + 10.0 * q + 2.0 * abs(xi0))

    def f(lam: float) -> float:
        return rho1_value(lam, alpha, xi0, t, L, q)

    res = minimize_scalar(lambda u: -f(u), bounds=(lam_lo, lam_hi), method="bounded",
                          options={"xatol": 1e-13})
    lam_star = float(res.x)
    f_star = f(lam_star)
    if abs(f_star) < double_tol:
        return [lam_star, lam_star]
    if f_star < 0:
        return []
    left = brentq(f, lam_lo, lam_star, xtol=1e-14)
    right = brentq(f, lam_star, lam_hi, xtol=1e-14)
    return [left, right]


def first_breaking_time(x: float, p) -> float:
    """T1(x) = (L - |x|) / (2 sqrt2 q) for |x| < L."""
    if abs(x) >= p.L:
        raise ValueError("first breaking time is defined only inside the support |x| < L")
    return (p.L - abs(x)) / (2.0 * math.sqrt(2.0) * p.q)


def second_breaking_time(x: float, p, tol: float = 1e-8) -> float:
    """The time at which the two negative roots of rho1 coalesce.

    At each trial t the endpoint alpha and xi0 are re-solved from the
    self-similar variable mu = (L - |x|)/(2t), then the bump maximum of
    rho1 is driven to zero by bisection in t. Returns T2(x) > T1(x); the
    residuals |rho1| and |rho1'| at the reported double root are below tol.
    """
    from .genus1 import solve_endpoint  # deferred: genus1 builds on this module

    x = abs(x)
    t1 = first_breaking_time(x, p)
    q, L = p.q, p.L

    def bump_max(t: float) -> tuple[float, float]:
        mu = (L - x) / (2.0 * t)
        state = solve_endpoint(mu, q)
        xi0 = mu - state.alpha.real
        lam_hi = -1e-9 * q
        lam_lo = -(2.0 * L / t + 10.0 * q + 2.0 * abs(xi0))
        res = minimize_scalar(lambda u: -rho1_value(u, state.alpha, xi0, t, L, q),
                              bounds=(lam_lo, lam_hi), method="bounded",
                              options={"xatol": 1e-13})
        return rho1_value(float(res.x), state.alpha, xi0, t, L, q), float(res.x)

    t_lo = t1 * 1.0001
    g_lo, _ = bump_max(t_lo)
    if g_lo <= 0:
        raise RuntimeError(f"no root pair just past T1(x) at x = {x}; bump max {g_lo}")
    t_hi = t_lo
    window = 10.0 * t1
    while True:
        t_hi = min(t_hi * 1.5, window)
        g_hi, _ = bump_max(t_hi)
        if g_hi < 0:
            break
        if t_hi >= window:
            window *= 4.0
            if window > 1e4 * t1:
                raise RuntimeError(f"double-root search window exhausted at x = {x}")

    t2 = brentq(lambda t: bump_max(t)[0], t_lo, t_hi, xtol=1e-13, rtol=8.9e-16)
    g_res, lam_star = bump_max(t2)
    mu = (L - x) / (2.0 * t2)
    state = solve_endpoint(mu, q)
    xi0 = mu - state.alpha.real
    h = 1e-6 * max(1.0, abs(lam_star))

    def d_rho1(lam: float) -> float:
        return (rho1_value(lam + h, state.alpha, xi0, t2, L, q)
                - rho1_value(lam - h, state.alpha, xi0, t2, L, q)) / (2 * h)

    # polish the critical point: the bounded minimizer leaves O(1e-8) slack
    for _ in range(4):
        d1 = d_rho1(lam_star)
        d2 = (d_rho1(lam_star + h) - d_rho1(lam_star - h)) / (2 * h)
        if d2 == 0 or abs(d1 / d2) < 1e-14 * max(1.0, abs(lam_star)):
            break
        lam_star -= d1 / d2
    g_res = rho1_value(lam_star, state.alpha, xi0, t2, L, q)
    dres = d_rho1(lam_star)
    if abs(g_res) > tol or abs(dres) > tol:
        raise RuntimeError(
            f"double-root residuals too large at x = {x}: |rho1| = {abs(g_res):.2e}, "
            f"|rho1'| = {abs(dres):.2e}")
    return t2
