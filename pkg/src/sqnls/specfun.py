"""Special functions and complex-path quadrature kernels.

Everything here is self-contained: complete elliptic integrals (AGM
production scheme plus an independent power-series scheme for
cross-checking), the real dilogarithm, the genus-1 theta sum, and an
adaptive Gauss-Legendre quadrature over complex polylines with
endpoint-singularity substitutions and semi-infinite tail maps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "QuadratureSpec",
    "QuadratureConvergenceError",
    "complete_elliptic",
    "ellipk",
    "ellipe",
    "complete_elliptic_series",
    "dilog",
    "theta_sum",
    "quad_path",
    "quad_ray_to_inf",
    "stadium_polyline",
]

_LN_INV_EPS = math.log(1e16)


class QuadratureConvergenceError(RuntimeError):
    """Tolerance not reached within the panel budget.

    Carries the best estimate and its error bound so callers can decide
    whether to accept a degraded result.
    """

    def __init__(self, message: str, estimate: complex, error_bound: float):
        super().__init__(message)
        self.estimate = estimate
        self.error_bound = error_bound


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerance and endpoint handling for a path integral.

    endpoint_singularity is one of 'none', 'inverse_sqrt_left',
    'inverse_sqrt_right', 'inverse_sqrt_both', 'log_left', 'log_right'.
    Half-integer powers (both +1/2 and -1/2) are removed by the square-root
    substitution, so 'inverse_sqrt_*' also covers integrands vanishing like
    sqrt at an endpoint.
    """

    target_abs_tol: float = 1e-10
    max_subdivisions: int = 400
    endpoint_singularity: str = "none"

    def __post_init__(self):
        if not (self.target_abs_tol > 0):
            raise ValueError("target_abs_tol must be positive")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")
        allowed = {
            "none",
            "inverse_sqrt_left",
            "inverse_sqrt_right",
            "inverse_sqrt_both",
            "log_left",
            "log_right",
        }
        if self.endpoint_singularity not in allowed:
            raise ValueError(f"unknown endpoint_singularity {self.endpoint_singularity!r}")


# ---------------------------------------------------------------------------
# complete elliptic integrals
# ---------------------------------------------------------------------------

def ellipk(m: float) -> float:
    """K(m) by the arithmetic-geometric mean, parameter convention m = k^2."""
    if not (isinstance(m, (int, float)) and math.isfinite(m)):
        raise ValueError("m must be a finite real number")
    if m < 0 or m >= 1:
        raise ValueError("K(m) requires 0 <= m < 1 (K diverges logarithmically at m = 1)")
    a, b = 1.0, math.sqrt(1.0 - m)
    for _ in range(64):
        if abs(a - b) <= 4e-16 * a:
            break
        a, b = 0.5 * (a + b), math.sqrt(a * b)
    return math.pi / (2.0 * a)


def ellipe(m: float) -> float:
    """E(m) by the AGM with the c_n correction sum; defined for 0 <= m <= 1."""
    if not (isinstance(m, (int, float)) and math.isfinite(m)):
        raise ValueError("m must be a finite real number")
    if m < 0 or m > 1:
        raise ValueError("E(m) requires 0 <= m <= 1")
    if m == 1.0:
        return 1.0
    a, b, c = 1.0, math.sqrt(1.0 - m), math.sqrt(m)
    csum = 0.5 * c * c
    pow2 = 1.0
    for _ in range(64):
        if abs(c) <= 4e-16 * a:
            break
        a, b, c = 0.5 * (a + b), math.sqrt(a * b), 0.5 * (a - b)
        pow2 *= 2.0
        csum += 0.5 * pow2 * c * c
    return math.pi / (2.0 * a) * (1.0 - csum)


def complete_elliptic(m: float) -> tuple[float, float]:
    """Return (K(m), E(m)); rejects m >= 1 since K diverges there."""
    return ellipk(m), ellipe(m)


def complete_elliptic_series(m: float, rel_tol: float = 1e-16) -> tuple[float, float]:
    """Independent evaluation of (K, E) by the hypergeometric power series.

    Kept as the verification scheme for the AGM production code; converges
    for 0 <= m < 1, slowly near 1.
    """
    if not (0 <= m < 1):
        raise ValueError("series form requires 0 <= m < 1")
    coeff = 1.0  # ((2n)! / (2^{2n} (n!)^2))^2 m^n
    k_sum = 1.0
    e_sum = 1.0
    n = 0
    while True:
        n += 1
        coeff *= ((2 * n - 1) / (2 * n)) ** 2 * m
        k_sum += coeff
        e_sum -= coeff / (2 * n - 1)
        if coeff < rel_tol * k_sum and n > 4:
            break
        if n > 100000:
            raise QuadratureConvergenceError("elliptic series did not converge", k_sum, coeff)
    return math.pi / 2 * k_sum, math.pi / 2 * e_sum


# ---------------------------------------------------------------------------
# real dilogarithm
# ---------------------------------------------------------------------------

def _dilog_series(x: float) -> float:
    # |x| <= 1/2: plain power series sum_{k>=1} x^k / k^2
    total = 0.0
    term = 1.0
    for k in range(1, 80):
        term *= x
        inc = term / (k * k)
        total += inc
        if abs(inc) < 1e-18:
            break
    return total


def dilog(x: float) -> float:
    """Real dilogarithm Li2(x) for x <= 1.

    Series on |x| <= 1/2; the reflection Li2(x) + Li2(1-x) = pi^2/6
    - ln(x) ln(1-x) on (1/2, 1); the Landen transform on (-1, -1/2); and the
    inversion Li2(x) = -Li2(1/x) - pi^2/6 - ln(-x)^2 / 2 for x < -1.
    """
    if not (isinstance(x, (int, float)) and math.isfinite(x)):
        raise ValueError("dilog argument must be a finite real number")
    x = float(x)
    if x > 1.0:
        raise ValueError("dilog is real only for x <= 1")
    if x == 1.0:
        return math.pi ** 2 / 6
    if x == 0.0:
        return 0.0
    if x < -1.0:
        return -dilog(1.0 / x) - math.pi ** 2 / 6 - 0.5 * math.log(-x) ** 2
    if x < -0.5:
        # Landen: Li2(x) = -Li2(x/(x-1)) - ln(1-x)^2 / 2, maps into (0, 1/2)
        return -_dilog_series(x / (x - 1.0)) - 0.5 * math.log1p(-x) ** 2
    if x <= 0.5:
        return _dilog_series(x)
    return math.pi ** 2 / 6 - math.log(x) * math.log1p(-x) - dilog(1.0 - x)


# ---------------------------------------------------------------------------
# genus-1 theta sum
# ---------------------------------------------------------------------------

def theta_sum(w: complex, H: float, n_override: int | None = None) -> complex:
    """Theta(w; H) = sum_n exp(n^2 H / 2 - n w), H < 0.

    The truncation index N is the smallest integer with
    N^2 |H|/2 - N max(|Re w|, |H|) >= ln(1e16), which makes the tail
    geometric with first omitted term below 1e-16 of the n = 0 term.
    """
    if not math.isfinite(H) or H >= 0:
        raise ValueError("theta_sum requires H < 0 (series diverges otherwise)")
    w = complex(w)
    if not (math.isfinite(w.real) and math.isfinite(w.imag)):
        raise ValueError("theta_sum requires finite w")
    if n_override is None:
        big = max(abs(w.real), abs(H))
        n_trunc = int(math.ceil((big + math.sqrt(big * big + 2.0 * abs(H) * _LN_INV_EPS)) / abs(H))) + 2
    else:
        n_trunc = int(n_override)
    if n_trunc > 2_000_000:
        raise QuadratureConvergenceError(
            f"theta truncation index {n_trunc} exceeds hard cap", 0.0, math.inf
        )
    n = np.arange(-n_trunc, n_trunc + 1)
    return complex(np.sum(np.exp(0.5 * H * n * n - n * w)))


# ---------------------------------------------------------------------------
# adaptive Gauss-Legendre over complex polylines
# ---------------------------------------------------------------------------

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(15)


def _gl_panel(f, a: float, b: float) -> complex:
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    return half * sum(w * f(mid + half * x) for x, w in zip(_GL_NODES, _GL_WEIGHTS))


def _adaptive_gl(f, a: float, b: float, tol: float, max_panels: int) -> complex:
    """Bisect the worst panel until the summed error estimate meets tol."""
    whole = _gl_panel(f, a, b)
    left = _gl_panel(f, a, 0.5 * (a + b))
    right = _gl_panel(f, 0.5 * (a + b), b)
    panels = [(abs(whole - left - right), a, b, left + right)]
    while True:
        total_err = sum(p[0] for p in panels)
        if total_err <= tol:
            return sum(p[3] for p in panels)
        if len(panels) >= max_panels:
            best = sum(p[3] for p in panels)
            raise QuadratureConvergenceError(
                f"adaptive quadrature: error {total_err:.3e} > tol {tol:.3e} "
                f"after {len(panels)} panels",
                best,
                total_err,
            )
        panels.sort(key=lambda p: p[0])
        _, pa, pb, _ = panels.pop()
        pm = 0.5 * (pa + pb)
        for qa, qb in ((pa, pm), (pm, pb)):
            whole = _gl_panel(f, qa, qb)
            lft = _gl_panel(f, qa, 0.5 * (qa + qb))
            rgt = _gl_panel(f, 0.5 * (qa + qb), qb)
            panels.append((abs(whole - lft - rgt), qa, qb, lft + rgt))


def _segment_quad(f, z0: complex, z1: complex, tol: float, max_panels: int,
                  sub_left: str = "none", sub_right: str = "none") -> complex:
    """Integrate f along the straight segment z0 -> z1.

    sub_left / sub_right in {'none', 'sqrt', 'log'} select the variable
    substitution removing the endpoint singularity; 'sqrt' and 'log' both
    use u -> u^2 (the square-root map also regularizes u log u terms after
    the extra Jacobian factor).
    """
    d = z1 - z0
    if sub_left == "none" and sub_right == "none":
        return _adaptive_gl(lambda s: f(z0 + s * d) * d, 0.0, 1.0, tol, max_panels)
    if sub_left != "none" and sub_right != "none":
        # split at the midpoint and substitute from each end
        zm = z0 + 0.5 * d
        return (_segment_quad(f, z0, zm, 0.5 * tol, max_panels, sub_left=sub_left)
                + _segment_quad(f, zm, z1, 0.5 * tol, max_panels, sub_right=sub_right))
    if sub_right != "none":
        # mirror so the singular endpoint sits on the left
        return _segment_quad(lambda z: f(z), z1, z0, tol, max_panels, sub_left=sub_right) * -1.0
    # singular endpoint at z0: lambda = z0 + d u^2, d lambda = 2 d u du
    return _adaptive_gl(lambda u: f(z0 + d * u * u) * 2.0 * d * u, 0.0, 1.0, tol, max_panels)


def quad_path(integrand, path, spec: QuadratureSpec | None = None) -> complex:
    """Integrate a complex-valued function along a polyline.

    path is a sequence of complex vertices; consecutive vertices are joined
    by straight segments. Declared endpoint singularities refer to the
    first / last vertex of the polyline.
    """
    if spec is None:
        spec = QuadratureSpec()
    pts = [complex(p) for p in path]
    if len(pts) < 2:
        raise ValueError("path needs at least two vertices")
    kind = spec.endpoint_singularity
    left = "none"
    right = "none"
    if kind in ("inverse_sqrt_left", "inverse_sqrt_both"):
        left = "sqrt"
    if kind in ("inverse_sqrt_right", "inverse_sqrt_both"):
        right = "sqrt"
    if kind == "log_left":
        left = "log"
    if kind == "log_right":
        right = "log"

    nseg = len(pts) - 1
    tol_per = spec.target_abs_tol / nseg
    total = 0.0 + 0.0j
    for i in range(nseg):
        sl = left if i == 0 else "none"
        sr = right if i == nseg - 1 else "none"
        total += _segment_quad(integrand, pts[i], pts[i + 1], tol_per,
                               spec.max_subdivisions, sub_left=sl, sub_right=sr)
    return total


def quad_ray_to_inf(integrand, start: complex, direction: complex, decay_power: float,
                    spec: QuadratureSpec | None = None) -> complex:
    """Integrate from `start` to infinity along `direction`.

    The semi-infinite ray is mapped to [0, 1) by lambda = start + u/(1-u) *
    direction, which needs an algebraic decay rate >= 2 from the caller to
    bound the transformed integrand at u = 1. Endpoint singularities of the
    spec apply to the finite end.
    """
    if spec is None:
        spec = QuadratureSpec()
    if decay_power < 2:
        raise ValueError("tail map requires integrand decay at least |lambda|^-2")
    d = complex(direction)
    if d == 0:
        raise ValueError("direction must be nonzero")
    d /= abs(d)

    def g(u: float) -> complex:
        lam = start + d * (u / (1.0 - u))
        return integrand(lam) * d / (1.0 - u) ** 2

    kind = spec.endpoint_singularity
    if kind in ("inverse_sqrt_left", "log_left"):
        # remove the finite-end singularity with u -> u^2 before the tail map
        return _adaptive_gl(lambda v: g(v * v) * 2.0 * v, 0.0, 1.0,
                            spec.target_abs_tol, spec.max_subdivisions)
    if kind != "none":
        raise ValueError("only left-endpoint singularities make sense on a ray to infinity")
    return _adaptive_gl(g, 0.0, 1.0, spec.target_abs_tol, spec.max_subdivisions)


def stadium_polyline(p0: complex, p1: complex, offset: float, n_arc: int = 24) -> list[complex]:
    """Closed stadium-shaped polyline at distance `offset` around segment [p0, p1].

    Counterclockwise orientation (positive winding about the segment).
    Used to realize loop integrals around branch cuts.
    """
    if offset <= 0:
        raise ValueError("offset must be positive")
    t = (p1 - p0) / abs(p1 - p0)
    n = 1j * t
    pts: list[complex] = [p0 - offset * n, p1 - offset * n]
    # half-turn around p1 from -n through +t to +n, then back and around p0
    for k in range(1, n_arc):
        ang = math.pi * k / n_arc
        pts.append(p1 + offset * (-n * math.cos(ang) + t * math.sin(ang)))
    pts.append(p1 + offset * n)
    pts.append(p0 + offset * n)
    for k in range(1, n_arc):
        ang = math.pi * k / n_arc
        pts.append(p0 + offset * (n * math.cos(ang) - t * math.sin(ang)))
    pts.append(p0 - offset * n)
    return pts
