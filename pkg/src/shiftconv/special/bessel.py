"""K-Bessel functions.

Real and complex order use the integral K_nu(x) = int_0^inf exp(-x cosh t) cosh(nu t) dt,
whose integrand decays doubly exponentially, so the trapezoid rule converges
geometrically in the step.  Imaginary order at complex argument goes through a
Mellin-Barnes line integral, and the Kuznetsov arc integral composes that with
Gauss-Legendre quadrature in the angle.
"""

from __future__ import annotations

import cmath
import math

import numpy as np

from ..errors import ContractViolation
from ._values import Method, QuadratureBudget, SpecialValue
from .gamma import loggamma, loggamma_abs_error

_EPS = 2.220446049250313e-16
_LOG_TINY = math.log(5e-324)
_DECAY = 40.0  # integrand cut where it is e^-40 below its peak
_MB_EPS = 1e-3
MB_ABSCISSA = 0.25 - _MB_EPS
DEFAULT_T_LIMIT = 10.0


def _check_x(x) -> float:
    if isinstance(x, complex) and x.imag != 0:
        raise ContractViolation("bessel_k requires a real argument")
    x = float(x.real if isinstance(x, complex) else x)
    if not (math.isfinite(x) and x > 0):
        raise ContractViolation(f"bessel_k requires x > 0, got {x}")
    return x


def _cutoff(a: float, x: float) -> float:
    """Smallest t with x(cosh t - 1) - a t below its peak by _DECAY."""
    # peak of a t - x(cosh t - 1) is at sinh t = a/x
    t_peak = math.asinh(a / x) if a > 0 else 0.0
    peak = a * t_peak - x * (math.cosh(t_peak) - 1)
    t = max(t_peak, 1.0)
    while a * t - x * (math.cosh(t) - 1) > peak - _DECAY:
        t *= 1.25
    return t


def _cosh_m1(t):
    # cosh t - 1 without cancellation near 0
    return 2 * np.sinh(0.5 * t) ** 2


def _trapezoid(nu: complex, x: float, h: float, t_max: float):
    t = np.arange(0.0, t_max + h, h)
    f = np.exp(-x * _cosh_m1(t)) * np.cosh(nu * t)
    f[0] *= 0.5
    return h * f.sum(), h * np.abs(f).sum()


def bessel_k(nu, x, budget: QuadratureBudget | None = None) -> SpecialValue:
    """K_nu(x) for complex order and real x > 0."""
    budget = budget or QuadratureBudget()
    nu = complex(nu)
    x = _check_x(x)
    a = abs(nu.real)
    # K_nu(x) <= exp(-x) sqrt(pi/2x) exp(a^2/2x)
    if -x + 0.5 * math.log(math.pi / (2 * x)) + a * a / (2 * x) < _LOG_TINY:
        return SpecialValue(0.0, 5e-324, Method.UNDERFLOW)
    t_max = _cutoff(a, x)
    h = min(0.5, t_max / 8)
    prev, _ = _trapezoid(nu, x, h, t_max)
    while True:
        h /= 2
        if t_max / h > budget.max_nodes:
            raise ContractViolation("bessel_k node budget exhausted")
        cur, mag = _trapezoid(nu, x, h, t_max)
        delta = abs(cur - prev)
        rounding = 8 * _EPS * mag
        # delta bounds the error of the coarser rule, hence of this one
        est = delta + rounding
        if delta <= max(1e-15 * mag, rounding):
            break
        prev = cur
    scale = math.exp(-x)
    tail = math.exp(-_DECAY) * mag
    value = scale * cur
    if nu.imag == 0:
        value = value.real
    return SpecialValue(value, scale * (est + tail), Method.TRAPEZOID_COSH)


def bessel_k_array(nu, x, h: float = 0.05, chunk: int = 2048):
    """Vectorised K_nu(x) for an array of x > 0 with a fixed step.

    Returns ``(values, abs_error_bounds)``.  The step 0.05 leaves a
    discretisation error far below rounding for |nu| <= 5.
    """
    nu = complex(nu)
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)):
        raise ContractViolation("bessel_k_array requires x > 0")
    a = abs(nu.real)
    out = np.zeros(x.shape, dtype=complex)
    err = np.zeros(x.shape)
    flat_x, flat_out, flat_err = x.ravel(), out.reshape(-1), err.reshape(-1)
    live = -flat_x + 0.5 * np.log(np.pi / (2 * flat_x)) + a * a / (2 * flat_x) >= _LOG_TINY
    err_floor = np.where(live, 0.0, 5e-324)
    # sort so each chunk spans a narrow range of x and can share one grid
    idx = np.flatnonzero(live)
    idx = idx[np.argsort(flat_x[idx], kind="stable")]
    for start in range(0, idx.size, chunk):
        sel = idx[start : start + chunk]
        xs = flat_x[sel]
        # Gaussian width 1/sqrt(x): trapezoid error about 2 exp(-2 pi^2 / (x h^2))
        step = min(h, 0.6 / math.sqrt(xs[-1]))
        t = np.arange(0.0, _cutoff(a, float(xs[0])) + step, step)
        ct = _cosh_m1(t)
        w = np.cosh(nu * t)
        w[0] *= 0.5
        g = np.exp(-xs[:, None] * ct[None, :])
        vals = step * (g @ w)
        mag = step * (g @ np.abs(w))
        # rounding of the exponent x (cosh t - 1) enters as a relative error
        expo = step * ((g * (xs[:, None] * ct[None, :])) @ np.abs(w))
        scale = np.exp(-xs)
        disc = 2 * np.exp(-2 * math.pi**2 / (xs * step * step))
        flat_out[sel] = scale * vals
        flat_err[sel] = scale * (mag * (8 * _EPS + math.exp(-_DECAY) + disc) + 2 * _EPS * expo)
    flat_err += err_floor
    if nu.imag == 0:
        out = out.real
    return out, err


def _mb_log_envelope(v, T, r, phi, sigma):
    """log of a bound on the Mellin-Barnes integrand at height v."""
    v = np.abs(v)
    # |Gamma(sigma + i y)| <= sqrt(2 pi) (1 + |y|)^(sigma - 1/2) e^{-pi |y| / 2} for 0 < sigma < 1/2, up to a small factor
    return (
        (sigma - 0.5) * (np.log1p(np.abs(v - T)) + np.log1p(v + T))
        + math.log(2 * math.pi) + 1.0
        - 0.5 * math.pi * (np.abs(v - T) + v + T)
        - 2 * sigma * math.log(r / 2)
        + 2 * abs(phi) * v
    )


def bessel_k_imag_order(T, z, budget: QuadratureBudget | None = None, t_limit: float = DEFAULT_T_LIMIT) -> SpecialValue:
    """K_{2iT}(z) for Re z > 0 by the Mellin-Barnes integral

    K_{2iT}(z) = (1/4 pi) int Gamma(u - iT) Gamma(u + iT) (z/2)^{-2u} dv,  u = sigma + iv,

    with sigma = 1/4 - 1e-3.  The line is truncated at the height where the
    Stirling envelope of the integrand falls below the target error.
    """
    budget = budget or QuadratureBudget()
    T = float(T)
    z = complex(z)
    if not z.real > 0:
        raise ContractViolation(f"bessel_k_imag_order requires Re z > 0, got {z}")
    if abs(T) > t_limit:
        raise ContractViolation(f"|T| = {abs(T)} exceeds the configured limit {t_limit}")
    sigma = budget.abscissa if budget.abscissa is not None else MB_ABSCISSA
    if not 0 < sigma:
        raise ContractViolation("Mellin-Barnes abscissa must be positive")
    r, phi = abs(z), cmath.phase(z)
    rate = math.pi - 2 * abs(phi)
    tol = budget.target_abs_error * 1e-2
    V = budget.height
    if V is None:
        V = abs(T) + 5.0
        while _mb_log_envelope(V, abs(T), r, phi, sigma) - math.log(rate) > math.log(tol):
            V *= 1.5
    h = 0.05
    K = math.ceil(V / h)
    n = 2 * K + 1
    if n > budget.max_nodes:
        raise ContractViolation(f"Mellin-Barnes quadrature needs {n} nodes, budget is {budget.max_nodes}")
    # nodes must be exact multiples of h; linspace jitter costs up to 1e-12
    v = np.arange(-K, K + 1) * h
    u = sigma + 1j * v
    log_z2 = cmath.log(z / 2)
    f = np.exp(loggamma(u - 1j * T) + loggamma(u + 1j * T) - 2 * u * log_z2)
    full = f.sum() * h / (4 * math.pi)
    half = f[::2].sum() * 2 * h / (4 * math.pi)
    delta = abs(full - half)
    af = np.abs(f)
    mag = af.sum() * h / (4 * math.pi)
    # exp of a large exponent carries its absolute rounding error as a relative one
    exponent = loggamma_abs_error(u - 1j * T) + loggamma_abs_error(u + 1j * T)
    exponent = exponent + _EPS * (8 * np.abs(u) * abs(log_z2) + 8)
    rounding = (af * exponent).sum() * h / (4 * math.pi) + 32 * _EPS * mag
    # poles sit at distance sigma from the line, so halving h multiplies the
    # aliasing error by about exp(-pi sigma / h) whatever its amplitude
    alias = 10 * delta * math.exp(-math.pi * sigma / h)
    est = max(10 * delta * delta / max(mag, 1e-300), alias, rounding) + tol
    value = complex(full)
    return SpecialValue(value, est, Method.MELLIN_BARNES)


def _arc_rule(T, beta, nodes_per_panel, panels, budget):
    x, w = np.polynomial.legendre.leggauss(nodes_per_panel)
    edges = np.linspace(-math.pi / 2, math.pi / 2, panels + 1)
    total = 0j
    err = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
        for xi, wi in zip(x, w):
            p = mid + half * xi
            k = bessel_k_imag_order(T, beta * cmath.exp(1j * p), budget)
            total += wi * half * k.value * cmath.exp(-1j * p)
            err += wi * half * k.abs_error_estimate
    return 1j * total, err


def kuznetsov_geometric_integral(T, beta, nodes_per_panel: int = 24, panels: int | None = None,
                                 budget: QuadratureBudget | None = None) -> SpecialValue:
    """I_T(beta) = int K_{2iT}(beta zeta) zeta^{-2} d zeta over the right half of the unit circle.

    With zeta = e^{i phi} this is i int_{-pi/2}^{pi/2} K_{2iT}(beta e^{i phi}) e^{-i phi} d phi.
    Gauss-Legendre nodes are interior, so the Mellin-Barnes integrand always
    decays; the estimate compares ``nodes_per_panel`` against twice as many.
    """
    T = float(T)
    beta = float(beta)
    if not 0 < T <= DEFAULT_T_LIMIT:
        raise ContractViolation(f"kuznetsov_geometric_integral requires 0 < T <= {DEFAULT_T_LIMIT}")
    if not beta > 0:
        raise ContractViolation("kuznetsov_geometric_integral requires beta > 0")
    budget = budget or QuadratureBudget(max_nodes=20_000_000, target_abs_error=1e-10)
    if panels is None:
        # the integrand oscillates like exp(-i beta sin phi)
        panels = 4 * max(1, math.ceil(beta / 50))
    coarse, _ = _arc_rule(T, beta, nodes_per_panel, panels, budget)
    fine, inner = _arc_rule(T, beta, 2 * nodes_per_panel, panels, budget)
    return SpecialValue(fine, abs(fine - coarse) + inner, Method.ARC_GAUSS_LEGENDRE)
