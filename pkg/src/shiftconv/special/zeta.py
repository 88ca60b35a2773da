"""Riemann zeta, Hurwitz zeta and L(s, chi_4) by Euler-Maclaurin summation, plus completions."""

from __future__ import annotations

import cmath
import math

from ..errors import PoleError
from ._bernoulli import even_bernoulli_floats
from ._values import Method, SpecialValue
from .gamma import _sinpi, gamma_c

_EPS = 2.220446049250313e-16
_MAX_TERMS = 40
_B = even_bernoulli_floats(_MAX_TERMS + 1)
_FACT = [math.factorial(k) for k in range(2 * _MAX_TERMS + 3)]


def _plan(s: complex) -> int:
    return max(20, math.ceil(abs(s)) + 10)


def _em_tail(s: complex, x: float):
    """Euler-Maclaurin correction at x: returns (correction, remainder bound).

    correction = x^{-s}/2 + sum_k B_2k/(2k)! (s)_{2k-1} x^{-s-2k+1}; the pole
    term x^{1-s}/(s-1) is left to the caller.
    """
    xs = cmath.exp(-s * math.log(x))
    total = 0.5 * xs
    rising = s  # (s)_{2k-1}
    power = xs / x  # x^{-s-2k+1} at k = 1
    inv_x2 = 1 / (x * x)
    remainder = math.inf
    sigma = s.real
    for k in range(1, _MAX_TERMS + 1):
        total += _B[k - 1] / _FACT[2 * k] * rising * power
        # bound for stopping after term k: |(s)_{2k+2} B_{2k+2}| / ((2k+2)! (sigma+2k+1)) x^{-sigma-2k-1}
        nxt = rising * (s + 2 * k - 1) * (s + 2 * k) * (s + 2 * k + 1)
        if sigma + 2 * k + 1 > 0:
            remainder = (
                abs(nxt * _B[k]) / (_FACT[2 * k + 2] * (sigma + 2 * k + 1)) * x ** (-sigma - 2 * k - 1)
            )
            if remainder < _EPS * 1e-3 * abs(total):
                break
        rising *= (s + 2 * k - 1) * (s + 2 * k)
        power *= inv_x2
    return total, remainder


def _phase_loss(s: complex, x: float) -> float:
    """Rounding of s log n for n up to x, in units of eps."""
    return 2 * abs(s) * math.log(x)


def _head(s: complex, a: float, N: int):
    total = 0j
    mag = 0.0
    for n in range(N):
        t = cmath.exp(-s * math.log(n + a))
        total += t
        mag += abs(t)
    return total, mag


def hurwitz_zeta(s, a: float) -> SpecialValue:
    """zeta(s, a) = sum_{n >= 0} (n + a)^{-s} for 0 < a <= 1, continued to s != 1."""
    s = complex(s)
    if s == 1:
        raise PoleError("Hurwitz zeta has a pole at s = 1", location=1)
    N = _plan(s)
    head, mag = _head(s, a, N)
    x = N + a
    corr, rem = _em_tail(s, x)
    pole = cmath.exp((1 - s) * math.log(x)) / (s - 1)
    value = head + pole + corr
    err = rem + _EPS * (4 + _phase_loss(s, x)) * (mag + abs(pole) + abs(corr))
    return SpecialValue(value, err, Method.EULER_MACLAURIN)


def _is_gamma_pole(z: complex) -> bool:
    return z.imag == 0 and z.real <= 0 and z.real == math.floor(z.real)


def zeta_c(s) -> SpecialValue:
    """Riemann zeta; Re s < -1/2 goes through the functional equation."""
    s = complex(s)
    if s == 1:
        raise PoleError("zeta has a pole at s = 1", location=1)
    if s.real >= -0.5:
        return hurwitz_zeta(s, 1.0)
    # zeta(s) = 2^s pi^(s-1) sin(pi s / 2) Gamma(1 - s) zeta(1 - s)
    if _is_nonpositive_even(s):
        return SpecialValue(0j, 0.0, Method.EULER_MACLAURIN)
    z = hurwitz_zeta(1 - s, 1.0)
    g = gamma_c(1 - s)
    expo = s * math.log(2) + (s - 1) * math.log(math.pi)
    pref = cmath.exp(expo) * complex(_sinpi(s / 2))
    value = pref * g.value * z.value
    rel = z.abs_error_estimate / abs(z.value) + g.abs_error_estimate / abs(g.value)
    rel += (abs(expo) + 8) * _EPS
    return SpecialValue(value, abs(value) * rel, Method.EULER_MACLAURIN)


def _phi1(x: complex) -> complex:
    """(e^x - 1)/x without cancellation for small x."""
    if abs(x) > 0.1:
        return (cmath.exp(x) - 1) / x
    term, total = 1 + 0j, 1 + 0j
    for k in range(2, 20):
        term *= x / k
        total += term
    return total


def l_chi4(s) -> SpecialValue:
    """L(s, chi_4) = 4^{-s} (zeta(s, 1/4) - zeta(s, 3/4)), entire in s.

    Re s < -1/2 uses L(s) = (pi/4)^(s - 1/2) Gamma(1 - s/2) / Gamma((1 + s)/2) L(1 - s).
    """
    s = complex(s)
    if s.real < -0.5:
        if _is_gamma_pole((1 + s) / 2):
            return SpecialValue(0j, 0.0, Method.HURWITZ_SPLIT)
        L = l_chi4(1 - s)
        g1 = gamma_c(1 - s / 2)
        g2 = gamma_c((1 + s) / 2)
        value = cmath.exp((s - 0.5) * math.log(math.pi / 4)) * g1.value / g2.value * L.value
        rel = (
            L.abs_error_estimate / abs(L.value)
            + g1.abs_error_estimate / abs(g1.value)
            + g2.abs_error_estimate / abs(g2.value)
            + 8 * _EPS
        )
        return SpecialValue(value, abs(value) * rel, Method.HURWITZ_SPLIT)
    N = _plan(s)
    h1, m1 = _head(s, 0.25, N)
    h3, m3 = _head(s, 0.75, N)
    c1, r1 = _em_tail(s, N + 0.25)
    c3, r3 = _em_tail(s, N + 0.75)
    # pole terms cancel at s = 1; combine them analytically
    t = 1 - s
    A, B = math.log(N + 0.25), math.log(N + 0.75)
    pole = -cmath.exp(t * B) * (A - B) * _phi1(t * (A - B))
    scale = cmath.exp(-s * math.log(4))
    value = scale * (h1 - h3 + c1 - c3 + pole)
    loss = 4 + _phase_loss(s, N + 1.0)
    err = abs(scale) * (r1 + r3 + loss * _EPS * (m1 + m3 + abs(c1) + abs(c3) + abs(pole)))
    return SpecialValue(value, err, Method.HURWITZ_SPLIT)


def _is_nonpositive_even(s: complex) -> bool:
    return s.imag == 0 and s.real <= 0 and s.real % 2 == 0


def zeta_star(s) -> SpecialValue:
    """pi^{-s/2} Gamma(s/2) zeta(s); poles at s = 0 and s = 1."""
    s = complex(s)
    if s in (0, 1):
        raise PoleError(f"completed zeta has a pole at s = {int(s.real)}", location=int(s.real))
    if _is_nonpositive_even(s):
        # Gamma(s/2) pole cancels a trivial zero; use the reflected point
        return zeta_star(1 - s)
    g = gamma_c(s / 2)
    z = zeta_c(s)
    pref = cmath.exp(-s / 2 * math.log(math.pi))
    value = pref * g.value * z.value
    err = abs(pref) * (abs(g.value) * z.abs_error_estimate + abs(z.value) * g.abs_error_estimate)
    return SpecialValue(value, err + 4 * _EPS * abs(value), Method.COMPLETED)


def l_chi4_star(s) -> SpecialValue:
    """(pi/4)^{-s/2} Gamma((s+1)/2) L(s, chi_4); entire, root number 1."""
    s = complex(s)
    if s.imag == 0 and s.real <= -1 and (s.real + 1) % 2 == 0:
        # Gamma pole against a trivial zero of L
        return l_chi4_star(1 - s)
    g = gamma_c((s + 1) / 2)
    L = l_chi4(s)
    pref = cmath.exp(-s / 2 * math.log(math.pi / 4))
    value = pref * g.value * L.value
    err = abs(pref) * (abs(g.value) * L.abs_error_estimate + abs(L.value) * g.abs_error_estimate)
    return SpecialValue(value, err + 4 * _EPS * abs(value), Method.COMPLETED)
