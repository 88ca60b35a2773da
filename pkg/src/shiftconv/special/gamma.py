"""Complex Gamma, log-Gamma and digamma via Stirling series with recurrence and reflection."""

from __future__ import annotations

import cmath
import math

import numpy as np

from ..errors import PoleError
from ._bernoulli import even_bernoulli_floats
from ._values import Method, SpecialValue

_STIRLING_TERMS = 12
_SHIFT_RADIUS = 15.0
_EPS = 2.220446049250313e-16
_HALF_LOG_2PI = 0.5 * math.log(2 * math.pi)


def _stirling_coefficients():
    b = even_bernoulli_floats(_STIRLING_TERMS)
    return np.array([b[k - 1] / (2 * k * (2 * k - 1)) for k in range(1, _STIRLING_TERMS + 1)])


_LG_COEF = _stirling_coefficients()
_PSI_COEF = np.array([b / (2 * k) for k, b in enumerate(even_bernoulli_floats(_STIRLING_TERMS), 1)])


def _check_pole(s: complex, name: str):
    if s.imag == 0 and s.real <= 0 and s.real == math.floor(s.real):
        raise PoleError(f"{name} has a pole at s = {int(s.real)}", location=int(s.real))


def _reduce(s):
    """(n, r) with s = n + r, n = round(Re s); r is exact for the arguments reflected."""
    n = np.round(np.real(s))
    return n, s - n


def _sinpi(z):
    """sin(pi z) with the integer part removed first, so zeros at integers are exact."""
    n, r = _reduce(z)
    return np.where(np.mod(n, 2) == 0, 1.0, -1.0) * np.sin(np.pi * r)


def _reflection_loss(s: complex) -> float:
    """Relative error of the reflected Gamma value, in units of eps."""
    if s.real >= 0.5:
        return 0.0
    _, r = _reduce(s)
    t = cmath.tan(math.pi * r)
    sin_part = 4 * math.pi * abs(r) / abs(t) if t != 0 else 4.0
    # rounding of 1 - s feeds through psi(1 - s)
    return sin_part + 2 * abs(s) * math.log(2 + abs(s))


def _finite_or_pole(value: complex, s: complex, name: str) -> complex:
    if not cmath.isfinite(value):
        n = round(s.real)
        raise PoleError(f"{name} overflows at s = {s}, numerically at the pole {n}", location=n)
    return value


def _shift_counts(z: np.ndarray) -> np.ndarray:
    return np.where(np.abs(z) < _SHIFT_RADIUS, np.ceil(np.maximum(_SHIFT_RADIUS - z.real, 0)), 0).astype(int)


def _loggamma_right(z: np.ndarray) -> np.ndarray:
    """log Gamma(z) for Re z >= 0.5 or |z| >= 30 away from the negative axis."""
    shift = _shift_counts(z)
    logprod = np.zeros_like(z)
    prod = np.ones_like(z)
    w = z.copy()
    for k in range(int(shift.max(initial=0))):
        active = k < shift
        prod = np.where(active, prod * w, prod)
        w = np.where(active, w + 1, w)
        if k % 8 == 7:
            logprod += np.log(prod)
            prod = np.ones_like(z)
    logprod += np.log(prod)
    inv = 1 / w
    inv2 = inv * inv
    series = np.zeros_like(z)
    for c in _LG_COEF[::-1]:
        series = series * inv2 + c
    return (w - 0.5) * np.log(w) - w + _HALF_LOG_2PI + series * inv - logprod


def loggamma(z):
    """Vectorised log Gamma(z).

    Only ``exp(loggamma(z))`` is guaranteed to be Gamma(z): the imaginary part
    is a continuous branch on Re z >= 1/2 and is not normalised elsewhere.
    """
    z = np.asarray(z, dtype=complex)
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    # reflect only where Stirling is poor; keeps sin(pi z) from overflowing
    left = (z.real < 0.5) & (np.abs(z.imag) < 30 + np.abs(z.real))
    out = np.empty_like(z)
    out[~left] = _loggamma_right(z[~left])
    if left.any():
        zl = z[left]
        out[left] = math.log(math.pi) - np.log(_sinpi(zl)) - _loggamma_right(1 - zl)
    return out[0] if scalar else out


def loggamma_abs_error(z):
    """Bound on the absolute error of ``loggamma(z)`` modulo 2 pi i."""
    z = np.asarray(z, dtype=complex)
    left = (z.real < 0.5) & (np.abs(z.imag) < 30 + np.abs(z.real))
    base = np.where(left, 1 - z, z)
    w = np.abs(base + _shift_counts(base))
    err = 4 * _EPS * (2 + w * (1 + np.log(w)))
    if left.any():
        _, r = _reduce(z)
        # sin(pi r) loses accuracy as Im z grows; |pi r| enters through cot
        err = err + np.where(left, 4 * _EPS * (4 + np.pi * np.abs(r) * np.abs(z.imag + 1)), 0.0)
    return err if err.ndim else float(err)


def gamma_c(s) -> SpecialValue:
    s = complex(s)
    _check_pole(s, "Gamma")
    lg = complex(loggamma(s))
    try:
        value = cmath.exp(lg)
    except OverflowError:
        if s.real < 0.5:
            value = complex(math.inf)
        else:
            raise
    value = _finite_or_pole(value, s, "Gamma")
    method = Method.REFLECTION if s.real < 0.5 else Method.STIRLING
    err = abs(value) * (loggamma_abs_error(s) + _EPS * (4 + abs(lg.real) + _reflection_loss(s)))
    return SpecialValue(value, err, method)


def _digamma_right(z: complex) -> complex:
    acc = 0j
    while abs(z) < _SHIFT_RADIUS:
        acc -= 1 / z
        z += 1
    inv2 = 1 / (z * z)
    series = 0j
    for c in _PSI_COEF[::-1]:
        series = series * inv2 + c
    return acc + cmath.log(z) - 0.5 / z - series * inv2


def digamma(s) -> SpecialValue:
    s = complex(s)
    _check_pole(s, "digamma")
    if s.real < 0.5:
        _, r = _reduce(s)
        value = _digamma_right(1 - s) - math.pi / cmath.tan(math.pi * r)
        method = Method.REFLECTION
    else:
        value = _digamma_right(s)
        method = Method.STIRLING
    value = _finite_or_pole(value, s, "digamma")
    err = _EPS * (16 + 4 * abs(value))
    if s.real < 0.5:
        # rounding of pi*r propagates through pi cot(pi r)
        err += _EPS * (4 * math.pi**2 * abs(r) / abs(cmath.sin(math.pi * r)) ** 2 + 2 * abs(s))
    return SpecialValue(value, err, method)
