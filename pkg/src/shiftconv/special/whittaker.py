from __future__ import annotations

import cmath
import math

import numpy as np

from ..errors import ContractViolation, UnsupportedRegionError
from ._values import Method, QuadratureBudget, SpecialValue
from .gamma import gamma_c

_EPS = 2.220446049250313e-16
_KAPPAS = (-0.5, 0.0, 0.5)
_DECAY = 40.0


def _log_integrand(tau, a, b, x):
    # t = exp(pi/2 sinh tau); dt = t pi/2 cosh tau dtau
    log_t = 0.5 * math.pi * np.sinh(tau)
    t = np.exp(log_t)
    return -t + a * log_t + b * np.log1p(t / x) + np.log(0.5 * math.pi * np.cosh(tau))


def _window(a, b, x):
    """tau interval outside which the integrand is e^-40 below its peak."""
    tau = np.linspace(-12.0, 6.0, 3601)
    with np.errstate(over="ignore"):
        lg = _log_integrand(tau, a, b, x).real
    lg = np.where(np.isfinite(lg), lg, -np.inf)
    keep = np.flatnonzero(lg > lg.max() - _DECAY)
    lo, hi = tau[max(keep[0] - 1, 0)], tau[min(keep[-1] + 1, tau.size - 1)]
    return lo, hi, float(lg.max())


def _exp_sinh(a, b, x, budget):
    lo, hi, peak = _window(a, b, x)
    h = 0.25
    prev = None
    while True:
        tau = np.arange(lo, hi + h / 2, h)
        f = np.exp(_log_integrand(tau, a, b, x))
        cur = h * f.sum()
        mag = h * np.abs(f).sum()
        if prev is not None:
            delta = abs(cur - prev)
            rounding = 16 * _EPS * mag
            # delta bounds the error of the coarser rule, hence of this one
            if delta <= max(budget.target_abs_error, 1e-15 * mag, rounding):
                return cur, delta + rounding + math.exp(peak - _DECAY)
        if tau.size * 2 > budget.max_nodes:
            raise ContractViolation("whittaker_w node budget exhausted")
        prev = cur
        h /= 2


def whittaker_w(kappa, mu, x, budget: QuadratureBudget | None = None) -> SpecialValue:
    """W_{kappa,mu}(x) for kappa in {-1/2, 0, 1/2} and x > 0.

    Uses x^kappa e^{-x/2} / Gamma(a) * int_0^inf e^{-t} t^{a-1} (1 + t/x)^b dt with
    a = mu - kappa + 1/2 and b = mu + kappa - 1/2, switching to -mu when Re a <= 0.
    """
    budget = budget or QuadratureBudget()
    kappa = float(kappa)
    if kappa not in _KAPPAS:
        raise ContractViolation(f"kappa must be one of {_KAPPAS}, got {kappa}")
    mu = complex(mu)
    x = float(x)
    if not (math.isfinite(x) and x > 0):
        raise ContractViolation(f"whittaker_w requires x > 0, got {x}")
    prefix = cmath.exp(kappa * math.log(x) - x / 2)
    for m in (mu, -mu):
        a = m - kappa + 0.5
        if a == 0:
            # W_{kappa, kappa - 1/2}(x) = x^kappa e^{-x/2}
            return SpecialValue(prefix, 4 * _EPS * abs(prefix), Method.CLOSED_FORM)
    for m in (mu, -mu):
        a = m - kappa + 0.5
        if a.real > 0:
            b = m + kappa - 0.5
            integral, err = _exp_sinh(a, b, x, budget)
            g = gamma_c(a)
            value = prefix * integral / g.value
            total = abs(prefix) * (err + abs(integral) * g.abs_error_estimate / abs(g.value)) / abs(g.value)
            if mu.imag == 0:
                value = value.real
            return SpecialValue(value, total + 16 * _EPS * abs(value), Method.EXP_SINH)
    raise UnsupportedRegionError(
        f"no integral representation for kappa={kappa}, mu={mu}: Re(±mu - kappa + 1/2) <= 0"
    )
