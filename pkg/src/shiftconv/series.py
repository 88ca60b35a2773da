"""Truncated D_h(s, w), the closed form of D_0, main terms and residues."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .arith import sieve_r2, sieve_sigma
from .errors import ContractViolation, PoleError, RegionError
from .special import l_chi4, zeta_c, zeta_star

__all__ = [
    "SpectralPoint",
    "MainTermInputs",
    "divisor_bound_constant",
    "dh_tail_bound",
    "dh_truncated",
    "d0_truncated",
    "d0_closed_form",
    "main_term",
    "main_term_components",
    "residue_formulas",
    "double_pole_principal_part",
    "POLE_DISTANCE",
]

_EULER_GAMMA = 0.5772156649015329
_SQRT_4PI = math.sqrt(4 * math.pi)
POLE_DISTANCE = 1e-6


@dataclass(frozen=True)
class SpectralPoint:
    s: complex
    w: complex
    converges_Dh: bool = field(init=False)
    w_in_strip: bool = field(init=False)
    w_is_half: bool = field(init=False)

    def __post_init__(self):
        s, w = complex(self.s), complex(self.w)
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "converges_Dh", s.real > 1 + abs(w.real - 0.5))
        object.__setattr__(self, "w_in_strip", 0 < w.real < 1)
        object.__setattr__(self, "w_is_half", w == 0.5)


@dataclass(frozen=True)
class MainTermInputs:
    """phi_h values entering the main terms.

    For w != 1/2 ``phi_at`` is phi_h(1/2 + w) and ``phi_at_reflected`` is
    phi_h(3/2 - w).  For w = 1/2 ``phi_at`` is phi_h(1) and ``phi_prime`` is
    phi_h'(1).
    """

    h: int
    w: complex
    phi_at: complex
    phi_at_reflected: complex | None = None
    phi_prime: complex | None = None

    def __post_init__(self):
        if int(self.h) != self.h or self.h < 1:
            raise ContractViolation("h must be a positive integer")
        w = complex(self.w)
        object.__setattr__(self, "w", w)
        if not 0 < w.real < 1:
            raise ContractViolation(f"w must lie in the strip 0 < Re w < 1, got {w}")
        if w == 0.5:
            if self.phi_prime is None:
                raise ContractViolation("w = 1/2 requires phi_prime")
        elif self.phi_at_reflected is None:
            raise ContractViolation("w != 1/2 requires phi_at_reflected")


# ------------------------------------------------------------ tail bounds


@lru_cache(maxsize=None)
def _primes_below(n: int) -> tuple:
    sieve = np.ones(max(n, 2), dtype=bool)
    sieve[:2] = False
    for p in range(2, math.isqrt(n - 1) + 1 if n > 2 else 0):
        if sieve[p]:
            sieve[p * p :: p] = False
    return tuple(int(p) for p in np.flatnonzero(sieve))


def divisor_bound_constant(eps: float) -> float:
    """Smallest C with d(n) <= C n^eps for all n >= 1 (inf if it overflows).

    C = prod over primes p < 2^(1/eps) of max_k (k + 1) / p^(k eps).
    """
    log_c = _log_divisor_bound_constant(eps)
    return math.exp(log_c) if log_c < 709 else math.inf


@lru_cache(maxsize=None)
def _log_divisor_bound_constant(eps: float) -> float:
    if not 0 < eps <= 1:
        raise ContractViolation("eps must lie in (0, 1]")
    log_c = 0.0
    for p in _primes_below(math.ceil(2 ** (1 / eps))):
        lp = eps * math.log(p)
        k = 0
        best = 0.0
        while True:
            k += 1
            val = math.log(k + 1) - k * lp
            if val <= best:
                break
            best = val
        log_c += best
    return log_c


_EPS_GRID = tuple(round(0.05 + 0.01 * i, 2) for i in range(46))


def dh_tail_bound(s, w, h: int, N: int) -> float:
    """Bound on |sum_{n > N} r2(n) sigma_{1-2w}(n+h) (n+h)^{-(s+1/2-w)}|.

    Uses r2(n) <= 4 d(n), sigma_{1-2w}(m) <= d(m) max(1, m^{1-2Re w}),
    d(m) <= C(eps) m^eps and an integral comparison; the best eps on a grid is kept.
    """
    s, w = complex(s), complex(w)
    base = s.real + 0.5 - w.real - max(0.0, 1 - 2 * w.real)
    start = N + h if N + h > 0 else 1
    best = math.inf
    for eps in _EPS_GRID:
        alpha = base - 2 * eps
        if alpha <= 1:
            break
        log_b = math.log(4) + 2 * _log_divisor_bound_constant(eps) + (1 - alpha) * math.log(start) - math.log(alpha - 1)
        best = min(best, log_b)
    return math.exp(best) if best < 709 else math.inf


# ------------------------------------------------------------ truncated series


@lru_cache(maxsize=4)
def _r2_table(N: int) -> np.ndarray:
    return sieve_r2(N).values


@lru_cache(maxsize=8)
def _sigma_table(N: int, nu: complex) -> np.ndarray:
    return sieve_sigma(N, nu).values


def _require_convergence(point: SpectralPoint):
    if not point.converges_Dh:
        raise RegionError(
            f"D_h(s, w) converges only for Re s > 1 + |Re w - 1/2|; got s={point.s}, w={point.w}"
        )


def _partial(weights: np.ndarray, m: np.ndarray, exponent: complex):
    terms = weights * np.exp(-exponent * np.log(m))
    mag = float(np.abs(terms).sum())
    return complex(terms.sum()), mag


def dh_truncated(point: SpectralPoint, h: int, N: int) -> tuple[complex, float]:
    """sum_{0 <= n <= N} r2(n) sigma_{1-2w}(n+h) (n+h)^{-(s+1/2-w)} and a bound on the rest.

    The bound covers the tail beyond N plus summation rounding.
    """
    if int(h) != h or h < 1:
        raise ContractViolation("h must be a positive integer")
    N = int(N)
    if N < 0:
        raise ContractViolation("N must be nonnegative")
    _require_convergence(point)
    s, w = point.s, point.w
    exponent = s + 0.5 - w
    r2 = _r2_table(max(N, 1))[: N + 1]
    sigma = _sigma_table(N + h, 1 - 2 * w)[h : N + h + 1]
    m = np.arange(h, N + h + 1, dtype=float)
    value, mag = _partial(r2 * sigma, m, exponent)
    rounding = 4 * math.log2(N + 2) * 2.220446049250313e-16 * mag
    return value, dh_tail_bound(s, w, h, N) + rounding


def d0_truncated(s, w, N: int) -> tuple[complex, float]:
    """sum_{1 <= n <= N} r2(n) sigma_{1-2w}(n) n^{-(s+1/2-w)} and a bound on the rest."""
    point = SpectralPoint(s, w)
    _require_convergence(point)
    N = int(N)
    if N < 1:
        raise ContractViolation("N must be at least 1")
    exponent = point.s + 0.5 - point.w
    r2 = _r2_table(N)[1:]
    sigma = _sigma_table(N, 1 - 2 * point.w)[1:]
    m = np.arange(1, N + 1, dtype=float)
    value, mag = _partial(r2 * sigma, m, exponent)
    rounding = 4 * math.log2(N + 2) * 2.220446049250313e-16 * mag
    return value, dh_tail_bound(point.s, point.w, 0, N) + rounding


def d0_closed_form(s, w, with_error: bool = False):
    """4 zeta(s+1/2-w) zeta(s-1/2+w) L(s+1/2-w) L(s-1/2+w) / L(2s), n = 0 term omitted.

    With ``with_error`` returns ``(value, abs_error_estimate)``.
    """
    s, w = complex(s), complex(w)
    for pole in (0.5 + w, 1.5 - w):
        if abs(s - pole) < POLE_DISTANCE:
            raise PoleError(f"D_0(s, w) has a pole at s = {pole}", location=pole)
    a, b = s + 0.5 - w, s - 0.5 + w
    factors = [zeta_c(a), zeta_c(b), l_chi4(a), l_chi4(b)]
    den = l_chi4(2 * s)
    if den.value == 0:
        raise PoleError(f"L(2s, chi_4) vanishes at s = {s}", location=s)
    value = 4 * den.value ** -1
    rel = den.abs_error_estimate / abs(den.value)
    for f in factors:
        value *= f.value
        rel += f.abs_error_estimate / max(abs(f.value), 1e-300)
    if with_error:
        return value, abs(value) * (rel + 8 * 2.220446049250313e-16)
    return value


# ------------------------------------------------------------ main terms and residues


def main_term_components(X, inputs: MainTermInputs) -> tuple[complex, complex]:
    """The two main-term pieces, one per fit basis element.

    w != 1/2: (coefficient * X, coefficient * X^{2-2w}/(2-2w)).
    w = 1/2:  (coefficient * X log X, coefficient * X).
    """
    X = float(X)
    if not X >= 1:
        raise ContractViolation("X must be at least 1")
    h, w = inputs.h, inputs.w
    if w == 0.5:
        a, b = _log_linear_coefficients(inputs)
        return a * X * math.log(X), b * X
    c1, c2 = residue_formulas(w, h, inputs.phi_at, inputs.phi_at_reflected)
    return c1 * X, c2 * cmath.exp((2 - 2 * w) * math.log(X)) / (2 - 2 * w)


def _log_linear_coefficients(inputs: MainTermInputs) -> tuple[complex, complex]:
    phi, dphi = complex(inputs.phi_at), complex(inputs.phi_prime)
    a = _SQRT_4PI * phi
    b = _SQRT_4PI * (phi * (_EULER_GAMMA - math.log(4 * math.pi * inputs.h)) + dphi - phi)
    return a, b


def main_term(X, inputs: MainTermInputs) -> complex:
    first, second = main_term_components(X, inputs)
    return first + second


def residue_formulas(w, h: int, phi_at, phi_at_reflected) -> tuple[complex, complex]:
    """Residues of D_h(s, w) at s = 1/2 + w and s = 3/2 - w for w != 1/2.

    These are also the coefficients of X and of X^{2-2w}/(2-2w) in the main term.
    """
    w = complex(w)
    if w == 0.5:
        raise PoleError("w = 1/2 gives a double pole; use double_pole_principal_part", location=1)
    if int(h) != h or h < 1:
        raise ContractViolation("h must be a positive integer")
    lh = math.log(h)
    r1 = _SQRT_4PI * zeta_star(2 * w).value * cmath.exp(-(w - 0.5) * lh) * complex(phi_at)
    r2 = _SQRT_4PI * zeta_star(2 - 2 * w).value * cmath.exp(-(0.5 - w) * lh) * complex(phi_at_reflected)
    return r1, r2


def double_pole_principal_part(h: int, phi_at_one, phi_prime_at_one) -> tuple[complex, complex]:
    """Coefficients (of (s-1)^-2, of (s-1)^-1) of D_h(s, 1/2) at s = 1."""
    if int(h) != h or h < 1:
        raise ContractViolation("h must be a positive integer")
    phi, dphi = complex(phi_at_one), complex(phi_prime_at_one)
    return _SQRT_4PI * phi, _SQRT_4PI * ((_EULER_GAMMA - math.log(4 * math.pi * h)) * phi + dphi)
