"""Theta and weight-0 Eisenstein series of level 1 and level 4.

Level-1 Eisenstein series are evaluated two ways: by the Fourier expansion and
by the coset lattice sum.  Level-4 cusp series are lattice sums over bottom
rows with 4 | c, moved to the other cusps by their scaling matrices.  Lattice
sums are accumulated per square shell max(|c|, |d|) = k so one pass yields
the truncation at every radius up to R.
"""

from __future__ import annotations

import cmath
import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .arith import _check_budget, sieve_sigma
from .errors import BudgetError, ContractViolation, DivergenceError, PoleError
from .special import bessel_k_array, zeta_star

__all__ = [
    "HalfPlanePoint",
    "Level",
    "Cusp",
    "Weight",
    "EisensteinSpec",
    "TruncationBudget",
    "DecompositionReport",
    "theta",
    "theta_tail_bound",
    "eisenstein_level1_fourier",
    "eisenstein_level1_cosets",
    "eisenstein_level4_cosets",
    "eisenstein",
    "coset_tail_bound",
    "enumerate_bottom_rows",
    "verify_decomposition",
    "decomposition_residuals",
    "COSET_MATRICES",
    "SCALING_MATRICES",
    "coset_representatives_inequivalent",
    "level1_from_cosets",
    "mobius",
]


@dataclass(frozen=True)
class HalfPlanePoint:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ContractViolation("point coordinates must be finite")
        if not self.y > 0:
            raise ContractViolation(f"point must lie in the upper half-plane, got y = {self.y}")

    @classmethod
    def from_complex(cls, z) -> HalfPlanePoint:
        z = complex(z)
        return cls(z.real, z.imag)

    @property
    def z(self) -> complex:
        return complex(self.x, self.y)


def _point(z) -> HalfPlanePoint:
    return z if isinstance(z, HalfPlanePoint) else HalfPlanePoint.from_complex(z)


class Level(str, enum.Enum):
    ONE = "one"
    FOUR = "four"


class Cusp(str, enum.Enum):
    INFINITY = "infinity"
    ZERO = "zero"
    HALF = "half"


class Weight(str, enum.Enum):
    ZERO = "zero"


@dataclass(frozen=True)
class EisensteinSpec:
    """Which Eisenstein series to evaluate; ``completed`` multiplies by zeta*(2w)."""

    level: Level
    w: complex
    cusp: Cusp | None = None
    weight: Weight = Weight.ZERO
    completed: bool = False

    def __post_init__(self):
        object.__setattr__(self, "level", Level(self.level))
        object.__setattr__(self, "w", complex(self.w))
        if self.level is Level.ONE and self.cusp is not None:
            raise ContractViolation("level-one series have no cusp")
        if self.level is Level.FOUR:
            object.__setattr__(self, "cusp", Cusp(self.cusp or Cusp.INFINITY))
        if self.weight is not Weight.ZERO:
            raise ContractViolation("only weight 0 is supported")


@dataclass(frozen=True)
class TruncationBudget:
    """A cutoff (Fourier terms or coset radius) and the tail bound it must meet."""

    cutoff: int
    tail_bound: float = math.inf

    def __post_init__(self):
        if int(self.cutoff) != self.cutoff or self.cutoff < 1:
            raise ContractViolation("cutoff must be a positive integer")
        if not self.tail_bound >= 0:
            raise ContractViolation("tail_bound must be nonnegative")


def mobius(g, z: complex) -> complex:
    a, b, c, d = g
    return (a * z + b) / (c * z + d)


# ---------------------------------------------------------------- theta


def theta_tail_bound(y: float, cutoff: int) -> float:
    """2 sum_{n > M} exp(-2 pi n^2 y), bounded by a geometric series."""
    m = cutoff + 1
    first = math.exp(-2 * math.pi * m * m * y)
    ratio = math.exp(-2 * math.pi * (2 * m + 1) * y)
    return 2 * first / (1 - ratio)


def _theta_cutoff(y: float, target: float) -> int:
    m = 1
    while theta_tail_bound(y, m) > target:
        m += 1
    return m


def theta(z, budget: TruncationBudget | None = None, target: float = 1e-16) -> complex:
    """theta(z) = sum_n e(n^2 z).

    With a budget the series stops at ``budget.cutoff`` and the tail bound must
    not exceed ``budget.tail_bound``; otherwise the cutoff is chosen from ``target``.
    """
    p = _point(z)
    if budget is None:
        M = _theta_cutoff(p.y, target)
    else:
        M = budget.cutoff
        tail = theta_tail_bound(p.y, M)
        if tail > budget.tail_bound:
            raise BudgetError(
                f"theta tail bound {tail:.3g} exceeds {budget.tail_bound:.3g} at cutoff {M}",
                suggested_cutoff=_theta_cutoff(p.y, budget.tail_bound),
            )
    n = np.arange(M, 0, -1, dtype=float)  # smallest terms first
    terms = np.exp(2j * math.pi * n * n * p.z)
    return 1 + 2 * complex(terms.sum())


# ---------------------------------------------------------------- level 1, Fourier


def _check_w_poles(w: complex):
    for pole in (0, 0.5, 1):
        if w == pole:
            raise PoleError(f"Eisenstein constant term has a pole at w = {pole}", location=pole)


def _fourier_tail(y: float, w: complex, M: int) -> float:
    """Bound on 4 sqrt(y) sum_{n > M} |sigma_{1-2w}(n) n^{w-1/2} K_{w-1/2}(2 pi n y)|.

    Uses sigma_a(n) <= d(n) n^max(a,0) <= 2 n^(1/2 + max(a,0)) and
    K_nu(x) <= exp(-x) sqrt(pi/2x) exp(Re(nu)^2 / 2x).
    """
    a = 1 - 2 * w.real
    p = max(a, 0) + w.real - 0.5  # net power of n
    nu2 = (w.real - 0.5) ** 2
    c = 2 * math.pi * y
    m = M + 1
    if m <= max(p, 0) / c:
        return math.inf
    first = m**p * math.exp(-c * m)
    ratio = math.exp(-c) * (1 + 1 / m) ** max(p, 0)
    if ratio >= 1:
        return math.inf
    const = 4 * math.sqrt(y) * 2 * math.sqrt(math.pi / (2 * c)) * math.exp(nu2 / (2 * c * m))
    return const * first / (1 - ratio)


def _fourier_cutoff(y, w, target):
    M = 1
    while _fourier_tail(y, w, M) > target:
        M = M + 1 if M < 64 else int(M * 1.25)
        if M > 10**7:
            raise BudgetError("Fourier expansion needs more than 1e7 terms", suggested_cutoff=M)
    return M


def eisenstein_level1_fourier(
    z, w, budget: TruncationBudget | None = None, target: float = 1e-13, completed: bool = False
) -> complex:
    """E(z, w) (or E*(z, w) = zeta*(2w) E(z, w)) from the Fourier expansion.

    x is reduced mod 1 before use, so the result is periodic in x.
    """
    p = _point(z)
    w = complex(w)
    _check_w_poles(w)
    if budget is None:
        M = _fourier_cutoff(p.y, w, target)
    else:
        M = budget.cutoff
        tail = _fourier_tail(p.y, w, M)
        if tail > budget.tail_bound:
            raise BudgetError(
                f"Fourier tail bound {tail:.3g} exceeds {budget.tail_bound:.3g} at cutoff {M}",
                suggested_cutoff=_fourier_cutoff(p.y, w, budget.tail_bound),
            )
    x = p.x - math.floor(p.x)
    y = p.y
    zs2w = zeta_star(2 * w).value
    zs2w1 = zeta_star(2 * w - 1).value
    n = np.arange(1, M + 1)
    sigma = np.asarray(sieve_sigma(M, 1 - 2 * w).values[1:], dtype=complex)
    kvals, _ = bessel_k_array(w - 0.5, 2 * math.pi * n * y)
    coeff = sigma * np.exp((w - 0.5) * np.log(n)) * kvals * np.cos(2 * math.pi * n * x)
    series = 4 * math.sqrt(y) * complex(coeff[::-1].sum())
    yw = cmath.exp(w * math.log(y))
    y1w = cmath.exp((1 - w) * math.log(y))
    if completed:
        return zs2w * yw + zs2w1 * y1w + series
    return yw + y1w * zs2w1 / zs2w + series / zs2w


# ---------------------------------------------------------------- coset sums

SCALING_MATRICES = {
    Cusp.INFINITY: (1, 0, 0, 1),
    Cusp.ZERO: (0, -1, 4, 0),
    Cusp.HALF: (1, 0, 2, 1),
}

# right coset representatives of Gamma_0(4) in SL_2(Z); the bottom row (4c, d) g
# of the fourth is (4c + d, -4c)
COSET_MATRICES = (
    (1, 0, 0, 1),
    (1, 0, 1, 1),
    (1, 0, 3, 1),
    (1, -1, 1, 0),
    (1, 1, 1, 2),
    (1, 0, 2, 1),
)

_CHUNK = 32


def coset_tail_bound(z, w, radius: int) -> float:
    """Bound on the part of (1/2) sum y^w / |cz + d|^{2w} with max(|c|, |d|) > R.

    |cz + d|^2 >= lambda (c^2 + d^2) with lambda the small eigenvalue of the
    quadratic form, and shell k holds 8k pairs.
    """
    p = _point(z)
    w = complex(w)
    s = w.real
    if s <= 1:
        raise DivergenceError(f"coset sums need Re w > 1, got {s}")
    a, b = p.x * p.x + p.y * p.y, p.x
    lam = 0.5 * (a + 1 - math.hypot(a - 1, 2 * b))
    return 0.5 * p.y**s * lam ** (-s) * 8 * radius ** (2 - 2 * s) / (2 * s - 2)


def _shell_block(z: complex, w: complex, radius: int, cs: np.ndarray):
    x, y = z.real, z.imag
    d = np.arange(-radius, radius + 1)
    re = np.zeros(radius + 1)
    im = np.zeros(radius + 1)
    logy = math.log(y)
    real_w = w.imag == 0
    for c in cs:
        c = int(c)
        if c == 0:
            # (0, +1) and (0, -1): one class, weight 1/2 each
            t = cmath.exp(w * logy)
            re[1] += t.real
            im[1] += t.imag
            continue
        dd = d[np.gcd(c, d) == 1]
        q = (c * x + dd) ** 2 + (c * y) ** 2
        if real_w:
            t = np.exp(w.real * (logy - np.log(q)))
            re += np.bincount(np.maximum(c, np.abs(dd)), weights=t, minlength=radius + 1)
        else:
            t = np.exp(w * (logy - np.log(q)))
            k = np.maximum(c, np.abs(dd))
            re += np.bincount(k, weights=t.real, minlength=radius + 1)
            im += np.bincount(k, weights=t.imag, minlength=radius + 1)
    return re, im


def _shells(z: complex, w: complex, radius: int, step: int, workers: int = 1) -> np.ndarray:
    """Per-shell sums of (1/2) sum y^w/|cz+d|^{2w} over coprime (c, d) with step | c.

    Rows c and -c give equal terms, so c >= 0 is summed with weight 1.
    Chunks are fixed and reduced in order, so the result does not depend on
    ``workers``.
    """
    cs = np.arange(0, radius + 1, step)
    blocks = [cs[i : i + _CHUNK] for i in range(0, cs.size, _CHUNK)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda b: _shell_block(z, w, radius, b), blocks))
    else:
        parts = [_shell_block(z, w, radius, b) for b in blocks]
    re = np.zeros(radius + 1)
    im = np.zeros(radius + 1)
    for r, i in parts:
        re += r
        im += i
    return re + 1j * im


def _fsum_complex(values) -> complex:
    values = np.asarray(values)
    return complex(math.fsum(values.real), math.fsum(values.imag))


def _radius(budget) -> int:
    if isinstance(budget, TruncationBudget):
        return budget.cutoff
    R = int(budget)
    if R < 1:
        raise ContractViolation("radius must be a positive integer")
    return R


def _check_tail(z, w, budget):
    if isinstance(budget, TruncationBudget):
        tail = coset_tail_bound(z, w, budget.cutoff)
        if tail > budget.tail_bound:
            raise BudgetError(
                f"coset tail bound {tail:.3g} exceeds {budget.tail_bound:.3g}",
                suggested_cutoff=_coset_cutoff(z, w, budget.tail_bound),
            )


def _coset_cutoff(z, w, target):
    s = complex(w).real
    R1 = coset_tail_bound(z, w, 1)
    return max(1, math.ceil((R1 / target) ** (1 / (2 * s - 2))))


def eisenstein_level1_cosets(z, w, budget, workers: int = 1) -> complex:
    """E(z, w) = (1/2) sum over coprime (c, d) of y^w / |cz + d|^{2w}, truncated at radius R."""
    p = _point(z)
    w = complex(w)
    coset_tail_bound(p, w, 1)
    _check_tail(p, w, budget)
    return _fsum_complex(_shells(p.z, w, _radius(budget), 1, workers))


def eisenstein_level4_cosets(cusp, z, w, budget, workers: int = 1) -> complex:
    """E_a(z, w) for the cusps a of Gamma_0(4), as E_inf(sigma_a z, w)."""
    cusp = Cusp(cusp)
    p = _point(z)
    w = complex(w)
    if w.real <= 1:
        raise DivergenceError(f"coset sums need Re w > 1, got {w.real}")
    zz = mobius(SCALING_MATRICES[cusp], p.z)
    q = HalfPlanePoint.from_complex(zz)
    _check_tail(q, w, budget)
    return _fsum_complex(_shells(zz, w, _radius(budget), 4, workers))


def eisenstein(spec: EisensteinSpec, z, budget=None, workers: int = 1) -> complex:
    """Dispatch on an EisensteinSpec: level one uses the Fourier route, level four the coset route."""
    if spec.level is Level.ONE:
        return eisenstein_level1_fourier(z, spec.w, budget, completed=spec.completed)
    if budget is None:
        raise ContractViolation("level-four series need a coset radius or budget")
    value = eisenstein_level4_cosets(spec.cusp, z, spec.w, budget, workers)
    if spec.completed:
        value *= zeta_star(2 * spec.w).value
    return value


def enumerate_bottom_rows(level, radius: int, memory_budget: int | None = None) -> np.ndarray:
    """All coprime (c, d) with 0 < max(|c|, |d|) <= R, and 4 | c at level four.

    Both members of each +-pair are listed; sums over these rows carry a factor 1/2.
    """
    level = Level(level)
    R = int(radius)
    if R < 1:
        raise ContractViolation("radius must be at least 1")
    step = 4 if level is Level.FOUR else 1
    approx = (2 * R + 1) * (2 * (R // step) + 1)
    _check_budget(2 * approx, 8, memory_budget, "bottom-row table")
    d = np.arange(-R, R + 1)
    rows = []
    for c in range(-(R // step) * step, R + 1, step):
        dd = d[np.gcd(c, d) == 1]
        rows.append(np.column_stack([np.full(dd.size, c), dd]))
    return np.concatenate(rows).astype(np.int64)


def level1_from_cosets(z, w, budget, workers: int = 1) -> complex:
    """E(z, w) as sum_i E_inf(g_i z, w) over COSET_MATRICES."""
    p = _point(z)
    return sum(
        eisenstein_level4_cosets(Cusp.INFINITY, mobius(g, p.z), w, budget, workers) for g in COSET_MATRICES
    )


def coset_representatives_inequivalent(matrices=COSET_MATRICES) -> bool:
    """True if the matrices are pairwise inequivalent under left multiplication by Gamma_0(4).

    A and B are equivalent iff A B^{-1} lies in Gamma_0(4), i.e. its lower-left
    entry is divisible by 4.  Six inequivalent matrices exhaust the index-6 cosets.
    """
    for a, b, c, d in matrices:
        if a * d - b * c != 1:
            return False
    for i, (a1, b1, c1, d1) in enumerate(matrices):
        for a2, b2, c2, d2 in matrices[i + 1 :]:
            # B^{-1} = (d2, -b2; -c2, a2); lower-left of A B^{-1} is c1 d2 - d1 c2
            if (c1 * d2 - d1 * c2) % 4 == 0:
                return False
    return True


# ---------------------------------------------------------------- decomposition


@dataclass(frozen=True)
class DecompositionReport:
    """Residuals of E = E_inf + 4^w E_0 + E_half at radius R.

    ``coset_residual`` compares against the level-1 coset sum at the same
    radius and ``fourier_residual`` against the Fourier expansion.
    """

    z: complex
    w: complex
    radius: int
    coset_residual: float
    fourier_residual: float
    tail_bound: float
    residual_by_radius: dict = field(default_factory=dict)


def _decomposition_shells(p: HalfPlanePoint, w: complex, radius: int, workers: int):
    s1 = _shells(p.z, w, radius, 1, workers)
    parts = {
        cusp: _shells(mobius(SCALING_MATRICES[cusp], p.z), w, radius, 4, workers) for cusp in Cusp
    }
    level4 = parts[Cusp.INFINITY] + cmath.exp(w * math.log(4)) * parts[Cusp.ZERO] + parts[Cusp.HALF]
    return s1, level4


def decomposition_residuals(z, w, radii, workers: int = 1) -> dict:
    """Coset residual |E - E_inf - 4^w E_0 - E_half| at each radius, from a single pass."""
    p = _point(z)
    w = complex(w)
    if w.real <= 1:
        raise DivergenceError(f"coset sums need Re w > 1, got {w.real}")
    radii = sorted(int(r) for r in radii)
    s1, level4 = _decomposition_shells(p, w, radii[-1], workers)
    diff = s1 - level4
    return {R: abs(_fsum_complex(diff[: R + 1])) for R in radii}


def verify_decomposition(z, w, budget, workers: int = 1, radii=()) -> DecompositionReport:
    p = _point(z)
    w = complex(w)
    if w.real <= 1:
        raise DivergenceError(f"coset sums need Re w > 1, got {w.real}")
    R = _radius(budget)
    all_radii = sorted(set(int(r) for r in radii) | {R})
    s1, level4 = _decomposition_shells(p, w, all_radii[-1], workers)
    diff = s1 - level4
    by_radius = {r: abs(_fsum_complex(diff[: r + 1])) for r in all_radii}
    combined = _fsum_complex(level4[: R + 1])
    fourier = eisenstein_level1_fourier(p, w)
    four_w = abs(cmath.exp(w * math.log(4)))
    tails = coset_tail_bound(p, w, R)
    for cusp in (Cusp.ZERO, Cusp.HALF):
        q = HalfPlanePoint.from_complex(mobius(SCALING_MATRICES[cusp], p.z))
        tails += (four_w if cusp is Cusp.ZERO else 1) * coset_tail_bound(q, w, R)
    return DecompositionReport(
        z=p.z,
        w=w,
        radius=R,
        coset_residual=by_radius[R],
        fourier_residual=abs(fourier - combined),
        tail_bound=tails,
        residual_by_radius=by_radius,
    )
