"""Sieves and exact evaluators for r2, sigma_nu, d, chi_4 and Kloosterman sums."""

from __future__ import annotations

import csv
import enum
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .config import default_memory_budget
from .errors import ContractViolation, ResourceError

__all__ = [
    "TableKind",
    "ArithmeticTable",
    "Twist",
    "KloostermanSpec",
    "IdentityReport",
    "chi4",
    "sieve_r2",
    "sieve_sigma",
    "sieve_divisor_count",
    "divisor_sum",
    "kloosterman",
    "kloosterman_matrix",
    "modular_inverses",
    "verify_r2_identities",
    "verify_weil_bound",
    "DEFAULT_KLOOSTERMAN_C_MAX",
]

DEFAULT_KLOOSTERMAN_C_MAX = 10**6


class TableKind(str, enum.Enum):
    R2 = "r2"
    SIGMA = "sigma"
    DIVISOR_COUNT = "divisor_count"


@dataclass(frozen=True)
class ArithmeticTable:
    """Values f(0), ..., f(N) of an arithmetic function.

    The array is made read-only on construction so a published table can be
    shared freely between threads.
    """

    kind: TableKind
    values: np.ndarray
    nu: complex | None = None
    provenance: Mapping[str, object] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind is TableKind.SIGMA and self.nu is None:
            raise ContractViolation("sigma tables need an exponent nu")
        values = np.asarray(self.values)
        if values.ndim != 1 or values.size < 1:
            raise ContractViolation("values must be a non-empty 1-d array")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @property
    def max_index(self) -> int:
        return self.values.size - 1

    def __len__(self):
        return self.values.size

    def __getitem__(self, n):
        return self.values[n]

    def to_csv(self, fh=None) -> str | None:
        """Write ``n,value`` rows (``n,re,im`` for complex tables).

        Returns the text when ``fh`` is None.
        """
        own = fh is None
        if own:
            fh = io.StringIO()
        writer = csv.writer(fh, lineterminator="\n")
        vals = self.values
        if np.iscomplexobj(vals):
            writer.writerow(["n", "re", "im"])
            for n, v in enumerate(vals):
                writer.writerow([n, f"{v.real:.17g}", f"{v.imag:.17g}"])
        elif np.issubdtype(vals.dtype, np.integer):
            writer.writerow(["n", "value"])
            writer.writerows(enumerate(vals.tolist()))
        else:
            writer.writerow(["n", "value"])
            for n, v in enumerate(vals):
                writer.writerow([n, f"{v:.17g}"])
        return fh.getvalue() if own else None


def _check_budget(entries: int, itemsize: int, budget: int | None, what: str):
    budget = default_memory_budget() if budget is None else budget
    need = entries * itemsize
    if need > budget:
        raise ResourceError(
            f"{what} needs {need} bytes, over the memory budget of {budget} bytes",
            limit=budget,
            requested=need,
        )


def _check_max(N):
    if int(N) != N or N < 1:
        raise ContractViolation(f"table size must be a positive integer, got {N!r}")
    return int(N)


def chi4(n: int) -> int:
    """The non-principal character mod 4."""
    r = n % 4
    return 1 if r == 1 else -1 if r == 3 else 0


def _chi4_array(N: int) -> np.ndarray:
    n = np.arange(N + 1)
    out = np.zeros(N + 1, dtype=np.int64)
    out[n % 4 == 1] = 1
    out[n % 4 == 3] = -1
    return out


def sieve_r2(N: int, memory_budget: int | None = None, workers: int = 1) -> ArithmeticTable:
    """Count lattice points on each circle a^2 + b^2 = n for n <= N.

    Rows a = 0..sqrt(N) are split into contiguous blocks, one per worker;
    integer accumulation makes the result independent of ``workers``.
    """
    N = _check_max(N)
    _check_budget((N + 1) * max(1, workers), 8, memory_budget, "r2 table")
    rmax = math.isqrt(N)
    a = np.arange(rmax + 1, dtype=np.int64)
    squares = a * a
    # number of integers with the given square: 1 for 0, 2 otherwise
    mult = np.where(a == 0, 1, 2).astype(np.int64)

    def block(rows):
        acc = np.zeros(N + 1, dtype=np.int64)
        for i in rows:
            base = squares[i]
            k = math.isqrt(N - int(base))
            acc[base + squares[: k + 1]] += mult[i] * mult[: k + 1]
        return acc

    chunks = [c for c in np.array_split(np.arange(rmax + 1), max(1, workers)) if c.size]
    if len(chunks) == 1:
        values = block(chunks[0])
    else:
        with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
            parts = list(pool.map(block, chunks))
        values = parts[0]
        for p in parts[1:]:
            values += p
    return ArithmeticTable(
        TableKind.R2, values, provenance={"sieve": "lattice", "N": N, "workers": workers}
    )


def divisor_sum(f: np.ndarray, N: int) -> np.ndarray:
    """Return g with g[n] = sum_{d | n} f[d] for 1 <= n <= N, g[0] = 0.

    Each divisor pair d*k = n with d <= k is visited from the small side
    d <= sqrt(N), so the loop is O(sqrt N) vectorised slice updates.
    """
    out = np.zeros(N + 1, dtype=f.dtype)
    for d in range(1, math.isqrt(N) + 1):
        out[d * d :: d] += f[d]
        out[d * (d + 1) :: d] += f[d + 1 : N // d + 1]
    return out


def sieve_sigma(N: int, nu, memory_budget: int | None = None) -> ArithmeticTable:
    """sigma_nu(n) = sum of d**nu over divisors, for 0 <= n <= N (entry 0 is 0).

    Real ``nu`` gives a float64 table, complex ``nu`` a complex128 one.
    """
    N = _check_max(N)
    nu = complex(nu)
    is_real = nu.imag == 0
    dtype = np.float64 if is_real else np.complex128
    _check_budget(3 * (N + 1), np.dtype(dtype).itemsize, memory_budget, "sigma table")
    d = np.arange(N + 1, dtype=np.float64)
    powers = np.zeros(N + 1, dtype=dtype)
    if is_real:
        powers[1:] = d[1:] ** nu.real
    else:
        powers[1:] = np.exp(nu * np.log(d[1:]))
    values = divisor_sum(powers, N)
    return ArithmeticTable(
        TableKind.SIGMA,
        values,
        nu=nu,
        provenance={"sieve": "divisor-pairs", "N": N, "nu": [nu.real, nu.imag]},
    )


def sieve_divisor_count(N: int, memory_budget: int | None = None) -> ArithmeticTable:
    N = _check_max(N)
    _check_budget(2 * (N + 1), 8, memory_budget, "divisor-count table")
    ones = np.ones(N + 1, dtype=np.int64)
    values = divisor_sum(ones, N)
    return ArithmeticTable(
        TableKind.DIVISOR_COUNT, values, provenance={"sieve": "divisor-pairs", "N": N}
    )


class Twist(str, enum.Enum):
    NONE = "none"
    CHI4 = "chi4"


@dataclass(frozen=True)
class KloostermanSpec:
    m: int
    n: int
    c: int
    twist: Twist = Twist.NONE

    def __post_init__(self):
        if self.c < 1:
            raise ContractViolation(f"modulus must be positive, got c={self.c}")
        if self.twist is Twist.CHI4 and self.c % 4:
            raise ContractViolation(f"chi4-twisted Kloosterman sums need 4 | c, got c={self.c}")


def modular_inverses(c: int):
    """Units d mod c and their inverses, by a vectorised extended Euclid."""
    d = np.arange(c, dtype=np.int64)
    d = d[np.gcd(d, c) == 1]
    r0 = np.full_like(d, c)
    r1 = d.copy()
    s0 = np.zeros_like(d)
    s1 = np.ones_like(d)
    # invariant: r_i == s_i * d (mod c)
    while np.any(r1):
        live = r1 != 0
        q = np.where(live, r0 // np.where(live, r1, 1), 0)
        r0, r1 = np.where(live, r1, r0), np.where(live, r0 - q * r1, r1)
        s0, s1 = np.where(live, s1, s0), np.where(live, s0 - q * s1, s1)
    return d, s0 % c


def kloosterman(spec: KloostermanSpec, c_max: int = DEFAULT_KLOOSTERMAN_C_MAX) -> complex:
    """S(m, n; c), optionally twisted by chi_4(d). S(m, n; 1) is taken to be 1."""
    c = spec.c
    if c > c_max:
        raise ContractViolation(f"modulus {c} exceeds the configured cap {c_max}")
    if c == 1:
        return 1.0 + 0.0j
    d, dbar = modular_inverses(c)
    phase = ((spec.m * d + spec.n * dbar) % c) / c
    terms = np.exp(2j * np.pi * phase)
    if spec.twist is Twist.CHI4:
        terms = terms * _chi4_array(3)[d % 4]
    return complex(terms.sum())


def _character_powers(base: np.ndarray, count: int) -> np.ndarray:
    """Rows base**1, ..., base**count by repeated in-place multiplication."""
    out = np.empty((count, base.size), dtype=complex)
    out[0] = base
    for k in range(1, count):
        np.multiply(out[k - 1], base, out=out[k])
    return out


def kloosterman_matrix(ms, ns, c: int, twist: Twist = Twist.NONE, units=None) -> np.ndarray:
    """All S(m, n; c) for m in ``ms``, n in ``ns`` at once.

    When ``ms`` and ``ns`` are exactly 1..M and 1..N the exponentials are built
    as successive powers of e(d/c) and e(dbar/c); otherwise they are gathered.
    ``units`` may carry a precomputed ``(d, dbar)`` pair for this modulus.
    """
    KloostermanSpec(0, 0, c, twist)
    ms = np.asarray(ms, dtype=np.int64)
    ns = np.asarray(ns, dtype=np.int64)
    if c == 1:
        return np.ones((ms.size, ns.size), dtype=complex)
    d, dbar = modular_inverses(c) if units is None else units

    def table(mult, res):
        if mult.size and np.array_equal(mult, np.arange(1, mult.size + 1)):
            return _character_powers(np.exp(2j * np.pi * res / c), mult.size)
        return np.exp(2j * np.pi * (np.outer(mult, res) % c) / c)

    left = table(ms, d)
    if twist is Twist.CHI4:
        left = left * _chi4_array(3)[d % 4]
    return left @ table(ns, dbar).T


def _batched_inverses(moduli):
    """Yield ``(c, (d, dbar))`` for each modulus, inverting by d**(phi(c)-1) mod c.

    Residues of many moduli are processed together so the exponentiation
    loop runs over large arrays; valid while c**2 fits in int64.
    """
    moduli = list(moduli)
    top = max(moduli)
    if top > 3 * 10**9:
        raise ContractViolation("batched inverses need c**2 < 2**63")
    phi = np.arange(top + 1, dtype=np.int64)
    for p in range(2, top + 1):
        if phi[p] == p:
            phi[p::p] -= phi[p::p] // p
    batch, size = [], 0

    def flush(batch):
        units = [np.arange(c, dtype=np.int64) for c in batch]
        units = [u[np.gcd(u, c) == 1] for u, c in zip(units, batch)]
        d = np.concatenate(units)
        mod = np.repeat(np.array(batch, dtype=np.int64), [u.size for u in units])
        exp = np.repeat(phi[batch] - 1, [u.size for u in units])
        result = np.ones_like(d) % mod
        base = d % mod
        while np.any(exp):
            result = np.where(exp & 1, result * base % mod, result)
            base = base * base % mod
            exp >>= 1
        start = 0
        for c, u in zip(batch, units):
            yield c, (u, result[start : start + u.size])
            start += u.size

    for c in moduli:
        batch.append(c)
        size += c
        if size > 2_000_000:
            yield from flush(batch)
            batch, size = [], 0
    if batch:
        yield from flush(batch)


@dataclass
class IdentityReport:
    name: str
    passed: bool
    checked: int
    first_counterexample: object = None
    max_residual: float = 0.0

    def __bool__(self):
        return self.passed


def verify_r2_identities(N: int, r2: ArithmeticTable | None = None) -> list[IdentityReport]:
    """Check r2(n) = 4 sum_{d|n} chi4(d), r2(2n) = r2(n) and r2(4n) = r2(n) for n <= N."""
    N = _check_max(N)
    if r2 is None:
        r2 = sieve_r2(N)
    if r2.max_index < N:
        raise ContractViolation(f"r2 table covers {r2.max_index} < {N}")
    vals = r2.values[: N + 1]
    chi_sums = divisor_sum(_chi4_array(N), N)
    n = np.arange(1, N + 1)

    def report(name, lhs, rhs, idx):
        bad = np.nonzero(lhs != rhs)[0]
        first = int(idx[bad[0]]) if bad.size else None
        return IdentityReport(
            name,
            bad.size == 0,
            int(idx.size),
            first,
            float(np.max(np.abs(lhs - rhs), initial=0)),
        )

    half = n[: N // 2]
    quarter = n[: N // 4]
    return [
        report("r2_equals_4_chi4_divisor_sum", vals[1:], 4 * chi_sums[1:], n),
        report("r2_doubling", vals[2 * half], vals[half], half),
        report("r2_quadrupling", vals[4 * quarter], vals[quarter], quarter),
    ]


def verify_weil_bound(m_max: int = 20, n_max: int = 20, c_max: int = 10**4) -> IdentityReport:
    """|S(m,n;c)| <= d(c) gcd(m,n,c)^{1/2} c^{1/2} for 1 <= m,n and c within range."""
    ms = np.arange(1, m_max + 1)
    ns = np.arange(1, n_max + 1)
    dcount = sieve_divisor_count(c_max).values
    gmn = np.gcd.outer(ms, ns)
    worst = -np.inf
    first = None
    for c, units in _batched_inverses(range(1, c_max + 1)):
        S = kloosterman_matrix(ms, ns, c, units=units)
        bound = dcount[c] * np.sqrt(np.gcd(gmn, c) * c)
        excess = np.abs(S) - bound * (1 + 1e-12) - 1e-9
        i = np.unravel_index(np.argmax(excess), excess.shape)
        if excess[i] > worst:
            worst = float(excess[i])
        if first is None and excess[i] > 0:
            first = (int(ms[i[0]]), int(ns[i[1]]), c)
    return IdentityReport("weil_bound", first is None, m_max * n_max * c_max, first, worst)
