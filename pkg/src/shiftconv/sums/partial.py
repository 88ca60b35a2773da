"""Sharp and smoothed partial sums S(X; w, h) and the smoothing kernels."""

from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass

import numpy as np

from ..arith import sieve_divisor_count, sieve_r2, sieve_sigma
from ..errors import ContractViolation, ResourceError
from ..special import QuadratureBudget

__all__ = [
    "Mode",
    "Sign",
    "PartialSumSeries",
    "SmoothingKernel",
    "SumTables",
    "kernel_eval",
    "mellin_U",
    "log_grid",
    "partial_sum_sharp",
    "partial_sum_smoothed",
    "partial_sums",
]

_EPS = 2.220446049250313e-16
_BLOCK = 1 << 16


class Mode(str, enum.Enum):
    SHARP = "sharp"
    SMOOTHED_PLUS = "smoothed_plus"
    SMOOTHED_MINUS = "smoothed_minus"


class Sign(str, enum.Enum):
    PLUS = "plus"
    MINUS = "minus"


def _is_half(w: complex) -> bool:
    return w == 0.5


# ---------------------------------------------------------------- kernels


def _psi(u):
    """C-infinity step: 0 for u <= 0, 1 for u >= 1, e^{-1/u} / (e^{-1/u} + e^{-1/(1-u)}) between."""
    u = np.asarray(u, dtype=float)
    out = np.where(u >= 1, 1.0, 0.0)
    mid = (u > 0) & (u < 1)
    um = u[mid]
    # 1 / (1 + exp(1/u - 1/(1-u)))
    with np.errstate(over="ignore"):
        out[mid] = 1.0 / (1.0 + np.exp(1.0 / um - 1.0 / (1.0 - um)))
    return out


@dataclass(frozen=True)
class SmoothingKernel:
    """u_{-y} drops from 1 to 0 on [1 - 1/y, 1]; u_{+y} on [1, 1 + 1/y]."""

    sign: Sign
    y: float

    def __post_init__(self):
        object.__setattr__(self, "sign", Sign(self.sign))
        if not (math.isfinite(self.y) and self.y > 1):
            raise ContractViolation(f"kernel parameter y must exceed 1, got {self.y}")

    @property
    def transition(self) -> tuple[float, float]:
        if self.sign is Sign.MINUS:
            return 1 - 1 / self.y, 1.0
        return 1.0, 1 + 1 / self.y

    def __call__(self, t):
        a, _ = self.transition
        t = np.asarray(t, dtype=float)
        return 1.0 - _psi((t - a) * self.y)


def kernel_eval(kernel: SmoothingKernel, t):
    out = kernel(t)
    return float(out) if out.ndim == 0 else out


def _tanh_sinh_nodes(h: float, levels: float = 3.2):
    k = np.arange(-math.ceil(levels / h), math.ceil(levels / h) + 1)
    tau = k * h
    arg = 0.5 * math.pi * np.sinh(tau)
    x = np.tanh(arg)
    weight = 0.5 * math.pi * np.cosh(tau) / np.cosh(arg) ** 2
    return x, weight


def mellin_U(kernel: SmoothingKernel, s, budget: QuadratureBudget | None = None) -> complex:
    """U(s) = int_0^inf u(t) t^{s-1} dt = a^s / s + int_a^b u(t) t^{s-1} dt over the transition [a, b]."""
    budget = budget or QuadratureBudget(target_abs_error=1e-13)
    s = complex(s)
    if s == 0:
        raise ContractViolation("mellin_U is undefined at s = 0")
    a, b = kernel.transition
    head = np.exp(s * math.log(a)) / s
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    h, prev = 0.5, None
    while True:
        x, wt = _tanh_sinh_nodes(h)
        t = mid + half * x
        f = kernel(t) * np.exp((s - 1) * np.log(t))
        cur = half * h * complex((wt * f).sum())
        if prev is not None and abs(cur - prev) <= max(budget.target_abs_error, 1e-15 * abs(cur)):
            return complex(head + cur)
        if x.size * 2 > budget.max_nodes:
            raise ContractViolation("mellin_U node budget exhausted")
        prev, h = cur, h / 2


# ---------------------------------------------------------------- series type


@dataclass(frozen=True)
class PartialSumSeries:
    h: int
    w: complex
    grid: np.ndarray
    values: np.ndarray
    mode: Mode = Mode.SHARP
    y_param: float | None = None
    abs_error: np.ndarray | None = None

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values)
        if grid.ndim != 1 or values.shape != grid.shape:
            raise ContractViolation("grid and values must be one-dimensional and the same length")
        if grid.size > 1 and not np.all(np.diff(grid) > 0):
            raise ContractViolation("grid must be strictly increasing")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "w", complex(self.w))
        object.__setattr__(self, "mode", Mode(self.mode))
        if self.mode is not Mode.SHARP and self.y_param is None:
            raise ContractViolation("smoothed series need y_param")
        if self.abs_error is not None:
            object.__setattr__(self, "abs_error", np.asarray(self.abs_error, dtype=float))

    def to_csv(self, fh=None) -> str | None:
        out = io.StringIO() if fh is None else fh
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["X", "re", "im"])
        for x, v in zip(self.grid, self.values):
            v = complex(v)
            writer.writerow([_fmt(x), _fmt(v.real), _fmt(v.imag)])
        return out.getvalue() if fh is None else None

    @classmethod
    def from_csv(cls, text_or_fh, h: int = 1, w=0.5, mode=Mode.SHARP, y_param=None) -> PartialSumSeries:
        fh = io.StringIO(text_or_fh) if isinstance(text_or_fh, str) else text_or_fh
        reader = csv.DictReader(fh)
        fields = reader.fieldnames or []
        missing = [c for c in ("X", "re") if c not in fields]
        if missing:
            raise ContractViolation(f"CSV is missing column(s): {', '.join(missing)}")
        xs, vals = [], []
        for row in reader:
            xs.append(float(row["X"]))
            vals.append(complex(float(row["re"]), float(row.get("im") or 0.0)))
        values = np.array(vals)
        if np.all(values.imag == 0):
            values = values.real
        return cls(h=h, w=w, grid=np.array(xs), values=values, mode=mode, y_param=y_param)


def _fmt(x: float) -> str:
    x = float(x)
    if x.is_integer() and abs(x) < 2**53:
        return str(int(x))
    return format(x, ".17g")


def log_grid(start: float = 1e5, stop: float = 1e7, per_decade: int = 16) -> np.ndarray:
    """Integer X values log-spaced from start to stop inclusive."""
    if not 1 <= start < stop:
        raise ContractViolation("need 1 <= start < stop")
    if per_decade < 1:
        raise ContractViolation("per_decade must be positive")
    lo, hi = math.log10(start), math.log10(stop)
    n = round((hi - lo) * per_decade)
    pts = np.round(10 ** np.linspace(lo, hi, n + 1)).astype(np.int64)
    return np.unique(pts)


# ---------------------------------------------------------------- tables


@dataclass
class SumTables:
    """r2 and sigma_{1-2w} tables shared by the sums at one (w, N)."""

    N: int
    w: complex
    r2: np.ndarray
    sigma: np.ndarray

    @classmethod
    def build(cls, N: int, w, memory_budget: int | None = None) -> SumTables:
        w = complex(w)
        N = int(N)
        r2 = sieve_r2(N, memory_budget=memory_budget).values
        if _is_half(w):
            sigma = sieve_divisor_count(N, memory_budget=memory_budget).values
        else:
            sigma = sieve_sigma(N, 1 - 2 * w, memory_budget=memory_budget).values
        return cls(N, w, r2, sigma)

    def terms(self, h: int, upto: int) -> np.ndarray:
        """r2(m) sigma_{1-2w}(m + h) for 0 <= m <= upto - h."""
        if upto > self.N:
            raise ResourceError(f"tables reach {self.N}, need {upto}", limit=self.N, requested=upto)
        n = upto - h + 1
        if n <= 0:
            return self.r2[:0] * self.sigma[:0]
        return self.r2[:n] * self.sigma[h : h + n]


def _tables_for(w, h, upto, tables):
    if tables is not None:
        if complex(tables.w) != complex(w):
            raise ContractViolation("tables were built for a different w")
        return tables
    return SumTables.build(max(upto, h, 1), w)


# ---------------------------------------------------------------- sums


def partial_sum_sharp(X, w, h: int, tables: SumTables | None = None):
    """S(X; w, h) = sum_{0 <= m <= X - h} r2(m) sigma_{1-2w}(m + h).

    Exact python int at w = 1/2, float for other real w, complex otherwise.
    """
    w = complex(w)
    _check_h(h)
    top = math.floor(X)
    if top < h:
        return 0 if _is_half(w) else _typed(0j, w)
    t = _tables_for(w, h, top, tables)
    terms = t.terms(h, top)
    if _is_half(w):
        return int(terms.sum(dtype=np.int64))
    return _typed(complex(_compensated_prefix(terms, np.array([terms.size]))[0]), w)


def _typed(v: complex, w: complex):
    return v.real if w.imag == 0 else v


def partial_sum_smoothed(X, kernel: SmoothingKernel, w, h: int, tables: SumTables | None = None):
    """sum_m r2(m) sigma_{1-2w}(m + h) u((m + h) / X); float for real w."""
    w = complex(w)
    _check_h(h)
    X = float(X)
    if not X > 0:
        raise ContractViolation("X must be positive")
    _, b = kernel.transition
    top = math.floor(X * b)
    if top < h:
        return _typed(0j, w)
    t = _tables_for(w, h, top, tables)
    terms = t.terms(h, top)
    weights = kernel(np.arange(h, top + 1, dtype=float) / X)
    total = terms * weights
    value = complex(math.fsum(total.real), math.fsum(total.imag) if np.iscomplexobj(total) else 0.0)
    return _typed(value, w)


def _check_h(h):
    if int(h) != h or h < 1:
        raise ContractViolation("h must be a positive integer")


def _compensated_prefix(terms: np.ndarray, counts: np.ndarray) -> np.ndarray:
    """sum(terms[:k]) for each k in counts with exactly summed block totals."""
    n = terms.size
    starts = np.arange(0, n, _BLOCK)
    if starts.size == 0:
        return np.zeros(counts.size, dtype=complex)
    block_sums = np.add.reduceat(terms, starts) if n else np.zeros(0)
    re_prefix = [0.0]
    im_prefix = [0.0]
    re_parts, im_parts = [], []
    for b in np.asarray(block_sums, dtype=complex):
        re_parts.append(b.real)
        im_parts.append(b.imag)
        re_prefix.append(math.fsum(re_parts))
        im_prefix.append(math.fsum(im_parts))
    out = np.empty(counts.size, dtype=complex)
    for i, k in enumerate(counts):
        k = int(k)
        blk = k // _BLOCK
        rest = terms[blk * _BLOCK : k].astype(complex).sum() if k > blk * _BLOCK else 0j
        out[i] = complex(re_prefix[blk], im_prefix[blk]) + rest
    return out


def partial_sums(
    grid,
    w,
    h: int,
    mode: Mode = Mode.SHARP,
    y_param: float | None = None,
    tables: SumTables | None = None,
) -> PartialSumSeries:
    """Evaluate S on a grid of X values from one pair of tables."""
    mode = Mode(mode)
    w = complex(w)
    _check_h(h)
    grid = np.asarray(grid, dtype=float)
    if mode is Mode.SHARP:
        top = int(math.floor(grid.max()))
    else:
        if y_param is None:
            raise ContractViolation("smoothed modes need y_param")
        top = int(math.floor(grid.max() * (1 + 1 / y_param)))
    t = _tables_for(w, h, max(top, h), tables)
    if mode is Mode.SHARP:
        counts = np.maximum(np.floor(grid).astype(np.int64) - h + 1, 0)
        terms = t.terms(h, max(top, h))
        if _is_half(w):
            if terms.size and int(terms.max()) * terms.size >= 2**62:
                raise ResourceError("int64 accumulation could overflow", limit=2**62)
            csum = np.concatenate([[0], np.cumsum(terms, dtype=np.int64)])
            values = csum[counts]
            err = np.zeros(grid.size)
        else:
            values = _compensated_prefix(terms, counts)
            mags = _compensated_prefix(np.abs(terms), counts).real
            err = 4 * _EPS * (math.log2(_BLOCK) + 1) * mags
            if w.imag == 0:
                values = values.real
        return PartialSumSeries(h, w, grid, values, mode, None, err)
    kernel = SmoothingKernel(Sign.PLUS if mode is Mode.SMOOTHED_PLUS else Sign.MINUS, y_param)
    values = np.array([partial_sum_smoothed(X, kernel, w, h, t) for X in grid])
    if w.imag == 0:
        values = values.real
    return PartialSumSeries(h, w, grid, values, mode, y_param, None)
