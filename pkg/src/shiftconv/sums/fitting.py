"""Least-squares extraction of the main-term constants from partial sums."""

from __future__ import annotations

import enum
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted

from ..errors import ConditioningError, ContractViolation
from ..special import zeta_star
from .partial import PartialSumSeries

__all__ = [
    "Model",
    "MainTermRegressor",
    "FitReport",
    "PhiEstimate",
    "fit_main_terms",
    "extract_phi",
    "SCHEMA",
]

SCHEMA = "fit_report_v1"
_EPS = 2.220446049250313e-16
_EULER_GAMMA = 0.5772156649015329
_SQRT_4PI = math.sqrt(4 * math.pi)
_MAX_CONDITION = 1e10
_COLLINEAR = 1e-3
_NUISANCE_GRID = np.round(np.arange(0.05, 0.951, 0.01), 2)
_NUISANCE_GAIN = 10.0


class Model(str, enum.Enum):
    LOG_LINEAR = "loglinear"
    TWO_POWER = "twopower"


def _basis(model: Model, w: complex, X: np.ndarray) -> np.ndarray:
    if model is Model.LOG_LINEAR:
        return np.column_stack([X * np.log(X), X])
    return np.column_stack([X.astype(complex), np.exp((2 - 2 * w) * np.log(X))])


def _solve(A: np.ndarray, b: np.ndarray, weights: np.ndarray):
    """Weighted least squares with column scaling; returns (coef, cov_unscaled, condition)."""
    Aw = A * weights[:, None]
    bw = b * weights
    scale = np.linalg.norm(Aw, axis=0)
    if np.any(scale == 0):
        raise ConditioningError("design matrix has a zero column")
    As = Aw / scale
    cond = np.linalg.cond(As)
    coef_s, *_ = np.linalg.lstsq(As, bw, rcond=None)
    gram_inv = np.linalg.pinv(As.conj().T @ As)
    coef = coef_s / scale
    cov = gram_inv / np.outer(scale, scale)
    resid = bw - As @ coef_s
    return coef, cov, cond, resid


class MainTermRegressor(RegressorMixin, BaseEstimator):
    """Fit S(X) by c_1 B_1(X) + c_2 B_2(X).

    ``model="loglinear"`` uses B = (X log X, X) for w = 1/2 and ``"twopower"``
    uses B = (X, X^{2-2w}).  Rows are weighted by 1/X.  With ``nuisance=True``
    an extra term C X^alpha is profiled over alpha in [0.05, 0.95] and kept only
    if it cuts the weighted residual norm by more than a factor of 10.

    X is a single column of sample points; y may be complex.
    """

    def __init__(self, model: str = "loglinear", w=0.5, nuisance: bool = True):
        self.model = model
        self.w = w
        self.nuisance = nuisance

    def _design(self, X):
        model = Model(self.model)
        w = complex(self.w)
        if model is Model.LOG_LINEAR and w != 0.5:
            raise ContractViolation("the log-linear model belongs to w = 1/2")
        if model is Model.TWO_POWER:
            if w == 0.5 or abs(1 - 2 * w) < _COLLINEAR:
                raise ConditioningError(
                    f"basis X and X^(2-2w) are collinear for w = {w} (|1 - 2w| < {_COLLINEAR})"
                )
        return _basis(model, w, X)

    def fit(self, X, y):
        X = check_array(X, ensure_2d=True, dtype=float)
        if X.shape[1] != 1:
            raise ContractViolation("X must have exactly one column")
        x = X[:, 0]
        if np.any(x <= 0):
            raise ContractViolation("sample points must be positive")
        y = np.asarray(y)
        if y.shape != x.shape:
            raise ContractViolation("y must match X in length")
        A = self._design(x)
        weights = 1 / x
        coef, cov, cond, resid = _solve(A, y, weights)
        if cond > _MAX_CONDITION:
            raise ConditioningError(f"scaled design matrix condition number {cond:.3g} exceeds {_MAX_CONDITION:.0e}")
        dof = max(x.size - A.shape[1], 1)
        self.nuisance_exponent_ = None
        self.nuisance_coef_ = None
        self.nuisance_stderr_ = None
        if self.nuisance and x.size > A.shape[1] + 2:
            base_norm = np.linalg.norm(resid)
            best = None
            for alpha in _NUISANCE_GRID:
                Aa = np.column_stack([A, x**alpha])
                try:
                    ca, cova, conda, ra = _solve(Aa, y, weights)
                except ConditioningError:
                    continue
                norm = np.linalg.norm(ra)
                if conda < _MAX_CONDITION and (best is None or norm < best[0]):
                    best = (norm, alpha, ca, cova, ra)
            if best is not None and best[0] * _NUISANCE_GAIN < base_norm:
                norm, alpha, ca, cova, ra = best
                alpha, ca, ra = self._refine(A, x, y, weights, alpha)
                self.nuisance_exponent_ = alpha
                self.nuisance_coef_ = ca[-1]
                Aa = np.column_stack([A, x**alpha, ca[-1] * x**alpha * np.log(x)])
                _, cov_full, _, _ = _solve(Aa, y, weights)
                dof = max(x.size - Aa.shape[1], 1)
                sigma2 = float(np.vdot(ra, ra).real) / dof
                self.nuisance_stderr_ = float(math.sqrt(max(abs(cov_full[-1, -1].real) * sigma2, 0.0)))
                coef = ca[:-1]
                cov = cov_full[: A.shape[1], : A.shape[1]]
                resid = ra
        sigma2 = float(np.vdot(resid, resid).real) / dof
        self.coef_ = coef
        self.coef_stderr_ = np.sqrt(np.abs(np.diag(cov).real) * sigma2)
        self.condition_number_ = float(cond)
        self.n_features_in_ = 1
        return self

    @staticmethod
    def _refine(A, x, y, weights, alpha0):
        """Golden-section refinement of the nuisance exponent around the grid optimum."""

        def norm_at(alpha):
            Aa = np.column_stack([A, x**alpha])
            ca, _, _, ra = _solve(Aa, y, weights)
            return np.linalg.norm(ra), ca, ra

        lo, hi = alpha0 - 0.01, alpha0 + 0.01
        g = (math.sqrt(5) - 1) / 2
        for _ in range(40):
            a = hi - g * (hi - lo)
            b = lo + g * (hi - lo)
            if norm_at(a)[0] < norm_at(b)[0]:
                hi = b
            else:
                lo = a
        alpha = 0.5 * (lo + hi)
        _, ca, ra = norm_at(alpha)
        return float(alpha), ca, ra

    def predict(self, X):
        check_is_fitted(self, "coef_")
        X = check_array(X, ensure_2d=True, dtype=float)
        pred = self._design(X[:, 0]) @ self.coef_
        return pred.real if np.all(np.imag(self.coef_) == 0) else pred


@dataclass
class FitReport:
    """Result of ``fit_main_terms``; serialises to the ``fit_report_v1`` JSON schema."""

    model: Model
    h: int
    w: complex
    coefficients: list
    coefficient_stderr: list
    coefficient_errors: list
    window_bounds: list
    window_estimates: list
    stability_per_coefficient: list
    stability: float
    residual_exponent: float | None
    residual_exponent_stderr: float | None
    residual_exponent_method: str
    n_points: int
    schema: str = SCHEMA
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["model"] = Model(self.model).value
        d["w"] = _cjson(self.w)
        d["coefficients"] = [_cjson(c) for c in self.coefficients]
        d["window_estimates"] = [[_cjson(c) for c in row] for row in self.window_estimates]
        return d

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> FitReport:
        d = json.loads(text)
        if d.get("schema") != SCHEMA:
            raise ContractViolation(f"unsupported schema {d.get('schema')!r}")
        d["model"] = Model(d["model"])
        d["w"] = _cload(d["w"])
        d["coefficients"] = [_cload(c) for c in d["coefficients"]]
        d["window_estimates"] = [[_cload(c) for c in row] for row in d["window_estimates"]]
        return cls(**d)


def _cjson(c) -> list:
    c = complex(c)
    return [float(c.real), float(c.imag)]


def _cload(v) -> complex:
    return complex(v[0], v[1])


def _windows(grid: np.ndarray):
    lg = np.log10(grid)
    lo, hi = lg[0], lg[-1]
    width = min(1.0, (hi - lo) / 2)
    step = width / 2
    bounds = []
    start = lo
    while start + width <= hi + 1e-9:
        bounds.append((start, start + width))
        start += step
    return bounds


def _residual_exponent(x, resid, floor):
    keep = np.abs(resid) > 10 * floor
    if keep.sum() < 4:
        return None, None
    lx, lr = np.log(x[keep]), np.log(np.abs(resid[keep]))
    coef, cov = np.polyfit(lx, lr, 1, cov=True)
    return float(coef[0]), float(math.sqrt(max(cov[0, 0], 0.0)))


def fit_main_terms(series: PartialSumSeries, model: Model | str | None = None, nuisance: bool = True) -> FitReport:
    """Fit the main-term model over the whole grid and over overlapping one-decade windows."""
    x = np.asarray(series.grid, dtype=float)
    y = np.asarray(series.values)
    if x.size < 8 or math.log10(x[-1] / x[0]) < 1.5 - 1e-9:
        raise ContractViolation("grid needs at least 8 points spanning at least 1.5 decades")
    w = complex(series.w)
    if model is None:
        model = Model.LOG_LINEAR if w == 0.5 else Model.TWO_POWER
    model = Model(model)
    reg = MainTermRegressor(model=model.value, w=w, nuisance=nuisance).fit(x[:, None], y)
    bounds = _windows(x)
    windows = []
    for lo, hi in bounds:
        sel = (np.log10(x) >= lo - 1e-9) & (np.log10(x) <= hi + 1e-9)
        wreg = MainTermRegressor(model=model.value, w=w, nuisance=False).fit(x[sel, None], y[sel])
        windows.append(list(wreg.coef_))
    est = np.array(windows)
    full = np.asarray(reg.coef_)
    spread = (est.max(axis=0) - est.min(axis=0)) if np.isrealobj(est) else _complex_spread(est)
    stab = [float(abs(s) / abs(c)) if c != 0 else math.inf for s, c in zip(spread, full)]
    errors = [float(math.hypot(se, abs(sp) / 2)) for se, sp in zip(reg.coef_stderr_, spread)]
    notes = []
    if reg.nuisance_exponent_ is not None:
        rexp, rerr, method = reg.nuisance_exponent_, reg.nuisance_stderr_, "nuisance_power"
        notes.append("a C X^alpha term was fitted; coefficients exclude it")
    else:
        resid = y - reg.predict(x[:, None])
        floor = series.abs_error if series.abs_error is not None else np.zeros(x.size)
        floor = np.maximum(floor, 64 * _EPS * np.abs(y))
        rexp, rerr = _residual_exponent(x, resid, floor)
        method = "loglog_regression"
        if rexp is None:
            notes.append("residuals at rounding level; residual exponent undefined")
            method = "undefined"
    return FitReport(
        model=model,
        h=int(series.h),
        w=w,
        coefficients=[complex(c) for c in full],
        coefficient_stderr=[float(s) for s in reg.coef_stderr_],
        coefficient_errors=errors,
        window_bounds=[[float(a), float(b)] for a, b in bounds],
        window_estimates=[[complex(c) for c in row] for row in windows],
        stability_per_coefficient=stab,
        stability=float(max(stab)),
        residual_exponent=rexp,
        residual_exponent_stderr=rerr,
        residual_exponent_method=method,
        n_points=int(x.size),
        notes=notes,
    )


def _complex_spread(est):
    out = []
    for col in est.T:
        out.append(max(abs(a - b) for a in col for b in col))
    return np.array(out)


@dataclass(frozen=True)
class PhiEstimate:
    """phi_h values recovered from fitted coefficients, with propagated errors.

    w != 1/2: ``phi_half_plus_w`` = phi_h(1/2 + w), ``phi_three_half_minus_w`` = phi_h(3/2 - w).
    w = 1/2: ``phi_at_one``, the X-coefficient aggregate
    (gamma - log(4 pi h) - 1) phi_h(1) + phi_h'(1), and ``phi_prime_at_one`` solved from it.
    """

    h: int
    w: complex
    phi_half_plus_w: complex | None = None
    phi_half_plus_w_error: float | None = None
    phi_three_half_minus_w: complex | None = None
    phi_three_half_minus_w_error: float | None = None
    phi_at_one: complex | None = None
    phi_at_one_error: float | None = None
    x_coefficient_aggregate: complex | None = None
    phi_prime_at_one: complex | None = None
    phi_prime_at_one_error: float | None = None


def extract_phi(report: FitReport, w=None, h: int | None = None) -> PhiEstimate:
    w = complex(report.w if w is None else w)
    h = int(report.h if h is None else h)
    c1, c2 = report.coefficients
    e1, e2 = report.coefficient_errors
    if w == 0.5:
        phi1 = c1 / _SQRT_4PI
        aggregate = c2 / _SQRT_4PI
        k = _EULER_GAMMA - math.log(4 * math.pi * h) - 1
        dphi = aggregate - k * phi1
        err1 = e1 / _SQRT_4PI
        errp = math.hypot(e2 / _SQRT_4PI, abs(k) * err1)
        return PhiEstimate(
            h=h, w=w, phi_at_one=phi1, phi_at_one_error=err1,
            x_coefficient_aggregate=aggregate, phi_prime_at_one=dphi, phi_prime_at_one_error=errp,
        )
    zs1 = zeta_star(2 * w).value
    zs2 = zeta_star(2 - 2 * w).value
    lh = math.log(h)
    f1 = np.exp((w - 0.5) * lh) / (_SQRT_4PI * zs1)
    f2 = (2 - 2 * w) * np.exp((0.5 - w) * lh) / (_SQRT_4PI * zs2)
    return PhiEstimate(
        h=h, w=w,
        phi_half_plus_w=complex(c1 * f1), phi_half_plus_w_error=float(e1 * abs(f1)),
        phi_three_half_minus_w=complex(c2 * f2), phi_three_half_minus_w_error=float(e2 * abs(f2)),
    )
