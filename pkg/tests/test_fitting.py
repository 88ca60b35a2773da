import json
import math

import numpy as np
import pytest
from sklearn.base import clone

from shiftconv.errors import ConditioningError, ContractViolation
from shiftconv.series import MainTermInputs, main_term_components
from shiftconv.sums import (
    FitReport,
    MainTermRegressor,
    Model,
    PartialSumSeries,
    extract_phi,
    fit_main_terms,
    log_grid,
    partial_sums,
)
from shiftconv.sums.fitting import SCHEMA

GRID = log_grid(1e5, 1e7, 16)


def synthetic(values, w=0.5, h=1, grid=GRID):
    return PartialSumSeries(h, w, grid, values)


def test_recovers_own_loglinear_model():
    x = GRID
    rep = fit_main_terms(synthetic(3 * x * np.log(x) + 5 * x))
    c1, c2 = rep.coefficients
    assert abs(c1 - 3) < 1e-8 and abs(c2 - 5) < 1e-8
    assert rep.residual_exponent is None
    assert rep.residual_exponent_method == "undefined"
    assert any("undefined" in n for n in rep.notes)


def test_recovers_own_two_power_model():
    x, w = GRID, 0.7
    rep = fit_main_terms(synthetic(2 * x - 4 * x ** (2 - 2 * w), w=w))
    assert rep.model is Model.TWO_POWER
    c1, c2 = rep.coefficients
    assert abs(c1 - 2) < 1e-8 and abs(c2 + 4) < 1e-8


def test_recovers_planted_exponent():
    x = GRID
    rep = fit_main_terms(synthetic(3 * x * np.log(x) + 5 * x + x**0.75))
    assert rep.residual_exponent == pytest.approx(0.75, abs=0.05)
    assert rep.residual_exponent_stderr is not None and rep.residual_exponent_stderr >= 0


def test_loglog_fallback_reports_slope_and_stderr():
    # the main-term fit absorbs part of X^0.75, so this slope is biased upward
    x = GRID
    rep = fit_main_terms(synthetic(3 * x * np.log(x) + 5 * x + x**0.75), nuisance=False)
    assert rep.residual_exponent_method == "loglog_regression"
    assert 0.75 - 0.05 < rep.residual_exponent < 1.0
    assert rep.residual_exponent_stderr > 0


@pytest.mark.parametrize("w", [0.5, 0.5 + 1e-5, 0.4999999])
def test_two_power_collinear_near_half(w):
    with pytest.raises(ConditioningError, match="collinear"):
        fit_main_terms(synthetic(GRID * 1.0, w=w), model=Model.TWO_POWER)


def test_loglinear_only_at_half():
    with pytest.raises(ContractViolation):
        fit_main_terms(synthetic(GRID * 1.0, w=0.7), model=Model.LOG_LINEAR)


def test_grid_too_small():
    with pytest.raises(ContractViolation):
        fit_main_terms(synthetic(np.arange(7.0) + 1, grid=np.logspace(3, 6, 7)))
    with pytest.raises(ContractViolation):
        fit_main_terms(synthetic(np.arange(20.0), grid=np.logspace(3, 4.4, 20)))


def test_windows_overlap_and_cover():
    x = GRID
    rep = fit_main_terms(synthetic(3 * x * np.log(x) + 5 * x))
    bounds = rep.window_bounds
    assert len(bounds) >= 3
    assert bounds[0][0] == pytest.approx(5.0) and bounds[-1][1] == pytest.approx(7.0)
    for (a0, b0), (a1, b1) in zip(bounds, bounds[1:]):
        assert a1 < b0
    assert len(rep.window_estimates) == len(bounds)
    assert rep.stability < 1e-8


def test_window_estimates_agree_with_stability():
    x = GRID
    rep = fit_main_terms(synthetic(3 * x * np.log(x) + 5 * x + 40 * x**0.75), nuisance=False)
    est = np.array(rep.window_estimates).real
    spread = est.max(axis=0) - est.min(axis=0)
    coef = np.array(rep.coefficients).real
    assert rep.stability == pytest.approx(max(spread / np.abs(coef)), rel=1e-12)
    assert rep.stability > 0


def test_regressor_sklearn_api():
    reg = MainTermRegressor(model="twopower", w=0.7, nuisance=False)
    assert reg.get_params() == {"model": "twopower", "w": 0.7, "nuisance": False}
    twin = clone(reg).set_params(w=0.6)
    assert twin.w == 0.6 and reg.w == 0.7
    x = GRID
    y = 2 * x + 3 * x**0.6
    pred = reg.fit(x[:, None], y).predict(x[:, None])
    assert np.max(np.abs(pred - y) / y) < 1e-12
    assert reg.score(x[:, None], y) == pytest.approx(1.0)


def test_regressor_predict_before_fit():
    from sklearn.exceptions import NotFittedError

    with pytest.raises(NotFittedError):
        MainTermRegressor().predict(GRID[:, None])


def test_regressor_input_contracts():
    reg = MainTermRegressor()
    with pytest.raises(ContractViolation):
        reg.fit(np.ones((10, 2)), np.ones(10))
    with pytest.raises(ContractViolation):
        reg.fit(-GRID[:, None], GRID)
    with pytest.raises(ContractViolation):
        reg.fit(GRID[:, None], GRID[:-1])


def test_report_json_round_trip():
    x = GRID
    rep = fit_main_terms(synthetic((2 + 1j) * x - (1 - 0.5j) * x ** (1.4 - 0.2j), w=0.3 + 0.1j))
    text = rep.to_json()
    d = json.loads(text)
    assert d["schema"] == SCHEMA == "fit_report_v1"
    for key in ("model", "coefficients", "window_estimates", "stability", "residual_exponent", "residual_exponent_stderr"):
        assert key in d
    back = FitReport.from_json(text)
    assert back == rep
    assert back.to_json() == text


def test_report_json_rejects_other_schema():
    rep = fit_main_terms(synthetic(3 * GRID * np.log(GRID) + 5 * GRID))
    d = rep.to_dict()
    d["schema"] = "fit_report_v0"
    with pytest.raises(ContractViolation):
        FitReport.from_json(json.dumps(d))


@pytest.mark.parametrize("h", [1, 3])
def test_extract_phi_round_trip_half(h):
    phi, dphi = 0.8, -0.3
    inputs = MainTermInputs(h, 0.5, phi, phi_prime=dphi)
    y = np.array([sum(main_term_components(X, inputs)) for X in GRID]).real
    rep = fit_main_terms(synthetic(y, h=h))
    est = extract_phi(rep)
    assert est.phi_at_one == pytest.approx(phi, rel=1e-9)
    assert est.phi_prime_at_one == pytest.approx(dphi, abs=1e-8)
    k = 0.5772156649015329 - math.log(4 * math.pi * h) - 1
    assert est.x_coefficient_aggregate == pytest.approx(k * phi + dphi, rel=1e-9)


@pytest.mark.parametrize("w,h", [(0.7, 1), (0.3 + 0.2j, 2), (0.55, 5)])
def test_extract_phi_round_trip_two_power(w, h):
    pa, pr = 1.3 - 0.2j, 0.4 + 0.1j
    inputs = MainTermInputs(h, w, pa, pr)
    y = np.array([sum(main_term_components(X, inputs)) for X in GRID])
    rep = fit_main_terms(synthetic(y, w=w, h=h))
    est = extract_phi(rep)
    assert abs(est.phi_half_plus_w - pa) < 1e-8
    assert abs(est.phi_three_half_minus_w - pr) < 1e-8
    rebuilt = MainTermInputs(h, w, est.phi_half_plus_w, est.phi_three_half_minus_w)
    for X in GRID[::8]:
        a = sum(main_term_components(X, rebuilt))
        b = sum(main_term_components(X, inputs))
        assert abs(a - b) <= 1e-8 * abs(b)


def test_real_data_half_windows_consistent():
    grid = log_grid(1e4, 1e6, 16)
    rep = fit_main_terms(partial_sums(grid, 0.5, 1))
    assert rep.coefficients[0].real > 0
    phis = [extract_phi(FitReport(**{**rep.__dict__, "coefficients": row})).phi_at_one for row in rep.window_estimates]
    spread = (max(p.real for p in phis) - min(p.real for p in phis)) / abs(extract_phi(rep).phi_at_one)
    assert spread <= rep.stability_per_coefficient[0] + 1e-15
