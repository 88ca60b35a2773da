import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shiftconv.errors import ContractViolation, PoleError, UnsupportedRegionError
from shiftconv.special import (
    Method,
    QuadratureBudget,
    SpecialValue,
    bessel_k,
    bessel_k_array,
    bessel_k_imag_order,
    digamma,
    gamma_c,
    hurwitz_zeta,
    kuznetsov_geometric_integral,
    l_chi4,
    l_chi4_star,
    loggamma,
    whittaker_w,
    zeta_c,
    zeta_star,
)

mp.mp.dps = 30
EULER_GAMMA = 0.57721566490153286
CATALAN = 0.91596559417721901505


def _l_chi4_taylor_at_0(s, terms=14):
    q = (mp.mpf(1) / 4, mp.mpf(3) / 4)
    d = [mp.zeta(0, q[0], k) - mp.zeta(0, q[1], k) for k in range(terms)]
    ln4 = mp.log(4)
    total = 0
    for n in range(terms):
        c = mp.fsum((-ln4) ** (n - k) / mp.factorial(n - k) * d[k] / mp.factorial(k) for k in range(n + 1))
        total += c * s**n
    return total


def mp_l_chi4(s):
    # mpmath's Hurwitz and Dirichlet routines both lose ~1e-11 at tiny nonzero s;
    # the Hurwitz split is singular at s = 1
    with mp.workdps(60):
        s = mp.mpc(s)
        if abs(s) < 1e-3:
            return complex(_l_chi4_taylor_at_0(s))
        if abs(s - 1) < 0.5:
            return complex(mp.dirichlet(s, [0, 1, 0, -1]))
        return complex(mp.power(4, -s) * (mp.zeta(s, mp.mpf(1) / 4) - mp.zeta(s, mp.mpf(3) / 4)))


def within_estimate(val: SpecialValue, ref, slack=4e-16):
    """Observed deviation is covered by the reported estimate (plus ulp-level slack)."""
    return abs(complex(val.value) - ref) <= val.abs_error_estimate + slack * abs(ref)


def near_pole(s, tol):
    n = min(round(s.real), 0)
    return abs(s - n) < tol


# ---------------------------------------------------------------- value types


def test_special_value_rejects_bad_estimates():
    with pytest.raises(ContractViolation):
        SpecialValue(1.0, -1.0, Method.STIRLING)
    with pytest.raises(ContractViolation):
        SpecialValue(1.0, math.inf, Method.STIRLING)


def test_quadrature_budget_invariants():
    with pytest.raises(ContractViolation):
        QuadratureBudget(target_abs_error=0)
    with pytest.raises(ContractViolation):
        QuadratureBudget(max_nodes=8)


# ---------------------------------------------------------------- gamma


def test_gamma_classical_values():
    assert gamma_c(1).value == pytest.approx(1, rel=1e-15)
    assert gamma_c(0.5).value == pytest.approx(math.sqrt(math.pi), rel=1e-15)
    assert digamma(1).value == pytest.approx(-EULER_GAMMA, rel=1e-14)


@pytest.mark.parametrize("n", [0, -1, -7])
def test_gamma_poles(n):
    with pytest.raises(PoleError) as exc:
        gamma_c(n)
    assert exc.value.location == n
    with pytest.raises(PoleError):
        digamma(n)


@pytest.mark.parametrize("s", [2.2e-309, -3 + 1e-310, -1e-320j])
def test_numerically_at_pole(s):
    with pytest.raises(PoleError):
        gamma_c(s)
    with pytest.raises(PoleError):
        digamma(s)


@given(st.complex_numbers(max_magnitude=50, allow_nan=False, allow_infinity=False))
@settings(max_examples=120, deadline=None)
def test_gamma_against_mpmath(s):
    if near_pole(s, 1e-3):
        return
    ref = complex(mp.gamma(mp.mpc(s)))
    if not math.isfinite(abs(ref)) or abs(ref) > 1e300 or abs(ref) < 1e-300:
        return
    v = gamma_c(s)
    assert abs(v.value - ref) <= max(1e-12 * abs(ref), v.abs_error_estimate)
    assert within_estimate(v, ref, slack=1e-14)


@given(st.complex_numbers(max_magnitude=20, allow_nan=False, allow_infinity=False))
@settings(max_examples=100, deadline=None)
def test_gamma_recurrence(s):
    if near_pole(s, 1e-3):
        return
    lhs, rhs = gamma_c(s + 1).value, s * gamma_c(s).value
    assert abs(lhs - rhs) <= 1e-12 * abs(lhs)


@given(st.complex_numbers(max_magnitude=30, allow_nan=False, allow_infinity=False))
@settings(max_examples=80, deadline=None)
def test_digamma_against_mpmath(s):
    if near_pole(s, 1e-2):
        return
    ref = complex(mp.digamma(mp.mpc(s)))
    assert abs(digamma(s).value - ref) <= 1e-12 * max(1, abs(ref))


def test_loggamma_vectorised():
    z = np.array([0.5, 3 + 4j, 10.0, -2.5 + 1j])
    expected = [complex(mp.gamma(mp.mpc(x))) for x in z]
    assert np.allclose(np.exp(loggamma(z)), expected, rtol=1e-13)


# ---------------------------------------------------------------- zeta and L


def test_zeta_classical_values():
    assert zeta_c(2).value == pytest.approx(math.pi**2 / 6, rel=1e-15)
    assert zeta_c(0).value == pytest.approx(-0.5, rel=1e-15)
    assert zeta_c(-1).value == pytest.approx(-1 / 12, rel=1e-14)
    assert zeta_c(-2).value == 0


def test_zeta_poles():
    with pytest.raises(PoleError):
        zeta_c(1)
    for s in (0, 1):
        with pytest.raises(PoleError):
            zeta_star(s)
    with pytest.raises(PoleError):
        hurwitz_zeta(1, 0.25)


def test_l_chi4_classical_values():
    assert l_chi4(1).value == pytest.approx(math.pi / 4, rel=1e-14)
    assert l_chi4(2).value == pytest.approx(CATALAN, rel=1e-14)
    assert abs(l_chi4(-1).value) == 0


@given(
    st.floats(-15, 15, allow_nan=False),
    st.floats(-40, 40, allow_nan=False),
)
@settings(max_examples=120, deadline=None)
def test_zeta_against_mpmath(a, b):
    s = complex(a, b)
    if abs(s - 1) < 1e-3:
        return
    ref = complex(mp.zeta(mp.mpc(s)))
    v = zeta_c(s)
    assert within_estimate(v, ref, slack=1e-14)
    assert abs(v.value - ref) <= 1e-11 * max(1, abs(ref))


@given(st.floats(-15, 15, allow_nan=False), st.floats(-40, 40, allow_nan=False))
@settings(max_examples=100, deadline=None)
def test_l_chi4_against_mpmath(a, b):
    s = complex(a, b)
    ref = mp_l_chi4(s)
    v = l_chi4(s)
    assert within_estimate(v, ref, slack=1e-14)
    assert abs(v.value - ref) <= 1e-11 * max(1, abs(ref))


@given(st.floats(0.05, 1.0), st.floats(-10, 20, allow_nan=False), st.floats(-20, 20, allow_nan=False))
@settings(max_examples=60, deadline=None)
def test_hurwitz_against_mpmath(a, sr, si):
    s = complex(sr, si)
    if abs(s - 1) < 1e-2:
        return
    ref = complex(mp.zeta(mp.mpc(s), a))
    v = hurwitz_zeta(s, a)
    assert within_estimate(v, ref, slack=1e-14)


_STRIP = [complex(a, b) for a in (0.1, 0.3, 0.5, 0.7, 0.9) for b in (-10, -2.5, 2.5, 10)]


@pytest.mark.parametrize("s", _STRIP)
def test_completed_functional_equations(s):
    assert abs(zeta_star(s).value - zeta_star(1 - s).value) < 1e-10
    assert abs(l_chi4_star(s).value - l_chi4_star(1 - s).value) < 1e-10


def test_completed_examples():
    assert abs(zeta_star(0.3 + 2j).value - zeta_star(0.7 - 2j).value) < 1e-10
    assert abs(l_chi4_star(0.4 + 1j).value - l_chi4_star(0.6 - 1j).value) < 1e-10


def test_completions_against_mpmath():
    for s in (2.5, 0.3 + 2j, 4 - 3j, -3.5 + 1j):
        ref = complex(mp.pi ** (-mp.mpc(s) / 2) * mp.gamma(mp.mpc(s) / 2) * mp.zeta(mp.mpc(s)))
        assert abs(zeta_star(s).value - ref) <= 1e-12 * abs(ref)
        ref_l = complex((mp.pi / 4) ** (-mp.mpc(s) / 2) * mp.gamma((mp.mpc(s) + 1) / 2)) * mp_l_chi4(s)
        assert abs(l_chi4_star(s).value - ref_l) <= 1e-12 * abs(ref_l)


def test_completions_at_gamma_poles_use_reflection():
    assert zeta_star(-4).value == pytest.approx(zeta_star(5).value, rel=1e-15)
    assert l_chi4_star(-3).value == pytest.approx(l_chi4_star(4).value, rel=1e-15)


# ---------------------------------------------------------------- K Bessel


def test_bessel_k_examples():
    assert bessel_k(0.5, 1.0).value == pytest.approx(math.sqrt(math.pi / 2) / math.e, rel=1e-14)
    assert bessel_k(0, 1.0).value == pytest.approx(0.4210244382407083, rel=1e-14)
    assert bessel_k(-0.7, 2.0).value == bessel_k(0.7, 2.0).value


@pytest.mark.parametrize("nu", [0.5, 1.5, 2.5, -2.5])
@pytest.mark.parametrize("x", [0.001, 0.2, 3.0, 49.0])
def test_bessel_half_integer_closed_forms(nu, x):
    base = math.sqrt(math.pi / (2 * x)) * math.exp(-x)
    poly = {0.5: 1.0, 1.5: 1 + 1 / x, 2.5: 1 + 3 / x + 3 / x**2}[abs(nu)]
    assert bessel_k(nu, x).value == pytest.approx(base * poly, rel=1e-10)


@given(
    st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False),
    st.floats(1e-3, 50),
)
@settings(max_examples=120, deadline=None)
def test_bessel_k_against_mpmath(nu, x):
    ref = complex(mp.besselk(mp.mpc(nu), x))
    v = bessel_k(nu, x)
    assert abs(v.value - ref) <= 1e-10 * abs(ref)
    assert within_estimate(v, ref, slack=1e-13)


def test_bessel_k_contract_and_underflow():
    with pytest.raises(ContractViolation):
        bessel_k(0, 0.0)
    with pytest.raises(ContractViolation):
        bessel_k(0, -1.0)
    tiny = bessel_k(0, 1000.0)
    assert tiny.value == 0 and tiny.method is Method.UNDERFLOW


def test_bessel_k_array_matches_scalar():
    x = np.geomspace(0.05, 200, 60)
    vals, err = bessel_k_array(1.3, x)
    for xi, v, e in zip(x, vals, err):
        ref = float(mp.besselk(1.3, xi))
        assert abs(v - ref) <= e + 1e-15 * ref
        assert abs(v - ref) <= 1e-12 * ref


def test_imag_order_examples():
    v = bessel_k_imag_order(0, 1.0)
    assert abs(v.value - bessel_k(0, 1.0).value) < 1e-8
    one = bessel_k_imag_order(1, 1.0)
    assert abs(one.value.imag) < 1e-8
    # exp(-cosh t) is below 1e-400 past t = 8
    oracle = float(mp.quad(lambda t: mp.exp(-mp.cosh(t)) * mp.cos(2 * t), [0, 2, 4, 8]))
    assert abs(oracle - float(mp.besselk(2j, 1).real)) < 1e-14
    assert abs(one.value - oracle) < 1e-6


@pytest.mark.parametrize("x", [0.5, 1.0, 2.0, 5.0, 10.0])
def test_imag_order_zero_matches_real_order(x):
    assert abs(bessel_k_imag_order(0, x).value - bessel_k(0, x).value) < 1e-8


@pytest.mark.parametrize("T,z", [(1.5, 0.7 + 0.4j), (3.0, 2.0 - 1.0j), (0.5, 0.3j + 0.05), (4.0, 8.0)])
def test_imag_order_against_mpmath(T, z):
    ref = complex(mp.besselk(2j * T, mp.mpc(z)))
    v = bessel_k_imag_order(T, z)
    assert abs(v.value - ref) <= v.abs_error_estimate + 1e-14 * abs(ref)
    assert abs(v.value - ref) <= 1e-8 * max(1.0, abs(ref))


def test_imag_order_contract():
    with pytest.raises(ContractViolation):
        bessel_k_imag_order(1, -1 + 1j)
    with pytest.raises(ContractViolation):
        bessel_k_imag_order(11, 1.0)


# ---------------------------------------------------------------- Whittaker


def test_whittaker_examples():
    assert whittaker_w(0.5, 0, 3.0).value == pytest.approx(math.sqrt(3) * math.exp(-1.5), rel=1e-15)
    lhs = whittaker_w(0, 0.3, 3.0).value
    rhs = math.sqrt(3.0 / math.pi) * bessel_k(0.3, 1.5).value
    assert abs(lhs - rhs) < 1e-9
    y = 40.0
    ratio = whittaker_w(0.5, 0.2, y).value / (math.sqrt(y) * math.exp(-y / 2))
    assert abs(ratio - 1) < 0.05


@pytest.mark.parametrize(
    "mu,x",
    [(0.3, 1.5), (0.0, 0.2), (0.5, 1.0), (1.2, 3.0), (2 + 1j, 0.8), (0.7j, 2.0), (3.5, 5.0), (0.9, 12.0), (4.0, 0.6), (1.5 - 0.5j, 20.0)],
)
def test_whittaker_bessel_bridge(mu, x):
    lhs = whittaker_w(0, mu, 2 * x).value
    rhs = math.sqrt(2 * x / math.pi) * bessel_k(mu, x).value
    assert abs(lhs - rhs) <= 1e-9 * abs(rhs)


@pytest.mark.parametrize("kappa", [-0.5, 0.0, 0.5])
@pytest.mark.parametrize("mu,x", [(0.8, 40.0), (0.25 + 1j, 0.3), (-1.7, 6.0), (2.2, 0.05)])
def test_whittaker_against_mpmath(kappa, mu, x):
    ref = complex(mp.whitw(kappa, mp.mpc(mu), x))
    v = whittaker_w(kappa, mu, x)
    assert abs(v.value - ref) <= 1e-10 * abs(ref)
    assert within_estimate(v, ref, slack=1e-13)


def test_whittaker_regions():
    with pytest.raises(ContractViolation):
        whittaker_w(1.0, 0.3, 1.0)
    with pytest.raises(ContractViolation):
        whittaker_w(0, 0.3, 0.0)
    with pytest.raises(UnsupportedRegionError):
        whittaker_w(0.5, 1j, 1.0)


# ---------------------------------------------------------------- Kuznetsov arc


@pytest.mark.slow
def test_kuznetsov_refinement_self_consistency():
    coarse = kuznetsov_geometric_integral(2, 1.0, nodes_per_panel=24)
    fine = kuznetsov_geometric_integral(2, 1.0, nodes_per_panel=48)
    assert abs(coarse.value - fine.value) < 1e-6
    assert coarse.abs_error_estimate < 1e-6
    assert math.isfinite(abs(coarse.value))


@pytest.mark.slow
def test_kuznetsov_against_frozen_mpmath_value():
    # mpmath arc quadrature of K_{6i}(beta e^{i phi}) e^{-i phi}, beta = 1, T = 3
    v = kuznetsov_geometric_integral(3, 1.0)
    assert abs(v.value - 0.152916622861j) < 1e-10


def test_kuznetsov_contract():
    with pytest.raises(ContractViolation):
        kuznetsov_geometric_integral(0, 1.0)
    with pytest.raises(ContractViolation):
        kuznetsov_geometric_integral(11, 1.0)
    with pytest.raises(ContractViolation):
        kuznetsov_geometric_integral(2, -1.0)
