import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shiftconv.arith import sieve_divisor_count
from shiftconv.errors import ContractViolation, PoleError, RegionError
from shiftconv.series import (
    MainTermInputs,
    SpectralPoint,
    d0_closed_form,
    d0_truncated,
    dh_tail_bound,
    dh_truncated,
    divisor_bound_constant,
    double_pole_principal_part,
    main_term,
    main_term_components,
    residue_formulas,
)

SQRT_4PI = math.sqrt(4 * math.pi)


def sigma(n, nu):
    return sum(d**nu for d in range(1, n + 1) if n % d == 0)


def lattice_dh(s, w, h, N):
    """Direct loop over (a, b) with a^2 + b^2 <= N."""
    s, w = complex(s), complex(w)
    total = 0j
    r = math.isqrt(N)
    cache = {}
    for a in range(-r, r + 1):
        for b in range(-r, r + 1):
            n = a * a + b * b
            if n <= N:
                m = n + h
                if m not in cache:
                    cache[m] = sigma(m, 1 - 2 * w) * m ** (-(s + 0.5 - w))
                total += cache[m]
    return total


def mp_d0(s, w):
    with mp.workdps(30):
        s, w = mp.mpc(s), mp.mpc(w)
        L = lambda t: mp.power(4, -t) * (mp.zeta(t, 0.25) - mp.zeta(t, 0.75))
        a, b = s + 0.5 - w, s - 0.5 + w
        return complex(4 * mp.zeta(a) * mp.zeta(b) * L(a) * L(b) / L(2 * s))


def test_spectral_point_flags():
    p = SpectralPoint(2, 0.5)
    assert p.converges_Dh and p.w_in_strip and p.w_is_half
    q = SpectralPoint(1.2, 0.1)
    assert not q.converges_Dh and q.w_in_strip and not q.w_is_half


@pytest.mark.parametrize("s,w,h", [(4, 0.7, 1), (2.5 + 1j, 0.3, 3), (3, 0.5, 2)])
def test_dh_only_zeroth_term(s, w, h):
    val, _ = dh_truncated(SpectralPoint(s, w), h, 0)
    expected = sigma(h, 1 - 2 * complex(w)) * h ** (-(complex(s) + 0.5 - w))
    assert abs(val - expected) <= 1e-15 * abs(expected)


def test_dh_truncation_self_consistency():
    p = SpectralPoint(4, 0.7)
    a, ta = dh_truncated(p, 1, 10**5)
    b, _ = dh_truncated(p, 1, 10**6)
    assert abs(a - b) <= ta


def test_dh_matches_lattice_loop():
    for s, w, h in [(4, 0.7, 1), (3 + 1j, 0.4 + 0.2j, 2)]:
        N = 3000
        val, _ = dh_truncated(SpectralPoint(s, w), h, N)
        ref = lattice_dh(s, w, h, N)
        assert abs(val - ref) <= 1e-13 * abs(ref)


def test_dh_region_error():
    with pytest.raises(RegionError):
        dh_truncated(SpectralPoint(1.3, 0.9), 1, 100)
    with pytest.raises(ContractViolation):
        dh_truncated(SpectralPoint(3, 0.5), 0, 100)


def test_divisor_bound_constant_dominates():
    d = sieve_divisor_count(10**5).values
    n = np.arange(1, 10**5 + 1)
    for eps in (0.25, 0.5):
        assert np.all(d[1:] <= divisor_bound_constant(eps) * n**eps * (1 + 1e-12))


@given(st.floats(2.0, 5.0), st.floats(0.1, 0.9), st.integers(1, 6), st.integers(10, 2000))
@settings(max_examples=40, deadline=None)
def test_tail_bound_decreases_with_N(s, w, h, N):
    assert dh_tail_bound(s, w, h, 2 * N) <= dh_tail_bound(s, w, h, N)


@pytest.mark.parametrize("s,w", [(2.5, 0.3), (3, 0.7), (3.5 + 2j, 0.5), (4 - 1j, 0.4 + 0.3j)])
def test_d0_closed_form_against_mpmath(s, w):
    ref = mp_d0(s, w)
    assert abs(d0_closed_form(s, w) - ref) <= 1e-12 * abs(ref)


def test_d0_closed_form_vs_truncated_series():
    s, w = 3, 0.7
    trunc, tail = d0_truncated(s, w, 10**6)
    closed, err = d0_closed_form(s, w, with_error=True)
    assert abs(trunc - closed) <= tail + err


def test_d0_symmetry_example():
    assert abs(d0_closed_form(3, 0.7) - d0_closed_form(3, 0.3)) < 1e-10


@given(st.floats(2, 4), st.floats(-3, 3), st.floats(0.05, 0.95), st.floats(-1, 1))
@settings(max_examples=40, deadline=None)
def test_d0_symmetry_property(a, b, c, d):
    s, w = complex(a, b), complex(c, d)
    x, y = d0_closed_form(s, w), d0_closed_form(s, 1 - w)
    assert abs(x - y) <= 1e-12 * max(1, abs(x))


def test_d0_pole_blow_up():
    assert abs(d0_closed_form(1.2 + 1e-4, 0.7)) > 1e3
    for w in (0.7, 0.3 + 0.5j):
        for pole in (0.5 + w, 1.5 - w):
            assert abs(d0_closed_form(pole + 1e-4j, w)) > 1e3
            for dist in (0.1, 0.5, 2.0):
                assert abs(d0_closed_form(pole + 1j * dist, w)) < 1e2


def test_d0_pole_error():
    with pytest.raises(PoleError):
        d0_closed_form(1.2, 0.7)
    with pytest.raises(PoleError):
        d0_closed_form(0.8 + 1e-8, 0.7)


# ---------------------------------------------------------------- main terms


def test_main_term_half_example():
    inputs = MainTermInputs(1, 0.5, 1.0, phi_prime=0.0)
    gamma = 0.5772156649015329
    expected = SQRT_4PI * (10 * math.log(10) + (gamma - math.log(4 * math.pi) - 1) * 10)
    assert main_term(10, inputs) == pytest.approx(expected, rel=1e-15)


def test_main_term_linear_in_phi():
    for w, pa, pr in [(0.7, 1.3, -0.4 + 2j), (0.3 + 0.2j, 1j, 2.0)]:
        one = main_term(123.0, MainTermInputs(2, w, pa, pr))
        two = main_term(123.0, MainTermInputs(2, w, 2 * pa, 2 * pr))
        assert abs(two - 2 * one) <= 1e-14 * abs(two)
    one = main_term(50.0, MainTermInputs(3, 0.5, 0.7, phi_prime=1.1))
    two = main_term(50.0, MainTermInputs(3, 0.5, 1.4, phi_prime=2.2))
    assert abs(two - 2 * one) <= 1e-14 * abs(two)


def test_main_term_second_component_scaling():
    inputs = MainTermInputs(1, 0.7, 1.0, 1.0)
    _, a = main_term_components(1000.0, inputs)
    _, b = main_term_components(2000.0, inputs)
    assert b / a == pytest.approx(2**0.6, rel=1e-14)


def test_main_term_contracts():
    with pytest.raises(ContractViolation):
        MainTermInputs(1, 0.5, 1.0)
    with pytest.raises(ContractViolation):
        MainTermInputs(1, 0.7, 1.0)
    with pytest.raises(ContractViolation):
        MainTermInputs(0, 0.7, 1.0, 1.0)
    with pytest.raises(ContractViolation):
        MainTermInputs(1, 1.2, 1.0, 1.0)
    with pytest.raises(ContractViolation):
        main_term(0.5, MainTermInputs(1, 0.7, 1.0, 1.0))


def test_residue_equals_x_coefficient():
    inputs = MainTermInputs(1, 0.7, 1.0, 1.0)
    r1, r2 = residue_formulas(0.7, 1, 1.0, 1.0)
    X = 1e4
    c1, c2 = main_term_components(X, inputs)
    assert c1 / X == pytest.approx(r1, rel=1e-15)
    assert c2 * 0.6 / X**0.6 == pytest.approx(r2, rel=1e-13)


def test_residues_swap_under_reflection():
    w, h, pa, pr = 0.3 + 0.2j, 3, 0.5 - 1j, 2.0
    r1, r2 = residue_formulas(w, h, pa, pr)
    s1, s2 = residue_formulas(1 - w, h, pr, pa)
    assert abs(r1 - s2) <= 1e-14 * abs(r1)
    assert abs(r2 - s1) <= 1e-14 * abs(r2)


def test_residue_h_scaling():
    w = 0.7
    a, _ = residue_formulas(w, 4, 1.0, 1.0)
    b, _ = residue_formulas(w, 1, 1.0, 1.0)
    assert a / b == pytest.approx(4 ** (0.5 - w), rel=1e-14)


def test_residue_at_half_redirects():
    with pytest.raises(PoleError):
        residue_formulas(0.5, 1, 1.0, 1.0)


def test_double_pole_matches_log_linear_main_term():
    h, phi, dphi = 2, 1.5, -0.25
    a, b = double_pole_principal_part(h, phi, dphi)
    inputs = MainTermInputs(h, 0.5, phi, phi_prime=dphi)
    X = 1e5
    first, second = main_term_components(X, inputs)
    assert first / (X * math.log(X)) == pytest.approx(a, rel=1e-15)
    # the X coefficient carries an extra -phi relative to the principal part
    assert second / X == pytest.approx(b - SQRT_4PI * phi, rel=1e-14)
