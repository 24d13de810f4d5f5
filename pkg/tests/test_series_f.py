import math
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import mp_F

from airygmr.mp import exp2_index, to_fraction
from airygmr.series_f import (
    estimate_K_and_t,
    f_initial_values,
    f_step_ratio,
    f_sum,
    f_sum_state,
    precision_for_steps,
)

WORK = 400


def true_initial_values():
    with mpmath.workprec(WORK):
        g23, g13 = mpmath.gamma(mpmath.mpf(2) / 3), mpmath.gamma(mpmath.mpf(1) / 3)
        return (
            1 / (mpmath.cbrt(81) * g23**2),
            1 / (2 * mpmath.sqrt(3) * mpmath.pi),
            1 / (mpmath.cbrt(9) * g13**2),
        )


def coefficient_products(count):
    """F_n / F_{n mod 3} as exact rationals, from the recurrence."""
    out = [Fraction(1)] * 3
    for n in range(count - 3):
        out.append(out[n] * f_step_ratio(n))
    return out


def terms_exact(x, count):
    """F_n x^n for n < count, with exact rational structure and 400-bit constants."""
    init = true_initial_values()
    x = Fraction(x)
    with mpmath.workprec(WORK):
        return [init[n % 3] * mpmath.mpf((c * x**n).numerator) / (c * x**n).denominator
                for n, c in enumerate(coefficient_products(count))]


def test_initial_values():
    f0, f1, f2 = f_initial_values(53)
    assert abs(float(f0) - 0.126045) < 1e-6
    assert abs(float(f1) - 0.0918881) < 1e-7
    assert abs(float(f2) - 0.0669875) < 1e-7
    with mpmath.workprec(WORK):
        for got, ref in zip(f_initial_values(200), true_initial_values()):
            assert abs(mpmath.mpf(got) / ref - 1) <= mpmath.mpf(2) ** -200


def test_step_ratio():
    assert f_step_ratio(0) == Fraction(1, 3)
    assert f_step_ratio(1) == Fraction(1, 4)
    assert f_step_ratio(2) == Fraction(1, 6)
    assert all(f_step_ratio(n + 1) < f_step_ratio(n) for n in range(1, 500))
    with pytest.raises(ValueError):
        f_step_ratio(-1)
    # F_3 = F_0 / 3
    f0 = f_initial_values(53)[0]
    assert abs(float(f0) / 3 - 0.042015) < 1e-6


def test_coefficients_match_mpmath_taylor():
    with mpmath.workprec(200):
        j = mpmath.expjpi(mpmath.mpf(2) / 3)
        series = mpmath.taylor(lambda z: mpmath.airyai(j * z) * mpmath.airyai(z / j), 0, 9)
        init = true_initial_values()
        for n, c in enumerate(coefficient_products(10)):
            ref = init[n % 3] * mpmath.mpf(c.numerator) / c.denominator
            assert abs(mpmath.re(series[n]) / ref - 1) < mpmath.mpf(2) ** -150


@given(st.fractions(min_value=Fraction(1, 2), max_value=20, max_denominator=64),
       st.integers(min_value=0, max_value=200))
def test_ratio_condition_persists(x, k):
    if f_step_ratio(3 * k) * x**3 < Fraction(1, 2):
        assert all(f_step_ratio(3 * (k + j)) * x**3 < Fraction(1, 2) for j in range(40))


def test_estimate_structure():
    k, t = estimate_K_and_t(1, 53)
    assert t == max(64, 53 + 3 + math.ceil(math.log2(20 * k)))
    assert 20 * k * Fraction(1, 2**t) <= Fraction(1, 2 ** (3 + 53))
    assert 20 * k * Fraction(1, 2 ** (t - 1)) > Fraction(1, 2 ** (3 + 53)) or t == 64
    assert estimate_K_and_t(20, 53)[0] >= estimate_K_and_t(10, 53)[0]
    assert precision_for_steps(1, 1) == 64
    with pytest.raises(ValueError):
        estimate_K_and_t(Fraction(1, 4), 53)


def test_estimate_covers_the_true_truncation_point(oracle):
    x, p = 10, 53
    k_est, _ = estimate_K_and_t(x, p)
    terms = terms_exact(x, 3 * k_est + 60)
    with mpmath.workprec(WORK):
        target = oracle.F(x, 100) * mpmath.mpf(2) ** (-p - 4)
        first = next(k for k in range(len(terms) // 3) if terms[3 * k] < target)
    assert k_est >= first


@pytest.mark.parametrize("p", [64])
def test_half_against_rational_partial_sums(p):
    x = Fraction(1, 2)
    with mpmath.workprec(WORK):
        ref = mpmath.fsum(terms_exact(x, 200))
        s = f_sum(x, p)
        assert abs(mpmath.mpf(s) - ref) <= mpmath.mpf(2) ** -p * mpmath.mpf(s)


@pytest.mark.parametrize("x", [Fraction(1, 2), 1, Fraction(7, 3), 10, 33, 100])
@pytest.mark.parametrize("p", [1, 24, 113, 500])
def test_f_sum_against_mpmath(x, p, oracle):
    s = f_sum(x, p)
    with mpmath.workprec(p + 64):
        assert abs(mpmath.mpf(s) - oracle.F(x, p)) <= mpmath.mpf(2) ** -p * mpmath.mpf(s)


@settings(max_examples=30, deadline=None)
@given(st.fractions(min_value=Fraction(1, 2), max_value=40, max_denominator=1024),
       st.integers(min_value=1, max_value=300))
def test_f_sum_property(x, p):
    s = f_sum(x, p)
    with mpmath.workprec(p + 64):
        assert abs(mpmath.mpf(s) - mp_F(x, p)) <= mpmath.mpf(2) ** -p * mpmath.mpf(s)


def test_terms_stay_positive_and_track_exact_values():
    x, p = Fraction(13, 4), 80
    state = f_sum_state(x, p, record=True)
    assert state.restarts == 0
    exact = terms_exact(x, len(state.trace) + 3)
    with mpmath.workprec(WORK):
        for n, a in state.trace:
            assert a > 0
            i = n // 3
            bound = 2 * (10 * i + 3) * mpmath.mpf(2) ** -state.t
            assert abs(mpmath.mpf(a) / exact[n] - 1) <= bound


@pytest.mark.parametrize("x", [Fraction(1, 2), 1, 2, 5])
def test_tail_bound(x):
    p = 60
    state = f_sum_state(x, p)
    K = state.i
    exact = terms_exact(x, 3 * K + 400)
    with mpmath.workprec(WORK):
        tail = mpmath.fsum(exact[3 * K:])
        last = mpmath.mpf(state.a0) + mpmath.mpf(state.a1) + mpmath.mpf(state.a2)
        assert tail <= 4 * last
        assert 4 * last <= mpmath.mpf(12) / 16 * mpmath.mpf(2) ** (exp2_index(state.s) - p)


def test_restart_when_step_estimate_too_small(oracle):
    x, p = 12, 100
    state = f_sum_state(x, p, k_hint=1)
    assert state.restarts >= 1
    assert state.i <= state.K_est
    assert state.t == precision_for_steps(state.K_est, p)
    with mpmath.workprec(p + 64):
        assert abs(mpmath.mpf(state.s) - oracle.F(x, p)) <= mpmath.mpf(2) ** -p * mpmath.mpf(state.s)
    assert to_fraction(state.s) == to_fraction(f_sum_state(x, p, k_hint=state.K_est).s)
