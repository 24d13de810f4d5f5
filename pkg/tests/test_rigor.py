from fractions import Fraction

import mpmath
import pytest

from conftest import mp_G

from airygmr.mp import MPInterval
from airygmr.rigor import (
    CheckReport,
    UndecidableError,
    c_enclosures,
    check_c_ratio,
    check_dn_bounds,
    check_g_sandwich,
    check_gn_estimate,
    d_enclosures,
    eta,
    g_coefficient_enclosures,
    g_enclosure,
    initial_g_enclosures,
    minimal_precision,
    with_escalation,
)


def mp_coefficients(count):
    """G_n from the Taylor expansion of Ai(x) Ai(jx) Ai(x/j) in mpmath."""
    j = mpmath.expjpi(mpmath.mpf(2) / 3)
    series = mpmath.taylor(lambda z: mpmath.airyai(z) * mpmath.airyai(j * z) * mpmath.airyai(z / j), 0, 3 * count)
    return [mpmath.re(series[3 * n]) for n in range(count)]


def test_constants():
    assert eta(1) == Fraction(1, 3) and eta(10) == Fraction(1, 300)
    assert minimal_precision(5000) == 16106


def test_coefficient_enclosures_contain_mpmath_values():
    with mpmath.workprec(300):
        ref = mp_coefficients(8)
        encl = g_coefficient_enclosures(7, 400)
        for g, r in zip(encl, ref):
            assert mpmath.mpf(g.lo) <= r * (1 + mpmath.mpf(2) ** -250)
            assert r * (1 - mpmath.mpf(2) ** -250) <= mpmath.mpf(g.hi)
    assert abs(float(encl[2].mid()) - 1.40533e-4) < 1e-9
    g0, g1 = initial_g_enclosures(64)
    assert abs(float(g1.mid()) - 0.0050371) < 1e-7


def test_c_enclosures_are_narrow_at_the_default_schedule():
    cs = c_enclosures(300)
    assert all(c.lo > 0 for c in cs)
    assert cs[-1].width() / cs[-1].mid() < Fraction(1, 2**100)


def test_d_sequence_start():
    d = d_enclosures(3)
    assert d[0] == d[1] == MPInterval.point(1, 256)
    assert Fraction(9, 10) in d[2]
    assert Fraction(6, 7) in d[3]


def test_check_c_ratio():
    report = check_c_ratio(600)
    assert report.passed and report.margin.lo > 0
    assert report.line().startswith("CHECK cratio RANGE 0..599 MARGIN ")
    assert report.line().split()[-3] == "PASS"
    with pytest.raises(ValueError):
        check_c_ratio(1)


def test_c_ratio_undecidable_at_too_low_precision():
    with pytest.raises(UndecidableError):
        check_c_ratio(600, 200)


def test_escalation_recovers():
    report = with_escalation("cratio", 300)
    assert report.passed


def test_check_gn():
    report = check_gn_estimate(200)
    assert report.passed
    # at n = 100 the bound is 2.2 / 100^(1/4)
    assert abs(2.2 / 100**0.25 - 0.6957) < 1e-4
    with pytest.raises(ValueError):
        check_gn_estimate(0)


def test_gn_first_deviation():
    with mpmath.workprec(200):
        g1 = mp_coefficients(2)[1]
        gamma1 = 1 / (4 * mpmath.sqrt(3) * mpmath.pi * 9)
        assert abs(gamma1 - mpmath.mpf("5.105e-3")) < 1e-6
        assert abs(abs(g1 / gamma1 - 1) - mpmath.mpf("0.0134")) < 1e-3


def test_check_dn():
    report = check_dn_bounds(1000)
    assert report.passed
    assert report.line().startswith("CHECK dn RANGE 0..1000")


def test_check_g_sandwich_and_enclosure():
    xs = [Fraction(1, 2), 1, Fraction(7, 2), 12, 30]
    assert check_g_sandwich(xs).passed
    coeffs = g_coefficient_enclosures(120, 600)
    with mpmath.workprec(300):
        for x in [Fraction(1, 2), 3, 9]:
            enc = g_enclosure(x, coeffs, 600)
            ref = mp_G(x, 200)
            assert mpmath.mpf(enc.lo) <= ref <= mpmath.mpf(enc.hi)
    with pytest.raises(ValueError):
        check_g_sandwich([Fraction(1, 4)])
    with pytest.raises(UndecidableError):
        g_enclosure(40, coeffs[:5], 600)


def test_report_line_format():
    r = CheckReport("gn", 1, 2000, MPInterval.hull(Fraction(1, 3), Fraction(1, 2), 53), False, 1.23456)
    assert r.line() == "CHECK gn RANGE 1..2000 MARGIN 3.33333e-1 FAIL TIME 1.235"


def test_failures_are_reported_not_raised():
    # a check whose bound is violated outright comes back as FAIL
    import airygmr.rigor as rigor

    saved = rigor.DN_LOWER
    try:
        rigor.DN_LOWER = Fraction(95, 100)
        assert not rigor.check_dn_bounds(100).passed
    finally:
        rigor.DN_LOWER = saved
