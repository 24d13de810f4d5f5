"""Independent reference values from mpmath, used only by the tests."""

from fractions import Fraction

import mpmath
import pytest


def _mpf(x):
    """Exact conversion of int, float, Fraction or gmpy2 values (at the current precision)."""
    if isinstance(x, mpmath.mpf):
        return x
    if hasattr(x, "as_integer_ratio") and not isinstance(x, (int, float, Fraction)):
        n, d = x.as_integer_ratio()
        q = Fraction(int(n), int(d))
    else:
        q = Fraction(x)
    return mpmath.mpf(q.numerator) / q.denominator


def mp_ai(x, bits):
    with mpmath.workprec(bits + 64):
        return +mpmath.airyai(_mpf(x))


def mp_F(x, bits):
    """F(x) = Ai(jx) Ai(x/j) = |Ai(jx)|^2 for real x."""
    with mpmath.workprec(bits + 64):
        j = mpmath.expjpi(mpmath.mpf(2) / 3)
        return abs(mpmath.airyai(j * _mpf(x))) ** 2


def mp_G(x, bits):
    with mpmath.workprec(bits + 64):
        return mp_F(x, bits) * mpmath.airyai(_mpf(x))


def rel_err(value, reference, bits):
    """|value - reference| / |reference| as an mpmath number."""
    with mpmath.workprec(bits + 64):
        return abs(_mpf(value) - reference) / abs(reference)


@pytest.fixture
def oracle():
    class Oracle:
        mpf = staticmethod(_mpf)
        ai = staticmethod(mp_ai)
        F = staticmethod(mp_F)
        G = staticmethod(mp_G)
        rel = staticmethod(rel_err)

    return Oracle


def exact_exp2(q: Fraction) -> int:
    """E with 2^(E-1) <= q < 2^E for a positive rational, by integer comparison."""
    q = Fraction(q)
    e = q.numerator.bit_length() - q.denominator.bit_length()
    while Fraction(2) ** e <= q:
        e += 1
    while Fraction(2) ** (e - 1) > q:
        e -= 1
    return e


def as_fraction(v) -> Fraction:
    n, d = v.as_integer_ratio()
    return Fraction(int(n), int(d))


def gparams_violations(params, limb=None) -> list[str]:
    """Names of the parameter invariants that ``params`` breaks (empty when sound)."""
    bad = []
    x = Fraction(params.x)
    p, N0, N, R, t = params.p, params.N0, params.N, params.R, params.t
    alpha, beta, gamma, delta = (as_fraction(v) for v in (params.alpha, params.beta, params.gamma, params.delta))
    with mpmath.workprec(512):
        xm = _mpf(x)
        x32 = xm * mpmath.sqrt(xm)
        log2e = 1 / mpmath.log(2)
        if not _mpf(alpha) <= 3 / mpmath.e / x32:
            bad.append("alpha")
        if not _mpf(beta) <= mpmath.mpf(2) / 3 * log2e * x32:
            bad.append("beta")
        if not _mpf(gamma) >= 1 / mpmath.log(mpmath.mpf(20) / 3, 2):
            bad.append("gamma")
        if not _mpf(delta) >= mpmath.mpf(2) / 3 * log2e * (mpmath.sqrt(mpmath.mpf(20) / 3) - 1) * x32:
            bad.append("delta")
        if N0 != max(1, int(mpmath.ceil(mpmath.sqrt(mpmath.mpf(3) / 10) * x32 - 1))):
            bad.append("N0")
    if N < N0 or exact_exp2((alpha * N) ** (2 * N)) < p + 9 + Fraction(3, 4) * exact_exp2(x) - (beta.numerator // beta.denominator):
        bad.append("N")
    if R < N or R < (p + 2 + delta) * gamma:
        bad.append("R")
    if 128 * (N + 3) * Fraction(1, 2**t) > Fraction(1, 2**p) or (R + 2) * Fraction(1, 2**t) > Fraction(1, 2**9):
        bad.append("t")
    if limb is not None and t % limb:
        bad.append("limb")
    return bad
