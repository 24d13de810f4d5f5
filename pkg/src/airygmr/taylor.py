"""Direct Maclaurin evaluation Ai(x) = A f(x^3) - B x g(x^3), with a cancellation meter.

The two series have positive terms, but their difference loses roughly
(4/3) x^(3/2) log2(e) bits for x > 0. With enough guard bits this path is
also the reference oracle for everything else in the package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import gmpy2
from gmpy2 import mpfr

from .mp import (
    GUARD_BITS,
    MPValue,
    exp2_index,
    gamma_one_third,
    gamma_two_thirds,
    make_context,
    round_to,
    to_fraction,
)

LOG2_E = 1 / math.log(2)
ORACLE_GUARD_BITS = 64


@dataclass(frozen=True)
class AiryConstants:
    """A = Ai(0) = 3^(-2/3)/Gamma(2/3) and B = -Ai'(0) = 3^(-1/3)/Gamma(1/3)."""

    A: MPValue
    B: MPValue
    t: int


def airy_constants(t: int) -> AiryConstants:
    w = t + GUARD_BITS
    ctx = make_context(w)
    a = ctx.div(1, ctx.mul(ctx.cbrt(9), gamma_two_thirds(w)))
    b = ctx.div(1, ctx.mul(ctx.cbrt(3), gamma_one_third(w)))
    return AiryConstants(round_to(a, t), round_to(b, t), t)


@dataclass(frozen=True)
class CancellationReport:
    max_term_exp: int
    result_exp: int
    measured_bits_lost: int
    predicted_bits_lost: float


@dataclass(frozen=True)
class SeriesSum:
    value: MPValue
    terms: int
    max_term: MPValue
    # bound on the omitted (exact) tail
    tail_bound: MPValue


def predict_cancellation_bits(x) -> float:
    """Bits lost summing the Maclaurin series of Ai at x >= 0: (4/3) x^(3/2) log2(e).

    The indicator of Ai is h(theta) = -(2/3) cos(3 theta / 2) with order 3/2;
    the loss is (max h - h(0)) x^(3/2) in nats.
    """
    xf = float(x)
    if xf < 0:
        raise ValueError("x must be nonnegative")
    return (4.0 / 3.0) * xf**1.5 * LOG2_E


def _sum_positive(u: MPValue, t: int, den) -> SeriesSum:
    """Sum 1 + sum_n prod_k u/den(k): term_{n+1} = term_n * u / den(n) (den(n) is a pair)."""
    ctx = make_context(t)
    one = mpfr(1, t, context=ctx)
    if gmpy2.is_zero(u):
        return SeriesSum(one, 1, one, mpfr(0))
    s = one
    term = one
    biggest = one
    n = 0
    while True:
        d1, d2 = den(n)
        small_ratio = 2 * u < d1 * d2
        if small_ratio and exp2_index(term) < exp2_index(s) - t - 8:
            # ratios decrease from here on, so the tail is below term * r/(1-r) < term
            return SeriesSum(s, n + 1, biggest, ctx.mul(term, 2))
        term = ctx.div(ctx.div(ctx.mul(term, u), d1), d2)
        s = ctx.add(s, term)
        if term > biggest:
            biggest = term
        n += 1


def _cube(x: MPValue, t: int) -> MPValue:
    ctx = make_context(t)
    xr = round_to(x, t)
    return ctx.mul(ctx.mul(xr, xr), xr)


def f_series(u, t: int, terms: int | None = None) -> MPValue:
    """f(u) = sum_n 1*4*...*(3n-2)/(3n)! u^n at precision t.

    Truncated adaptively unless ``terms`` fixes the number of summed terms.
    """
    if terms is not None:
        return _partial_sum(u, terms, t, _f_den)
    return _sum_positive(round_to(u, t), t, _f_den).value


def g_series(u, t: int, terms: int | None = None) -> MPValue:
    """g(u) = sum_n 2*5*...*(3n-1)/(3n+1)! u^n at precision t."""
    if terms is not None:
        return _partial_sum(u, terms, t, _g_den)
    return _sum_positive(round_to(u, t), t, _g_den).value


def _f_den(n: int) -> tuple[int, int]:
    return 3 * n + 2, 3 * n + 3


def _g_den(n: int) -> tuple[int, int]:
    return 3 * n + 3, 3 * n + 4


def _partial_sum(u, terms: int, t: int, den) -> MPValue:
    ctx = make_context(t)
    u = round_to(u, t)
    s = term = mpfr(1, t, context=ctx)
    for n in range(terms - 1):
        d1, d2 = den(n)
        term = ctx.div(ctx.div(ctx.mul(term, u), d1), d2)
        s = ctx.add(s, term)
    return s


@dataclass(frozen=True)
class TaylorResult:
    value: MPValue
    report: CancellationReport
    # a-posteriori relative error bound, as an exact rational (None if not certifiable)
    rel_error: Fraction | None
    t: int


def taylor_evaluate(x, t: int) -> TaylorResult:
    """Evaluate Ai(x), x >= 0, by the Maclaurin split at working precision ``t``.

    Also returns a rigorous relative error bound from the rounding-counter
    argument: every summed term carries at most 9*n_terms + 8 roundings, so the
    absolute error is bounded by 2K 2^-t (A f + B x g) plus the two tails.
    """
    if x < 0:
        raise ValueError("ai_taylor is restricted to x >= 0")
    consts = airy_constants(t)
    ctx = make_context(t)
    xr = round_to(x, t)
    u = _cube(x, t)
    fs = _sum_positive(u, t, _f_den)
    gs = _sum_positive(u, t, _g_den)
    first = ctx.mul(consts.A, fs.value)
    bx = ctx.mul(consts.B, xr)
    second = ctx.mul(bx, gs.value)
    value = ctx.sub(first, second)

    max_terms = [ctx.mul(consts.A, fs.max_term)]
    if not gmpy2.is_zero(xr):
        max_terms.append(ctx.mul(bx, gs.max_term))
    max_term_exp = max(exp2_index(m) for m in max_terms)
    predicted = predict_cancellation_bits(x)
    if gmpy2.is_zero(value):
        report = CancellationReport(max_term_exp, max_term_exp - t, t, predicted)
        return TaylorResult(value, report, None, t)
    result_exp = exp2_index(value)
    report = CancellationReport(
        max_term_exp, result_exp, max_term_exp - result_exp, predicted
    )
    return TaylorResult(value, report, _taylor_error_bound(value, first, second, fs, gs, consts, xr, t), t)


def _taylor_error_bound(value, first, second, fs, gs, consts, xr, t) -> Fraction | None:
    k = 9 * max(fs.terms, gs.terms) + 8
    if Fraction(k, 2**t) > Fraction(1, 8):
        return None
    theta = Fraction(2 * k, 2**t)
    # computed magnitudes bound the exact ones up to a factor 1/(1-theta)
    magnitude = (to_fraction(first) + to_fraction(second)) / (1 - theta)
    tails = to_fraction(consts.A) * to_fraction(fs.tail_bound) + to_fraction(
        consts.B
    ) * to_fraction(xr) * to_fraction(gs.tail_bound)
    err = theta * magnitude + 2 * tails
    v = abs(to_fraction(value))
    if err >= v:
        return None
    return err / (v - err)


def ai_taylor(x, t: int) -> tuple[MPValue, CancellationReport]:
    """A f(x^3) - B x g(x^3) summed at precision ``t``, plus the cancellation report."""
    r = taylor_evaluate(x, t)
    return r.value, r.report


def oracle_precision(x, t: int) -> int:
    return t + math.ceil(predict_cancellation_bits(x)) + ORACLE_GUARD_BITS


def ai_oracle(x, t: int) -> MPValue:
    """Reference Ai(x) good to about 2^-(t+32): direct summation with cancellation guard bits."""
    return ai_taylor(x, oracle_precision(x, t))[0]
