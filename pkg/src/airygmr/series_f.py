"""Auxiliary series F(x) = Ai(jx) Ai(x/j) = sum F_n x^n, j = exp(2 pi i / 3).

The coefficients satisfy the two-term recurrence
(n+1)(n+2)(n+3) F_{n+3} = 2(2n+1) F_n, so three interleaved chains of
positive terms F_{3i+k} x^{3i+k} are run forward and summed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .mp import (
    GUARD_BITS,
    MPValue,
    check_precision,
    exp2_index,
    gamma_one_third,
    gamma_two_thirds,
    make_context,
    round_to,
    to_fraction,
)

F_MIN_PRECISION = 64
ROUNDINGS_PER_STEP = 10


def f_initial_values(t: int) -> tuple[MPValue, MPValue, MPValue]:
    """F0 = 3^(-4/3) Gamma(2/3)^-2, F1 = 1/(2 sqrt(3) pi), F2 = 3^(-2/3) Gamma(1/3)^-2."""
    check_precision(t)
    w = t + GUARD_BITS
    ctx = make_context(w)
    g23, g13 = gamma_two_thirds(w), gamma_one_third(w)
    f0 = ctx.div(1, ctx.mul(ctx.cbrt(81), ctx.square(g23)))
    f1 = ctx.div(1, ctx.mul(ctx.mul(2, ctx.sqrt(3)), ctx.const_pi()))
    f2 = ctx.div(1, ctx.mul(ctx.cbrt(9), ctx.square(g13)))
    return round_to(f0, t), round_to(f1, t), round_to(f2, t)


def f_step_ratio(n: int) -> Fraction:
    """q(n) = F_{n+3} / F_n = 2(2n+1) / ((n+1)(n+2)(n+3))."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    return Fraction(2 * (2 * n + 1), (n + 1) * (n + 2) * (n + 3))


def _log2_term_estimate(n: int, log2x: float) -> float:
    # F_n x^n ~ (4 e^2 / n^2)^(n/3) x^n, an overestimate of the true term
    if n == 0:
        return 0.0
    return (n / 3.0) * (2 + 2 * math.log2(math.e) - 2 * math.log2(n)) + n * log2x


def _log2_f_estimate(x: float) -> float:
    # F(x) ~ (1/32) x^(-1/2) exp((4/3) x^(3/2)), an underestimate for x > 1/2
    return -5.0 - 0.5 * math.log2(x) + (4.0 / 3.0) * x**1.5 * math.log2(math.e)


def precision_for_steps(k: int, p: int) -> int:
    """Smallest t >= 64 with 20 k 2^-t <= 2^-(3+p)."""
    return max(F_MIN_PRECISION, p + 3 + (20 * k - 1).bit_length())


def estimate_K_and_t(x, p: int) -> tuple[int, int]:
    """Rough overestimate of the number of steps, and the matching working precision.

    The step count is the first K past the point where q(3K) x^3 < 1/2 at
    which the estimated terms F_{3K+k} x^{3K+k} drop below 2^(-p-4) times the
    estimate of F(x); found by doubling, then bisection.
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    xq = to_fraction(x)
    if xq < Fraction(1, 2):
        raise ValueError("f_sum requires x >= 1/2")
    x3 = xq**3

    def ratio_ok(k: int) -> bool:
        return f_step_ratio(3 * k) * x3 < Fraction(1, 2)

    kq = _first_true(ratio_ok, 1)
    xf = float(xq)
    log2x = math.log2(xf)
    target = _log2_f_estimate(xf) - p - 4

    def small_terms(k: int) -> bool:
        return all(_log2_term_estimate(3 * k + j, log2x) < target for j in range(3))

    k_est = _first_true(small_terms, kq)
    return k_est, precision_for_steps(k_est, p)


def _first_true(pred, start: int) -> int:
    """Least k >= start with pred(k), for pred monotone from false to true."""
    if pred(start):
        return start
    lo, hi = start, max(start * 2, start + 1)
    while not pred(hi):
        lo, hi = hi, hi * 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if pred(mid):
            hi = mid
        else:
            lo = mid
    return hi


@dataclass
class FState:
    """State of the three-chain summation when it stopped."""

    a0: MPValue
    a1: MPValue
    a2: MPValue
    s: MPValue
    i: int
    t: int
    K_est: int
    restarts: int = 0
    # (n, computed F_n x^n) for every term added to s, when recording
    trace: list = field(default_factory=list, repr=False)


def _run(x, p: int, t: int, k_est: int, record: bool) -> FState:
    ctx = make_context(t)
    f0, f1, f2 = f_initial_values(t)
    xr = round_to(x, t)
    x3 = ctx.mul(ctx.mul(xr, xr), xr)
    x3_exact = to_fraction(x) ** 3
    a = [f0, ctx.mul(f1, xr), ctx.mul(f2, ctx.mul(xr, xr))]
    s = None
    trace = []
    i = 0
    while True:
        for k in range(3):
            if not a[k] > 0:
                raise ArithmeticError(f"nonpositive term F_{3 * i + k} x^n")
            s = a[k] if s is None else ctx.add(s, a[k])
            if record:
                trace.append((3 * i + k, a[k]))
        i += 1
        for k in range(3):
            n = 3 * (i - 1) + k
            v = ctx.mul(a[k], 2 * (2 * n + 1))
            v = ctx.div(ctx.div(ctx.div(v, n + 1), n + 2), n + 3)
            a[k] = ctx.mul(v, x3)
        bound_exp = exp2_index(s) - p - 4
        if f_step_ratio(3 * i) * x3_exact < Fraction(1, 2) and all(
            exp2_index(v) <= bound_exp for v in a
        ):
            return FState(a[0], a[1], a[2], s, i, t, k_est, trace=trace)


def f_sum_state(x, p: int, k_hint: int | None = None, record: bool = False) -> FState:
    """Run the summation; rerun at higher precision if it needed more steps than planned.

    ``k_hint`` replaces the a-priori step estimate (the restart path is taken
    whenever the hint turns out too small).
    """
    k_est, t = estimate_K_and_t(x, p)
    if k_hint is not None:
        k_est, t = k_hint, precision_for_steps(k_hint, p)
    restarts = 0
    while True:
        state = _run(x, p, t, k_est, record)
        if state.i <= k_est:
            state.restarts = restarts
            return state
        k_est = state.i
        t = precision_for_steps(k_est, p)
        restarts += 1


def f_sum(x, p: int) -> MPValue:
    """s with |F(x) - s| <= 2^-p s, for x >= 1/2."""
    return f_sum_state(x, p).s
