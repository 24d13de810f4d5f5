"""Modified series G(x) = Ai(x) Ai(jx) Ai(x/j) = sum G_n x^(3n).

The normalized coefficients c_n = n!^2 G_n are the minimal solution of

    r(n) c_{n+2} - 10 c_{n+1} + c_n = 0,   r(n) = (3n+4)(3n+5) / ((n+1)(n+2)),

so they are generated by Miller's backward recurrence from (u_R, u_{R+1}) =
(1, 0), summed Horner-style, and renormalized with c_0 = G_0 = 1/(9 Gamma(2/3)^3).
The result satisfies |G(x) - s| <= 3 2^-p G(x) for x >= 1/2.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from fractions import Fraction

from gmpy2 import mpfr

from .mp import (
    GUARD_BITS,
    MPInterval,
    MPValue,
    check_precision,
    exp2_index,
    gamma_two_thirds,
    make_context,
    round_to,
    to_fraction,
)

TAU = Fraction(3, 20)
CONST_PRECISION = 64
DEFAULT_LIMB_BITS = 64


def rec_ratio(n: int) -> Fraction:
    """r(n) = (3n+4)(3n+5) / ((n+1)(n+2)); r(0) = 10 and r(n) decreases to 9."""
    return Fraction((3 * n + 4) * (3 * n + 5), (n + 1) * (n + 2))


def g_initial_constant(t: int) -> MPValue:
    """9 Gamma(2/3)^3 = 1/G_0, evaluated with guard bits and rounded once."""
    check_precision(t)
    w = t + GUARD_BITS
    ctx = make_context(w)
    g = gamma_two_thirds(w)
    return round_to(ctx.mul(9, ctx.mul(ctx.square(g), g)), t)


@dataclass(frozen=True)
class GParams:
    alpha: MPValue
    beta: MPValue
    gamma: MPValue
    delta: MPValue
    N0: int
    N: int
    R: int
    t: int
    p: int
    x: object


def limb_bits() -> int:
    raw = os.environ.get("AIRY_GMR_LIMBS")
    if not raw:
        return DEFAULT_LIMB_BITS
    try:
        bits = int(raw)
    except ValueError:
        return DEFAULT_LIMB_BITS
    return bits if bits > 0 else DEFAULT_LIMB_BITS


def _ceil_log2(m: int) -> int:
    return (m - 1).bit_length()


def _ceil_sqrt(q: Fraction) -> int:
    """Least integer k >= 0 with k^2 >= q."""
    if q <= 0:
        return 0
    k = math.isqrt(q.numerator // q.denominator)
    while k * k < q:
        k += 1
    return k


def first_index(x) -> int:
    """N0 = max(1, ceil(sqrt(3/10) x^(3/2) - 1)), computed exactly."""
    x3 = to_fraction(x) ** 3
    return max(1, _ceil_sqrt(Fraction(3, 10) * x3) - 1)


def safe_constants(x) -> tuple[MPValue, MPValue, MPValue, MPValue]:
    """alpha, beta rounded down and gamma, delta rounded up, all at 64 bits.

    alpha <= 3 x^(-3/2) / e,  beta <= (2/3) log2(e) x^(3/2),
    gamma >= 1 / log2(20/3),  delta >= (2/3) log2(e) (sqrt(20/3) - 1) x^(3/2).
    """
    t = CONST_PRECISION
    xi = MPInterval.point(to_fraction(x), t)
    x32 = xi.mul(xi.sqrt(t), t)
    e = MPInterval.point(1, t).exp(t)
    ln2 = MPInterval(make_context(t, "down").const_log2(), make_context(t, "up").const_log2())
    log2e = MPInterval.point(1, t).div(ln2, t)
    alpha = MPInterval.point(3, t).div(e, t).div(x32, t)
    beta = log2e.mul(x32, t).scale(Fraction(2, 3), t)
    twenty_thirds = MPInterval.point(Fraction(20, 3), t)
    gamma = MPInterval.point(1, t).div(twenty_thirds.log2(t), t)
    root = twenty_thirds.sqrt(t).sub(MPInterval.point(1, t), t)
    delta = log2e.mul(root, t).mul(x32, t).scale(Fraction(2, 3), t)
    return alpha.lo, beta.lo, gamma.hi, delta.hi


def exp_power_lower(alpha: MPValue, n: int) -> int:
    """A lower bound on EXP((alpha n)^(2n)), as floor(2n log2(alpha n)) + 1 rounded down."""
    down = make_context(CONST_PRECISION, "down")
    lg = down.log2(down.mul(alpha, n))
    return int(down.floor(down.mul(lg, 2 * n))) + 1


def index_target(p: int, x, beta: MPValue) -> Fraction:
    """p + 9 + (3/4) EXP(x) - floor(beta)."""
    return p + 9 + Fraction(3, 4) * exp2_index(to_fraction(x)) - int(math.floor(to_fraction(beta)))


def choose_params(x, p: int) -> GParams:
    """Parameters of the backward-recurrence evaluation of G at x >= 1/2 to target 2^-p."""
    if p < 1:
        raise ValueError("p must be >= 1")
    xq = to_fraction(x)
    if xq < Fraction(1, 2):
        raise ValueError("g_sum requires x >= 1/2")
    alpha, beta, gamma, delta = safe_constants(xq)
    n0 = first_index(xq)
    target = index_target(p, xq, beta)

    # (alpha N)^(2N) increases for N >= N0 since alpha N0 > 1/e there
    def enough(n: int) -> bool:
        return exp_power_lower(alpha, n) >= target

    lo = hi = n0
    while not enough(hi):
        lo, hi = hi, hi * 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if enough(mid):
            hi = mid
        else:
            lo = mid
    n = hi

    up = make_context(CONST_PRECISION, "up")
    r_min = int(up.ceil(up.mul(up.add(delta, p + 2), gamma)))
    r = max(n, r_min)

    t_min = max(p + 7 + _ceil_log2(n + 3), 9 + _ceil_log2(r + 2), 5)
    limb = limb_bits()
    t = -(-t_min // limb) * limb
    return GParams(alpha, beta, gamma, delta, n0, n, r, t, p, x)


def miller_backward_step(a: MPValue, b: MPValue, i: int, t: int, ctx=None) -> MPValue:
    """One backward step u_i = 10 u_{i+1} - r(i) u_{i+2}, rounded as the error analysis assumes.

    r(i) b is formed by four successive roundings (times 3i+4, times 3i+5,
    over i+1, over i+2) and 10 a by one, then a single rounded subtraction.
    """
    if ctx is None:
        ctx = make_context(t)
    rb = ctx.mul(ctx.mul(b, 3 * i + 4), 3 * i + 5)
    rb = ctx.div(ctx.div(rb, i + 1), i + 2)
    return ctx.sub(ctx.mul(a, 10), rb)


def miller_preconditions(params: GParams) -> bool:
    """39 R 2^-t <= 0.1 and 50.7 (R+2) 2^-t <= 0.1."""
    scale = Fraction(1, 2**params.t)
    return (
        39 * params.R * scale <= Fraction(1, 10)
        and Fraction(507, 10) * (params.R + 2) * scale <= Fraction(1, 10)
    )


@dataclass
class GResult:
    s: MPValue
    params: GParams
    u0: MPValue
    # computed u_i for 0 <= i < N, when recording
    u: list = field(default_factory=list, repr=False)


def backward_sequence(R: int, t: int, count: int) -> list[MPValue]:
    """u_0..u_{count-1} of the backward recurrence started at (u_R, u_{R+1}) = (1, 0)."""
    ctx = make_context(t)
    a, b = mpfr(1, t, context=ctx), mpfr(0, t, context=ctx)
    out = [None] * count
    for i in range(R - 1, -1, -1):
        a, b = miller_backward_step(a, b, i, t, ctx), a
        if i < count:
            out[i] = a
    return out


def g_sum_detailed(x, p: int, params: GParams | None = None, record: bool = False) -> GResult:
    if params is None:
        params = choose_params(x, p)
    if not miller_preconditions(params):
        raise RuntimeError(f"working precision {params.t} too small for R = {params.R}")
    n, r, t = params.N, params.R, params.t
    ctx = make_context(t)
    xr = round_to(x, t)
    x3 = ctx.mul(ctx.mul(xr, xr), xr)
    a = mpfr(1, t, context=ctx)
    b = mpfr(0, t, context=ctx)
    sp = None
    u = [None] * n if record else []
    for i in range(r - 1, -1, -1):
        c = a
        a = miller_backward_step(a, b, i, t, ctx)
        b = c
        if not a > 0:
            raise ArithmeticError(f"backward recurrence lost positivity at i = {i}")
        if i == n - 1:
            sp = a
        elif i < n - 1:
            sp = ctx.add(a, ctx.div(ctx.div(ctx.mul(x3, sp), i + 1), i + 1))
        if record and i < n:
            u[i] = a
    s = ctx.div(ctx.div(sp, a), g_initial_constant(t))
    return GResult(s, params, a, u)


def g_sum(x, p: int) -> MPValue:
    """s with |G(x) - s| <= 3 2^-p G(x), for x >= 1/2."""
    return g_sum_detailed(x, p).s


def truncation_guard(N: int, x, p: int | None = None) -> MPValue:
    """Upper bound 2 (e x^(3/2) / (3N))^(2N) on sum_{n >= N} G_n x^(3n).

    Needs N + 1 >= sqrt(3/10) x^(3/2). With ``p`` given, also checks that the
    bound is at most 2^-p times the lower bound 0.01 e^((2/3) x^(3/2)) x^(-3/4) on G(x).
    """
    xq = to_fraction(x)
    if N < 1 or Fraction((N + 1) ** 2) < Fraction(3, 10) * xq**3:
        raise ValueError(f"N = {N} is below sqrt(3/10) x^(3/2) - 1")
    t = CONST_PRECISION
    xi = MPInterval.point(xq, t)
    x32 = xi.mul(xi.sqrt(t), t)
    e = MPInterval.point(1, t).exp(t)
    base = e.mul(x32, t).scale(Fraction(1, 3 * N), t)
    bound = base.pow_int(2 * N, t).scale(2, t)
    if p is not None:
        lower = g_lower_bound(xq, t)
        if not bound.hi <= make_context(t, "down").mul_2exp(lower.lo, -p):
            raise ValueError(f"truncation bound exceeds 2^-{p} G(x) at N = {N}")
    return bound.hi


def g_lower_bound(x, t: int = CONST_PRECISION) -> MPInterval:
    """Enclosure of 0.01 e^((2/3) x^(3/2)) x^(-3/4)."""
    return _sandwich_side(x, Fraction(1, 100), t)


def g_upper_bound(x, t: int = CONST_PRECISION) -> MPInterval:
    """Enclosure of 0.04 e^((2/3) x^(3/2)) x^(-3/4)."""
    return _sandwich_side(x, Fraction(4, 100), t)


def _sandwich_side(x, k: Fraction, t: int) -> MPInterval:
    xi = MPInterval.point(to_fraction(x), t)
    sx = xi.sqrt(t)
    x32 = xi.mul(sx, t)
    x34 = sx.mul(sx.sqrt(t), t)
    return x32.scale(Fraction(2, 3), t).exp(t).div(x34, t).scale(k, t)
