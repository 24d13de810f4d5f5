"""Interval-arithmetic checks of the inequalities the error analysis relies on.

Both recurrences are run in ratio form. With rho_n = c_{n+1}/c_n the
normalized recurrence becomes rho_{n+1} = (10 - 1/rho_n) / r(n), which is
increasing in rho_n, so an interval step loses nothing to dependency: the
enclosure only widens through rounding, by the factor 1/(rho^2 r) ~ 9 per step
for the minimal solution c_n (about log2(9) = 3.17 bits) and by ~1/9 for the
dominant solution d_n. Products of positive ratio enclosures then give c_n, d_n
and G_n.

A check returns PASS when every enclosure lies strictly on the right side of
its bound, FAIL when some enclosure lies entirely on the wrong side, and
raises UndecidableError when an enclosure straddles a bound.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator

from gmpy2 import mpq

from .mp import (
    MPInterval,
    format_decimal,
    gamma_interval,
    make_context,
    pi_interval,
    to_fraction,
)
from .series_g import TAU, g_lower_bound, g_upper_bound, rec_ratio

FULL_C_RATIO_RANGE = 47610
DN_LOWER = Fraction(783, 1000)
GN_CONSTANT = Fraction(22, 10)


def eta(n: int) -> Fraction:
    """eta(n) = 1/(3 n^2)."""
    return Fraction(1, 3 * n * n)


class UndecidableError(ArithmeticError):
    """An enclosure straddles the bound being checked; more precision is needed."""


@dataclass
class CheckReport:
    name: str
    start: object
    stop: object
    # worst distance to the bound (positive means satisfied)
    margin: MPInterval | None
    passed: bool
    seconds: float

    def line(self) -> str:
        margin = "nan" if self.margin is None else format_decimal(self.margin.lo, 5)
        verdict = "PASS" if self.passed else "FAIL"
        return (
            f"CHECK {self.name} RANGE {self.start}..{self.stop} "
            f"MARGIN {margin} {verdict} TIME {self.seconds:.3f}"
        )


def minimal_precision(n_max: int) -> int:
    """Working precision for forward runs of the minimal solution: ceil(3.17 n) + 256."""
    return math.ceil(Fraction(317, 100) * n_max) + 256


def initial_g_enclosures(t: int) -> tuple[MPInterval, MPInterval]:
    """G_0 = 1/(9 Gamma(2/3)^3) and G_1 = 1/(18 Gamma(2/3)^3) - 1/(3 Gamma(1/3)^3)."""
    g23 = gamma_interval(Fraction(2, 3), t)
    g13 = gamma_interval(Fraction(1, 3), t)
    one = MPInterval.point(1, t)
    inv23 = one.div(g23.pow_int(3, t), t)
    inv13 = one.div(g13.pow_int(3, t), t)
    g0 = inv23.scale(Fraction(1, 9), t)
    g1 = inv23.scale(Fraction(1, 18), t).sub(inv13.scale(Fraction(1, 3), t), t)
    return g0, g1


def _ratio_step(rho: MPInterval, n: int, down, up) -> MPInterval:
    """(10 - 1/rho) / r(n) for rho > 0, endpoint by endpoint."""
    if not rho.lo > 0:
        raise UndecidableError(f"ratio enclosure at n = {n} reaches zero")
    r = rec_ratio(n)
    q = mpq(r.denominator, r.numerator)
    lo = down.mul(down.sub(10, up.div(1, rho.lo)), q)
    hi = up.mul(up.sub(10, down.div(1, rho.hi)), q)
    return MPInterval(lo, hi)


def c_ratio_enclosures(n_max: int, t: int) -> Iterator[tuple[int, MPInterval]]:
    """Yield (n, enclosure of c_{n+1}/c_n) for 0 <= n < n_max."""
    down, up = make_context(t, "down"), make_context(t, "up")
    g0, g1 = initial_g_enclosures(t)
    rho = g1.div(g0, t)
    for n in range(n_max):
        yield n, rho
        if n + 1 < n_max:
            rho = _ratio_step(rho, n, down, up)


def c_enclosures(n_max: int, t: int | None = None) -> list[MPInterval]:
    """Enclosures of c_n = n!^2 G_n for 0 <= n <= n_max."""
    if t is None:
        t = minimal_precision(n_max)
    g0, _ = initial_g_enclosures(t)
    out = [g0]
    c = g0
    for n, rho in c_ratio_enclosures(n_max, t):
        c = c.mul(rho, t)
        out.append(c)
    return out


def g_coefficient_enclosures(n_max: int, t: int | None = None) -> list[MPInterval]:
    """Enclosures of G_n = c_n / n!^2 for 0 <= n <= n_max."""
    if t is None:
        t = minimal_precision(n_max)
    out = []
    fact = 1
    for n, c in enumerate(c_enclosures(n_max, t)):
        if n:
            fact *= n
        out.append(c.scale(Fraction(1, fact * fact), t))
    return out


def d_ratio_enclosures(n_max: int, t: int) -> Iterator[tuple[int, MPInterval]]:
    """Yield (n, enclosure of d_{n+1}/d_n) for 0 <= n < n_max, with d_0 = d_1 = 1."""
    down, up = make_context(t, "down"), make_context(t, "up")
    sigma = MPInterval.point(1, t)
    for n in range(n_max):
        yield n, sigma
        if n + 1 < n_max:
            sigma = _ratio_step(sigma, n, down, up)


def d_enclosures(n_max: int, t: int = 256) -> list[MPInterval]:
    """Enclosures of d_0 .. d_{n_max}."""
    d = MPInterval.point(1, t)
    out = [d]
    for _, sigma in d_ratio_enclosures(n_max, t):
        d = d.mul(sigma, t)
        out.append(d)
    return out


def _judge(margin: MPInterval, what: str) -> bool:
    if margin.lo > 0:
        return True
    if margin.hi < 0:
        return False
    raise UndecidableError(f"cannot decide {what}: margin {margin}")


class _Worst:
    def __init__(self):
        self.margin = None
        self.passed = True

    def take(self, margin: MPInterval, what: str):
        ok = _judge(margin, what)
        self.passed = self.passed and ok
        if self.margin is None or margin.lo < self.margin.lo:
            self.margin = margin


def check_c_ratio(n_max: int, t: int | None = None) -> CheckReport:
    """0 <= c_{n+1}/c_n <= 3/20 for all 0 <= n < n_max."""
    if n_max < 2:
        raise ValueError("n_max must be >= 2")
    if t is None:
        t = minimal_precision(n_max)
    start = time.perf_counter()
    worst = _Worst()
    tau = MPInterval.point(TAU, t)
    for n, rho in c_ratio_enclosures(n_max, t):
        worst.take(rho, f"c ratio positivity at n = {n}")
        worst.take(tau.sub(rho, t), f"c ratio <= tau at n = {n}")
    return CheckReport("cratio", 0, n_max - 1, worst.margin, worst.passed, time.perf_counter() - start)


def check_gn_estimate(n_max: int, t: int | None = None) -> CheckReport:
    """|G_n / gamma_n - 1| <= 2.2 n^(-1/4) for 1 <= n <= n_max, gamma_n = 1/(4 sqrt(3) pi 9^n n!^2)."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    if t is None:
        t = minimal_precision(n_max)
    start = time.perf_counter()
    worst = _Worst()
    g0, _ = initial_g_enclosures(t)
    # w_n = G_n / gamma_n = 4 sqrt(3) pi 9^n c_n
    w = MPInterval.point(3, t).sqrt(t).mul(pi_interval(t), t).scale(4, t).mul(g0, t)
    one = MPInterval.point(1, t)
    for n, rho in c_ratio_enclosures(n_max + 1, t):
        if n == n_max:
            break
        w = w.mul(rho.scale(9, t), t)
        m = n + 1
        dev_abs = abs(w.sub(one, t))
        root = MPInterval.point(m, t).sqrt(t).sqrt(t)
        bound = MPInterval.point(GN_CONSTANT, t).div(root, t)
        worst.take(bound.sub(dev_abs, t), f"G_n estimate at n = {m}")
    return CheckReport("gn", 1, n_max, worst.margin, worst.passed, time.perf_counter() - start)


def check_dn_bounds(n_max: int, t: int | None = None) -> CheckReport:
    """d_{n+1} <= d_n <= (1 + eta(n)) d_{n+1} for 1 <= n < n_max and 0.783 <= d_n <= 1 up to n_max."""
    if n_max < 2:
        raise ValueError("n_max must be >= 2")
    if t is None:
        t = 128 + 4 * n_max.bit_length()
    start = time.perf_counter()
    worst = _Worst()
    one = MPInterval.point(1, t)
    lower = MPInterval.point(DN_LOWER, t)
    d = one
    for n, sigma in d_ratio_enclosures(n_max, t):
        # d is d_n here, sigma = d_{n+1}/d_n
        worst.take(d.sub(lower, t), f"d_{n} >= 0.783")
        if n >= 2:
            # d_0 = d_1 = 1 exactly
            worst.take(one.sub(d, t), f"d_{n} <= 1")
        if n >= 1:
            worst.take(one.sub(sigma, t), f"d_{n + 1} <= d_{n}")
            grow = sigma.scale(1 + eta(n), t)
            worst.take(grow.sub(one, t), f"d_{n} <= (1 + eta) d_{n + 1}")
        d = d.mul(sigma, t)
    worst.take(d.sub(lower, t), f"d_{n_max} >= 0.783")
    worst.take(one.sub(d, t), f"d_{n_max} <= 1")
    return CheckReport("dn", 0, n_max, worst.margin, worst.passed, time.perf_counter() - start)


def g_enclosure(x, coeffs: list[MPInterval], t: int, rel_tail: int = 40) -> MPInterval:
    """Enclosure of G(x) from coefficient enclosures.

    Sums G_n x^(3n) until some N with N + 1 >= sqrt(3/10) x^(3/2) makes the
    tail bound 2 G_N x^(3N) smaller than 2^-rel_tail of the partial sum; then
    sum_{n<=N} <= G(x) <= sum_{n<N} + 2 G_N x^(3N).
    """
    xq = to_fraction(x)
    x3 = MPInterval.point(xq, t).pow_int(3, t)
    need = Fraction(3, 10) * xq**3
    power = MPInterval.point(1, t)
    partial = None
    for n, g in enumerate(coeffs):
        term = g.mul(power, t)
        if partial is not None and (n + 1) ** 2 >= need:
            tail = term.scale(2, t)
            if tail.hi < make_context(t, "down").mul_2exp(partial.lo, -rel_tail):
                low = partial.add(term, t).lo
                return MPInterval(low, partial.add(tail, t).hi)
        partial = term if partial is None else partial.add(term, t)
        power = power.mul(x3, t)
    raise UndecidableError(f"not enough coefficients to bound the tail of G({x})")


def coefficients_needed(x_max) -> int:
    """Generous count of G_n terms for the tail of G to become negligible at x <= x_max."""
    return int(1.3 * float(x_max) ** 1.5) + 64


def check_g_sandwich(xs, t: int | None = None) -> CheckReport:
    """0.01 e^((2/3) x^(3/2)) x^(-3/4) <= G(x) <= 0.04 e^((2/3) x^(3/2)) x^(-3/4) at every sample."""
    xs = list(xs)
    if not xs or min(to_fraction(x) for x in xs) < Fraction(1, 2):
        raise ValueError("samples must be nonempty and >= 1/2")
    start = time.perf_counter()
    x_max = max(to_fraction(x) for x in xs)
    n_coeffs = coefficients_needed(x_max)
    if t is None:
        t = minimal_precision(n_coeffs)
    coeffs = g_coefficient_enclosures(n_coeffs, t)
    worst = _Worst()
    for x in xs:
        g = g_enclosure(x, coeffs, t)
        lo_side = g.div(g_lower_bound(x, t), t).sub(MPInterval.point(1, t), t)
        hi_side = MPInterval.point(1, t).sub(g.div(g_upper_bound(x, t), t), t)
        worst.take(lo_side, f"G({x}) above the lower bound")
        worst.take(hi_side, f"G({x}) below the upper bound")
    lo_x = f"{float(min(to_fraction(x) for x in xs)):g}"
    return CheckReport("gsandwich", lo_x, f"{float(x_max):g}", worst.margin, worst.passed, time.perf_counter() - start)


def initial_precision(name: str, arg) -> int:
    """Default working precision of each check; ``arg`` is n_max or the sample list."""
    if name in ("cratio", "gn"):
        return minimal_precision(arg)
    if name == "dn":
        return 128 + 4 * int(arg).bit_length()
    if name == "gsandwich":
        return minimal_precision(coefficients_needed(max(to_fraction(x) for x in arg)))
    raise ValueError(f"unknown check {name!r}")


CHECKS: dict[str, Callable[..., CheckReport]] = {
    "cratio": check_c_ratio,
    "gn": check_gn_estimate,
    "dn": check_dn_bounds,
    "gsandwich": check_g_sandwich,
}


def with_escalation(name: str, arg, doublings: int = 3) -> CheckReport:
    """Run a check, doubling the working precision while it is undecidable."""
    check = CHECKS[name]
    t = initial_precision(name, arg)
    for attempt in range(doublings + 1):
        try:
            return check(arg, t)
        except UndecidableError:
            if attempt == doublings:
                raise
            t *= 2
    raise AssertionError("unreachable")
