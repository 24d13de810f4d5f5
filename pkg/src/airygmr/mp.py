"""Arithmetic substrate: precision-t correctly rounded floats, binary exponents
and outward-rounded intervals.

Values are plain ``gmpy2.mpfr`` objects (MPFR underneath). Every operation
takes its precision explicitly and builds its own MPFR context, so nothing in
this package reads or mutates the thread-local gmpy2 default context.

Contexts use the widest exponent range MPFR offers and trap overflow and
underflow, so an out-of-range intermediate raises ``gmpy2.RangeError``
instead of silently turning into ``inf`` or ``0``.
"""

from __future__ import annotations

import functools
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

import gmpy2
from gmpy2 import mpfr, mpq

MPValue = type(mpfr(0))
Real = Union[MPValue, int, Fraction]

MIN_PRECISION = 5
GUARD_BITS = 32

# raised by every context when a result leaves the exponent range
ExponentRangeError = (gmpy2.OverflowResultError, gmpy2.UnderflowResultError)

_ROUNDING = {
    "nearest": gmpy2.RoundToNearest,
    "down": gmpy2.RoundDown,
    "up": gmpy2.RoundUp,
}


class PrecisionError(ValueError):
    pass


def check_precision(t: int, minimum: int = MIN_PRECISION) -> int:
    if not isinstance(t, int) or t < minimum:
        raise PrecisionError(f"precision must be an integer >= {minimum}, got {t!r}")
    return t


def make_context(t: int, rounding: str = "nearest") -> gmpy2.context:
    """Fresh MPFR context at precision ``t`` bits (ties go to even)."""
    if t < 1:
        raise PrecisionError(f"precision must be positive, got {t!r}")
    return gmpy2.context(
        precision=t,
        round=_ROUNDING[rounding],
        emax=gmpy2.get_emax_max(),
        emin=gmpy2.get_emin_min(),
        trap_overflow=True,
        trap_underflow=True,
        trap_invalid=True,
    )


def to_fraction(v: Real) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, (int, float)):
        return Fraction(v)
    if isinstance(v, type(mpq(0))):
        return Fraction(int(v.numerator), int(v.denominator))
    if not gmpy2.is_finite(v):
        raise ValueError(f"not a finite value: {v!r}")
    n, d = v.as_integer_ratio()
    return Fraction(int(n), int(d))


def round_to(v: Real, t: int, rounding: str = "nearest") -> MPValue:
    """Round an exact value (mpfr, int or Fraction) to ``t`` bits, once."""
    ctx = make_context(t, rounding)
    if isinstance(v, Fraction):
        return mpfr(mpq(v.numerator, v.denominator), t, context=ctx)
    return mpfr(v, t, context=ctx)


def exp2_index(x: Real) -> int:
    """Binary exponent EXP(x): the integer E with 2**(E-1) <= |x| < 2**E."""
    if isinstance(x, (int, float, Fraction)):
        q = abs(Fraction(x))
        if q == 0:
            raise ValueError("EXP is undefined at zero")
        n, d = q.numerator, q.denominator
        e = n.bit_length() - d.bit_length()
        at_least = n >= (d << e) if e >= 0 else (n << -e) >= d
        return e + 1 if at_least else e
    if gmpy2.is_zero(x) or not gmpy2.is_finite(x):
        raise ValueError(f"EXP is undefined at {x!r}")
    m, e = x.as_mantissa_exp()
    return int(abs(m)).bit_length() + int(e)


def _operand(v: Real):
    if isinstance(v, Fraction):
        return mpq(v.numerator, v.denominator)
    return v


def rounded_op(op: str, a: Real, b: Real, t: int) -> MPValue:
    """Correctly rounded ``a op b`` at precision ``t`` (round to nearest, ties to even).

    Operands are taken exactly, whatever their own precision.
    """
    if op not in ("add", "sub", "mul", "div"):
        raise ValueError(f"unknown operation {op!r}")
    if op == "div" and b == 0:
        raise ZeroDivisionError("rounded division by zero")
    if not isinstance(a, MPValue) and not isinstance(b, MPValue):
        # both exact rationals: do it exactly, round once
        fa, fb = Fraction(a), Fraction(b)
        exact = {"add": fa + fb, "sub": fa - fb, "mul": fa * fb, "div": fa / fb}[op]
        return round_to(exact, t)
    ctx = make_context(t)
    return getattr(ctx, op)(_operand(a), _operand(b))


def error_counter_bound(k: int, t: int) -> Fraction:
    """Bound on |theta| for a value carrying k rounding factors (1+d)^(+-1), |d| <= 2^-t.

    Valid only when k * 2^-t <= 1/2; the bound is then 2k * 2^-t.
    """
    if Fraction(k, 2**t) > Fraction(1, 2):
        raise ValueError(f"error counter {k} too large for precision {t}")
    return Fraction(2 * k, 2**t)


@dataclass(frozen=True)
class MPInterval:
    """Closed interval [lo, hi] with mpfr endpoints.

    Every operation rounds its lower endpoint down and its upper endpoint up,
    so the exact image of any pair of enclosed reals stays enclosed.
    """

    lo: MPValue
    hi: MPValue

    def __post_init__(self):
        if gmpy2.is_nan(self.lo) or gmpy2.is_nan(self.hi) or self.lo > self.hi:
            raise ValueError(f"invalid interval [{self.lo}, {self.hi}]")

    @classmethod
    def point(cls, v: Real, t: int) -> "MPInterval":
        return cls(round_to(v, t, "down"), round_to(v, t, "up"))

    @classmethod
    def hull(cls, lo: Real, hi: Real, t: int) -> "MPInterval":
        return cls(round_to(lo, t, "down"), round_to(hi, t, "up"))

    def contains(self, v: Real) -> bool:
        q = to_fraction(v)
        return to_fraction(self.lo) <= q <= to_fraction(self.hi)

    def __contains__(self, v) -> bool:
        return self.contains(v)

    def width(self) -> Fraction:
        return to_fraction(self.hi) - to_fraction(self.lo)

    def mid(self) -> Fraction:
        return (to_fraction(self.lo) + to_fraction(self.hi)) / 2

    def is_positive(self) -> bool:
        return self.lo > 0

    def __neg__(self) -> "MPInterval":
        return MPInterval(-self.hi, -self.lo)

    def __abs__(self) -> "MPInterval":
        if self.lo >= 0:
            return self
        if self.hi <= 0:
            return -self
        return MPInterval(mpfr(0), max(-self.lo, self.hi))

    def add(self, other: "MPInterval", t: int) -> "MPInterval":
        down, up = make_context(t, "down"), make_context(t, "up")
        return MPInterval(down.add(self.lo, other.lo), up.add(self.hi, other.hi))

    def sub(self, other: "MPInterval", t: int) -> "MPInterval":
        down, up = make_context(t, "down"), make_context(t, "up")
        return MPInterval(down.sub(self.lo, other.hi), up.sub(self.hi, other.lo))

    def mul(self, other: "MPInterval", t: int) -> "MPInterval":
        down, up = make_context(t, "down"), make_context(t, "up")
        pairs = [(x, y) for x in (self.lo, self.hi) for y in (other.lo, other.hi)]
        return MPInterval(
            min(down.mul(x, y) for x, y in pairs),
            max(up.mul(x, y) for x, y in pairs),
        )

    def div(self, other: "MPInterval", t: int) -> "MPInterval":
        if other.lo <= 0 <= other.hi:
            raise ZeroDivisionError("interval divisor contains zero")
        down, up = make_context(t, "down"), make_context(t, "up")
        pairs = [(x, y) for x in (self.lo, self.hi) for y in (other.lo, other.hi)]
        return MPInterval(
            min(down.div(x, y) for x, y in pairs),
            max(up.div(x, y) for x, y in pairs),
        )

    def scale(self, q, t: int) -> "MPInterval":
        """Multiply by an exact int or rational (a single outward rounding per endpoint)."""
        q = Fraction(q)
        k = mpq(q.numerator, q.denominator)
        down, up = make_context(t, "down"), make_context(t, "up")
        if q >= 0:
            return MPInterval(down.mul(self.lo, k), up.mul(self.hi, k))
        return MPInterval(down.mul(self.hi, k), up.mul(self.lo, k))

    def _monotone(self, name: str, t: int) -> "MPInterval":
        down, up = make_context(t, "down"), make_context(t, "up")
        return MPInterval(getattr(down, name)(self.lo), getattr(up, name)(self.hi))

    def cbrt(self, t: int) -> "MPInterval":
        return self._monotone("cbrt", t)

    def sqrt(self, t: int) -> "MPInterval":
        if self.lo < 0:
            raise ValueError("sqrt of an interval reaching below zero")
        return self._monotone("sqrt", t)

    def exp(self, t: int) -> "MPInterval":
        return self._monotone("exp", t)

    def log2(self, t: int) -> "MPInterval":
        if self.lo <= 0:
            raise ValueError("log2 of an interval reaching zero")
        return self._monotone("log2", t)

    def log(self, t: int) -> "MPInterval":
        if self.lo <= 0:
            raise ValueError("log of an interval reaching zero")
        return self._monotone("log", t)

    def pow_int(self, k: int, t: int) -> "MPInterval":
        """Integer power of a positive interval."""
        if self.lo < 0:
            raise ValueError("pow_int expects a nonnegative interval")
        down, up = make_context(t, "down"), make_context(t, "up")
        return MPInterval(down.pow(self.lo, k), up.pow(self.hi, k))

    def __repr__(self) -> str:
        return f"MPInterval({self.lo}, {self.hi})"


def interval_op(op: str, a: MPInterval, b: MPInterval, t: int) -> MPInterval:
    if op not in ("add", "sub", "mul", "div"):
        raise ValueError(f"unknown operation {op!r}")
    return getattr(a, op)(b, t)


def pi_interval(t: int) -> MPInterval:
    return MPInterval(make_context(t, "down").const_pi(), make_context(t, "up").const_pi())


def gamma_interval(q: Fraction, t: int) -> MPInterval:
    """Enclosure of Gamma(q) for a rational 0 < q <= 1.

    Gamma(1/3) and Gamma(2/3) come from an AGM identity, which stays fast at
    hundreds of thousands of bits; other arguments use MPFR's Gamma, which is
    decreasing on (0, 1].
    """
    q = Fraction(q)
    if not 0 < q <= 1:
        raise ValueError("gamma_interval needs 0 < q <= 1")
    if q in (Fraction(1, 3), Fraction(2, 3)):
        return _gamma_thirds(t)[0 if q == Fraction(1, 3) else 1]
    arg = MPInterval.point(q, t)
    return MPInterval(
        make_context(t, "down").gamma(arg.hi), make_context(t, "up").gamma(arg.lo)
    )


@functools.lru_cache(maxsize=32)
def _gamma_thirds(t: int) -> tuple[MPInterval, MPInterval]:
    # Gamma(1/3)^3 = 2^(7/3) 3^(-1/4) pi^2 / AGM(2, sqrt(2 + sqrt 3)),
    # Gamma(2/3) = 2 pi / (sqrt(3) Gamma(1/3))
    w = t + 8
    down, up = make_context(w, "down"), make_context(w, "up")
    root3 = MPInterval.point(3, w).sqrt(w)
    b = MPInterval.point(2, w).add(root3, w).sqrt(w)
    agm = MPInterval(down.agm(2, b.lo), up.agm(2, b.hi))
    pi = pi_interval(w)
    num = MPInterval.point(128, w).cbrt(w).mul(pi.mul(pi, w), w)
    cube = num.div(root3.sqrt(w).mul(agm, w), w)
    g13 = cube.cbrt(w)
    g23 = pi.scale(2, w).div(root3.mul(g13, w), w)
    return _outward(g13, t), _outward(g23, t)


def _outward(i: MPInterval, t: int) -> MPInterval:
    return MPInterval(round_to(i.lo, t, "down"), round_to(i.hi, t, "up"))


def _gamma_rational(q: Fraction, t: int) -> MPValue:
    check_precision(t)
    enc = gamma_interval(q, t + GUARD_BITS)
    return round_to(enc.lo, t)


def gamma_two_thirds(t: int) -> MPValue:
    """Gamma(2/3) at ``t`` bits: evaluated with 32 guard bits, then rounded once."""
    return _gamma_rational(Fraction(2, 3), t)


def gamma_one_third(t: int) -> MPValue:
    """Gamma(1/3) at ``t`` bits: evaluated with 32 guard bits, then rounded once."""
    return _gamma_rational(Fraction(1, 3), t)


# ---------------------------------------------------------------------------
# text forms

_HEX_RE = re.compile(
    r"^\s*([+-]?)0[xX]([0-9a-fA-F]*)(?:\.([0-9a-fA-F]*))?(?:[pP]([+-]?\d+))?\s*$"
)


def parse_exact(s: str) -> Fraction:
    """Exact rational value of a decimal or hexadecimal-significand string."""
    m = _HEX_RE.match(s)
    if m:
        sign, whole, frac, exp = m.groups()
        whole, frac = whole or "", frac or ""
        if not whole and not frac:
            raise ValueError(f"malformed hexadecimal value {s!r}")
        digits = int(whole + frac, 16)
        q = Fraction(digits, 16 ** len(frac)) * Fraction(2) ** int(exp or 0)
        return -q if sign == "-" else q
    try:
        return Fraction(s.strip())
    except (ValueError, ZeroDivisionError):
        raise ValueError(f"malformed number {s!r}") from None


def parse_value(s: str, t: int) -> MPValue:
    return round_to(parse_exact(s), t)


def format_decimal(v: MPValue, digits: int) -> str:
    """Scientific notation with ``digits`` digits after the point, e.g. 3.55e-1."""
    if gmpy2.is_zero(v):
        return "0." + "0" * digits + "e0" if digits else "0e0"
    mant, e, _ = v.digits(10, digits + 1)
    sign = ""
    if mant.startswith("-"):
        sign, mant = "-", mant[1:]
    body = mant[0] + ("." + mant[1:] if digits else "")
    return f"{sign}{body}e{e - 1}"


def format_hex(v: MPValue) -> str:
    """Bit-exact hexadecimal-significand form ``0x1.<hex>p<+-exp>``."""
    if gmpy2.is_zero(v):
        return "0x0p+0"
    m, e = v.as_mantissa_exp()
    m, e = int(m), int(e)
    sign = "-" if m < 0 else ""
    m = abs(m)
    while m % 2 == 0:
        m >>= 1
        e += 1
    nbits = m.bit_length() - 1
    lead_exp = nbits + e
    frac = m - (1 << nbits)
    pad = (-nbits) % 4
    ndig = (nbits + pad) // 4
    if ndig == 0:
        return f"{sign}0x1p{lead_exp:+d}"
    return f"{sign}0x1.{frac << pad:0{ndig}x}p{lead_exp:+d}"
