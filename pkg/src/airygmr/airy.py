"""Public entry points: certified Ai(x) for x >= 0 and a correctly rounded wrapper.

For x >= 1/2, Ai(x) = G(x) / F(x) with both series evaluated to 2^-p
(p = P + 3), giving a relative error of at most 7 2^-p <= 2^-P. Below 1/2 the
direct Taylor sum loses at most a couple of bits, so it is used instead, with
an a-posteriori bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .mp import MPValue, make_context, round_to, to_fraction
from .series_f import f_sum
from .series_g import g_sum
from .taylor import predict_cancellation_bits, taylor_evaluate

GMR_THRESHOLD = Fraction(1, 2)
ZIV_FIRST_EXTRA = 16
ZIV_MAX_EXTRA = 2048
TAYLOR_GUARD_BITS = 16


class DomainError(ValueError):
    pass


class HardCaseError(ArithmeticError):
    """Correct rounding could not be decided within the retry budget."""


@dataclass(frozen=True)
class CertifiedValue:
    value: MPValue
    # |value - Ai(x)| <= 2^rel_error_log2 |Ai(x)|
    rel_error_log2: int
    method: str


def _check_args(x, P) -> Fraction:
    if not isinstance(P, int) or isinstance(P, bool) or P < 1:
        raise ValueError(f"requested accuracy must be a positive integer, got {P!r}")
    xq = to_fraction(x)
    if xq < 0:
        raise DomainError("Ai is only evaluated for x >= 0")
    return xq


def _gmr(x, P: int) -> CertifiedValue:
    p = P + 3
    g = g_sum(x, p)
    f = f_sum(x, p)
    return CertifiedValue(make_context(p).div(g, f), -P, "gmr")


def _taylor(x, P: int) -> CertifiedValue:
    target = Fraction(1, 2 ** (P + 1))
    t = P + 3 + math.ceil(predict_cancellation_bits(x)) + TAYLOR_GUARD_BITS
    while True:
        r = taylor_evaluate(x, t)
        if r.rel_error is not None and r.rel_error <= target:
            # the final rounding to P+3 bits adds at most 2^-(P+3)
            return CertifiedValue(round_to(r.value, P + 3), -P, "taylor")
        t += max(32, t // 2)


def ai_eval(x, P: int, method: str = "auto") -> CertifiedValue:
    """Ai(x) with relative error at most 2^-P.

    ``method`` is ``"gmr"`` (needs x >= 1/2), ``"taylor"``, or ``"auto"``,
    which picks gmr from x = 1/2 on.
    """
    xq = _check_args(x, P)
    if method == "auto":
        method = "gmr" if xq >= GMR_THRESHOLD else "taylor"
    if method == "gmr":
        if xq < GMR_THRESHOLD:
            raise DomainError("the F/G evaluation is only set up for x >= 1/2")
        return _gmr(x, P)
    if method == "taylor":
        return _taylor(x, P)
    raise ValueError(f"unknown method {method!r}")


def ai_correctly_rounded(x, out_precision: int, attempts: list | None = None) -> MPValue:
    """Ai(x) rounded to nearest (ties to even) at ``out_precision`` bits.

    Retries with accuracy out+16, out+48, out+112, ... until both ends of the
    certified error interval round to the same value. Gives up with
    HardCaseError once more than out+2048 bits would be needed.
    """
    if not isinstance(out_precision, int) or out_precision < 2:
        raise ValueError("out_precision must be an integer >= 2")
    extra = ZIV_FIRST_EXTRA
    while extra <= ZIV_MAX_EXTRA:
        P = out_precision + extra
        if attempts is not None:
            attempts.append(P)
        cv = ai_eval(x, P)
        v = to_fraction(cv.value)
        eps = Fraction(2) ** cv.rel_error_log2
        # Ai(x) > 0 for x >= 0
        lo = round_to(v / (1 + eps), out_precision)
        hi = round_to(v / (1 - eps), out_precision)
        if lo == hi:
            return lo
        extra = 2 * extra + ZIV_FIRST_EXTRA
    raise HardCaseError(
        f"rounding of Ai({x}) to {out_precision} bits undecided at {out_precision + ZIV_MAX_EXTRA} bits"
    )
