"""Multiple-precision Ai(x) for x >= 0 with a proven relative error bound.

Ai(x) is computed as G(x) / F(x) where F(x) = Ai(jx) Ai(x/j) and
G(x) = Ai(x) F(x) have power series with positive terms, which avoids the
cancellation of the plain Maclaurin sum for large x.
"""

from .airy import (
    CertifiedValue,
    DomainError,
    HardCaseError,
    ai_correctly_rounded,
    ai_eval,
)
from .mp import MPInterval, MPValue, format_decimal, format_hex, parse_exact
from .rigor import (
    CheckReport,
    UndecidableError,
    check_c_ratio,
    check_dn_bounds,
    check_g_sandwich,
    check_gn_estimate,
)
from .series_f import f_sum
from .series_g import GParams, choose_params, g_sum
from .taylor import CancellationReport, ai_taylor, predict_cancellation_bits

__all__ = [
    "CancellationReport",
    "CertifiedValue",
    "CheckReport",
    "DomainError",
    "GParams",
    "HardCaseError",
    "MPInterval",
    "MPValue",
    "UndecidableError",
    "ai_correctly_rounded",
    "ai_eval",
    "ai_taylor",
    "check_c_ratio",
    "check_dn_bounds",
    "check_g_sandwich",
    "check_gn_estimate",
    "choose_params",
    "f_sum",
    "format_decimal",
    "format_hex",
    "g_sum",
    "parse_exact",
    "predict_cancellation_bits",
]
