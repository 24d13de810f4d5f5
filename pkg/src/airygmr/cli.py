"""airygmr command line: eval, verify, bench."""

from __future__ import annotations

import argparse
import concurrent.futures
import csv
import math
import statistics
import sys
import time
from fractions import Fraction

from .airy import DomainError, HardCaseError, ai_correctly_rounded, ai_eval
from .mp import format_decimal, format_hex, parse_exact, round_to, to_fraction
from .rigor import FULL_C_RATIO_RANGE, UndecidableError, with_escalation
from .taylor import ai_taylor, oracle_precision

EXIT_USAGE = 2
EXIT_DOMAIN = 3
EXIT_HARD_CASE = 4
EXIT_UNDECIDABLE = 5
EXIT_UNWRITABLE = 6
INPUT_GUARD_BITS = 64
# enough extra accuracy for the two uncertain trailing decimals to usually be right
DECIMAL_GUARD_BITS = 8
SANDWICH_SAMPLES = 50


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


def decimal_digits(P: int) -> int:
    """Digits printed after the point: all certified ones plus two guard digits."""
    return math.ceil(P * math.log10(2)) + 2


def read_x(text: str, P: int):
    """The argument as an exact rational if it is dyadic, else rounded to P + 64 bits."""
    try:
        q = parse_exact(text)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    den = q.denominator
    if den & (den - 1) == 0:
        return q
    return round_to(q, P + INPUT_GUARD_BITS)


def cmd_eval(args) -> int:
    if args.prec < 2:
        raise UsageError("--prec must be at least 2")
    x = read_x(args.x, args.prec)
    try:
        if args.correct_rounding:
            if args.method != "auto":
                raise UsageError("--correct-rounding chooses the method itself")
            value = ai_correctly_rounded(x, args.prec)
        else:
            value = ai_eval(x, args.prec + DECIMAL_GUARD_BITS, args.method).value
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except HardCaseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_HARD_CASE
    print(format_hex(value) if args.hex else format_decimal(value, decimal_digits(args.prec)))
    print(f"relerr<=2^-{args.prec}")
    return 0


def sandwich_samples(n: int = SANDWICH_SAMPLES) -> list[Fraction]:
    """n evenly spaced points of [1/2, 50]."""
    return [Fraction(1, 2) + Fraction(99, 2) * Fraction(i, n - 1) for i in range(n)]


def cmd_verify(args) -> int:
    names = ["cratio", "gn", "dn", "gsandwich"] if args.check == "all" else [args.check]
    if args.nmax < 2:
        raise UsageError("--nmax must be at least 2")
    ok = True
    for name in names:
        if name == "gsandwich":
            arg = sandwich_samples()
        elif name == "cratio" and args.full:
            arg = FULL_C_RATIO_RANGE
        else:
            arg = args.nmax
        try:
            report = with_escalation(name, arg)
        except UndecidableError as exc:
            print(f"CHECK {name} UNDECIDABLE {exc}")
            return EXIT_UNDECIDABLE
        print(report.line(), flush=True)
        ok = ok and report.passed
    return 0 if ok else 1


def log_grid(lo: float, hi: float, steps: int) -> list[float]:
    if steps == 1:
        return [lo]
    return [lo * (hi / lo) ** (i / (steps - 1)) for i in range(steps)]


def bench_grid(args) -> list[tuple[str, int]]:
    if args.x_min < 0.5 or args.x_max < args.x_min:
        raise UsageError("need 0.5 <= --x-min <= --x-max")
    if args.p_min < 2 or args.p_max < args.p_min:
        raise UsageError("need 2 <= --p-min <= --p-max")
    if args.x_steps < 1 or args.p_steps < 1 or args.reps < 1:
        raise UsageError("step and repetition counts must be positive")
    xs = [f"{v:.6g}" for v in log_grid(args.x_min, args.x_max, args.x_steps)]
    ps = sorted({round(v) for v in log_grid(args.p_min, args.p_max, args.p_steps)})
    return [(x, p) for x in xs for p in ps]


def median_time(fn, reps: int) -> float:
    times = []
    for _ in range(reps):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return statistics.median(times)


def cross_check(point: tuple[str, int]) -> tuple[str, int]:
    """Both methods must agree within the sum of their certified errors."""
    x, p = point
    xq = parse_exact(x)
    a = to_fraction(ai_eval(xq, p, "gmr").value)
    b = to_fraction(ai_eval(xq, p, "taylor").value)
    eps = Fraction(1, 2**p)
    if abs(a - b) > 2 * eps * max(a, b) / (1 - eps):
        raise ArithmeticError(f"gmr and taylor disagree at x={x}, P={p}")
    return point


def bench_row(x: str, p: int, reps: int) -> dict:
    xq = parse_exact(x)
    time_gmr = median_time(lambda: ai_eval(xq, p, "gmr"), reps)
    time_taylor = median_time(lambda: ai_eval(xq, p, "taylor"), reps)
    # enough precision that the meter sees the whole cancellation
    _, report = ai_taylor(xq, oracle_precision(xq, p))
    return {
        "x": x,
        "p": p,
        "time_gmr": f"{time_gmr:.6e}",
        "time_taylor": f"{time_taylor:.6e}",
        "winner": "gmr" if time_gmr < time_taylor else "taylor",
        "bits_cancelled": report.measured_bits_lost,
    }


BENCH_FIELDS = ["x", "p", "time_gmr", "time_taylor", "winner", "bits_cancelled"]


def cmd_bench(args) -> int:
    grid = bench_grid(args)
    try:
        out = open(args.out, "w", newline="")
    except OSError as exc:
        print(f"error: cannot write {args.out}: {exc}", file=sys.stderr)
        return EXIT_UNWRITABLE
    with out:
        if args.parallel:
            with concurrent.futures.ProcessPoolExecutor() as pool:
                list(pool.map(cross_check, grid))
        writer = csv.DictWriter(out, fieldnames=BENCH_FIELDS)
        writer.writeheader()
        for x, p in grid:
            if not args.parallel:
                cross_check((x, p))
            writer.writerow(bench_row(x, p, args.reps))
            out.flush()
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="airygmr", description="Certified multiple-precision Ai(x) for x >= 0.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    ev = sub.add_parser("eval", help="evaluate Ai(x)")
    ev.add_argument("--x", required=True, help="decimal or hexadecimal-significand value, x >= 0")
    ev.add_argument("--prec", type=int, required=True, help="bits of relative accuracy P")
    ev.add_argument("--method", choices=["gmr", "taylor", "auto"], default="auto")
    ev.add_argument("--correct-rounding", action="store_true", help="round to nearest at P bits")
    ev.add_argument("--hex", action="store_true", help="print the exact binary value")
    ev.set_defaults(func=cmd_eval)

    ver = sub.add_parser("verify", help="interval checks of the inequalities the error bounds use")
    ver.add_argument("--check", choices=["cratio", "gn", "dn", "gsandwich", "all"], default="all")
    ver.add_argument("--nmax", type=int, default=5000)
    ver.add_argument("--full", action="store_true", help=f"run cratio up to n = {FULL_C_RATIO_RANGE}")
    ver.set_defaults(func=cmd_verify)

    be = sub.add_parser("bench", help="time both methods on a log grid and write CSV")
    be.add_argument("--x-min", type=float, default=1.0)
    be.add_argument("--x-max", type=float, default=200.0)
    be.add_argument("--x-steps", type=int, default=8)
    be.add_argument("--p-min", type=float, default=24)
    be.add_argument("--p-max", type=float, default=1024)
    be.add_argument("--p-steps", type=int, default=4)
    be.add_argument("--out", required=True)
    be.add_argument("--reps", type=int, default=3)
    be.add_argument("--parallel", action="store_true", help="run the correctness cross-checks concurrently")
    be.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
