"""Command-line front end.

Every subcommand builds a plain dict (JSON) or a header plus rows (CSV) and
writes it to ``--out`` or stdout.  JSON keys are sorted and CSV uses LF line
endings, so identical invocations produce identical bytes.

Exit codes: 0 success, 2 invalid input or usage, 3 resource limit,
4 verification failure, 1 internal inconsistency.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import re
import sys
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import arith, exp_sums, factor_plan, harness, quad_field, weyl_sums
from .errors import (
    ConsistencyError,
    CubicWeylError,
    FactorizationError,
    InfeasibleSplitError,
    InvalidInputError,
    ResourceError,
)
from .quad_field import QuadraticIrrational

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_INVALID = 2
EXIT_RESOURCE = 3
EXIT_SUITE_FAILED = 4

FORMATS = ("csv", "json")
U64_MAX = (1 << 64) - 1


@dataclass(frozen=True)
class Config:
    max_n: int = weyl_sums.DEFAULT_MAX_N
    max_q: int = exp_sums.DEFAULT_MAX_Q
    seed: int = 0
    fmt: str = "json"
    out: str | None = None

    def __post_init__(self):
        if self.max_n < 1 or self.max_q < 1:
            raise InvalidInputError("budgets must be positive")
        if self.fmt not in FORMATS:
            raise InvalidInputError(f"format must be one of {FORMATS}, got {self.fmt!r}")
        if not 0 <= self.seed <= U64_MAX:
            raise InvalidInputError(f"seed must fit in 64 bits, got {self.seed}")


class _Usage(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # raise instead of exiting so main() owns the exit code
    def error(self, message):
        raise _Usage(f"{self.prog}: error: {message}")


_ALPHA_FORMS = {
    "sqrt": re.compile(r"^sqrt:(\d+)$"),
    "quad": re.compile(r"^quad:(-?\d+),(-?\d+),(\d+),(\d+)$"),
    "rat": re.compile(r"^rat:(-?\d+)/(\d+)$"),
}


def parse_alpha(text: str):
    """``sqrt:<d>``, ``quad:<f>,<g>,<c>,<d>`` or ``rat:<a>/<q>``."""
    text = text.strip()
    if m := _ALPHA_FORMS["sqrt"].match(text):
        return QuadraticIrrational.sqrt(int(m[1]))
    if m := _ALPHA_FORMS["quad"].match(text):
        return QuadraticIrrational(*(int(x) for x in m.groups()))
    if m := _ALPHA_FORMS["rat"].match(text):
        if int(m[2]) == 0:
            raise InvalidInputError("rational alpha needs a nonzero denominator")
        return Fraction(int(m[1]), int(m[2]))
    raise InvalidInputError(f"cannot parse alpha {text!r}; expected sqrt:<d>, quad:<f>,<g>,<c>,<d> or rat:<a>/<q>")


def _parse_bound(text: str) -> tuple[str, float]:
    key, sep, value = text.partition("=")
    if not sep or not key:
        raise InvalidInputError(f"bound must look like key=value, got {text!r}")
    num = float(value)
    return key, int(num) if num.is_integer() and "." not in value and "e" not in value.lower() else num


def _fmt_factorization(fac) -> str:
    return "*".join(f"{p}^{e}" if e > 1 else str(p) for p, e in fac) or "1"


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, (set, tuple)):
        return list(obj)
    raise TypeError(f"not JSON serialisable: {type(obj).__name__}")


def _cell(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, np.integer):
        return str(int(x))
    return str(x)


def render(payload, fmt: str) -> str:
    """JSON text of ``payload["json"]`` or CSV text of ``payload["csv"] = (header, rows)``."""
    if fmt == "json":
        return json.dumps(payload["json"], sort_keys=True, indent=2, default=_json_default) + "\n"
    header, rows = payload["csv"]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(row.get(k)) for k in header])
    return buf.getvalue()


def _kv_rows(d: dict) -> tuple[list[str], list[dict]]:
    """Single-row CSV with the dict's scalar fields as columns."""
    flat = {k: v for k, v in sorted(d.items()) if not isinstance(v, (dict, list))}
    return list(flat), [flat]


def _alpha_str(alpha) -> str:
    return f"{alpha.numerator}/{alpha.denominator}" if isinstance(alpha, Fraction) else str(alpha)


# subcommands: each returns (payload, exit code)


def cmd_approx(args, cfg: Config):
    alpha = parse_alpha(args.alpha) if args.alpha else QuadraticIrrational.sqrt(args.d)
    if not isinstance(alpha, QuadraticIrrational):
        raise InvalidInputError("approx needs a quadratic irrational alpha")
    approx = quad_field.smooth_approx(alpha, args.N, args.eps)
    out = {"alpha": str(alpha), "N": args.N, "eps": args.eps, "max_prime": approx.max_prime, **approx.to_dict()}
    row = {**out, "factorization": _fmt_factorization(approx.factorization)}
    header = ["alpha", "N", "eps", "a", "q", "err_bound", "factorization", "max_prime", "smoothness_exponent", "pell_index", "m", "certified"]
    return {"json": out, "csv": (header, [row])}, EXIT_OK


def cmd_sum(args, cfg: Config):
    alpha = parse_alpha(args.alpha)
    val = weyl_sums.weyl_sum(alpha, args.N, max_n=cfg.max_n)
    out = {"alpha": _alpha_str(alpha), "N": args.N, **val.to_dict()}
    return {"json": out, "csv": (["alpha", "N", "re", "im", "abs", "err"], [out])}, EXIT_OK


def cmd_spectrum(args, cfg: Config):
    if args.q < 1:
        raise InvalidInputError("q must be positive")
    spec = exp_sums.complete_cubic_spectrum(args.a, args.q, cfg.max_q)
    vals = spec.values.astype(complex)
    rows = [{"h": h, "re": float(z.real), "im": float(z.imag), "abs": float(abs(z))} for h, z in enumerate(vals)]
    out = {"a": args.a % args.q, "q": args.q, "err": spec.err, "values": rows}
    return {"json": out, "csv": (["h", "re", "im", "abs"], rows)}, EXIT_OK


def cmd_split(args, cfg: Config):
    if args.q < 1:
        raise InvalidInputError("q must be positive")
    split = factor_plan.split_q(arith.factorint(args.q), args.N)
    rhs = factor_plan.genthm_rhs(split, args.delta, args.eps, args.C)
    out = {**split.to_dict(), "delta": args.delta, "eps": args.eps, "C": args.C, "rhs": rhs}
    return {"json": out, "csv": _kv_rows(out)}, EXIT_OK


def cmd_verify(args, cfg: Config):
    bounds = dict(_parse_bound(b) for b in args.bound or [])
    if args.trials < 0:
        raise InvalidInputError("trials must be nonnegative")
    report = harness.run_suite(args.suite, args.trials, cfg.seed, bounds)
    rows = report.records
    code = EXIT_OK if report.passed else EXIT_SUITE_FAILED
    return {"json": report.to_dict(), "csv": (["trial", "lhs", "rhs", "ratio"], rows)}, code


def cmd_trace(args, cfg: Config):
    split = factor_plan.split_q(arith.factorint(args.q), args.N)
    trace = harness.iteration_trace(split, args.a, max_q=min(cfg.max_q, args.trace_limit))
    ok = trace["cs_first_ok"] and trace["cs_second_ok"]
    code = EXIT_OK if ok else EXIT_SUITE_FAILED
    return {"json": trace, "csv": _kv_rows(trace)}, code


def cmd_scan(args, cfg: Config):
    alpha = parse_alpha(args.alpha)
    records = harness.exponent_scan(alpha, args.n_min, args.n_max, args.eps, max_n=cfg.max_n)
    rows = [r.to_dict() for r in records]
    out = {"alpha": _alpha_str(alpha), "eps": args.eps, "records": rows, "slope": rows[-1]["slope"]}
    return {"json": out, "csv": (["N", "abs_sum", "running_sup", "slope"], rows)}, EXIT_OK


def cmd_abc(args, cfg: Config):
    if args.n_max < 1:
        raise InvalidInputError("n-max must be positive")
    rows = harness.abc_quality(args.d, args.n_max)
    return {"json": {"d": args.d, "rows": rows}, "csv": (["n", "v", "v0", "exponent"], rows)}, EXIT_OK


def _global_flags(parser: argparse.ArgumentParser):
    # SUPPRESS lets the flags appear before or after the subcommand
    g = parser.add_argument_group("global options")
    g.add_argument("--out", default=argparse.SUPPRESS, help="write the report here instead of stdout")
    g.add_argument("--format", dest="fmt", choices=FORMATS, default=argparse.SUPPRESS, help="report format (default json)")
    g.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="seed for randomized suites (default 0)")
    g.add_argument("--max-q", type=int, default=argparse.SUPPRESS, help="largest modulus for spectra")
    g.add_argument("--max-n", type=int, default=argparse.SUPPRESS, help="largest Weyl sum length")
    g.add_argument("-v", "--verbose", action="count", default=argparse.SUPPRESS)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cubic-weyl", description="Cubic Weyl sums, complete sums and smooth rational approximations.")
    _global_flags(parser)
    sub = parser.add_subparsers(dest="command", metavar="command", parser_class=_Parser)
    sub.required = True

    def add(name, fn, help_text):
        p = sub.add_parser(name, help=help_text, description=help_text)
        _global_flags(p)
        p.set_defaults(func=fn)
        return p

    p = add("approx", cmd_approx, "smooth-denominator rational approximation of a quadratic irrational")
    who = p.add_mutually_exclusive_group(required=True)
    who.add_argument("--d", type=int, help="approximate sqrt(d)")
    who.add_argument("--alpha", help="sqrt:<d> or quad:<f>,<g>,<c>,<d>")
    p.add_argument("--N", type=int, required=True, help="denominator limit")
    p.add_argument("--eps", type=float, default=1.0, help="smoothness exponent target")

    p = add("sum", cmd_sum, "incomplete cubic Weyl sum S(alpha, N)")
    p.add_argument("--alpha", required=True)
    p.add_argument("--N", type=int, required=True)

    p = add("spectrum", cmd_spectrum, "complete sums S(a, h; q) for every h mod q")
    p.add_argument("--a", type=int, required=True)
    p.add_argument("--q", type=int, required=True)

    p = add("split", cmd_split, "split a denominator q into q1*q2*q3 for length N")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--delta", type=float, default=0.0, help="alpha - a/q for the bound")
    p.add_argument("--eps", type=float, default=0.0)
    p.add_argument("--C", type=float, default=1.0)

    p = add("verify", cmd_verify, "run a seeded verification suite")
    p.add_argument("--suite", required=True, choices=sorted(harness.SUITES))
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--bound", action="append", metavar="KEY=VALUE", help="override a suite size bound (repeatable)")

    p = add("trace", cmd_trace, "full inequality-chain trace for a small split")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--a", type=int, default=1)
    p.add_argument("--trace-limit", type=int, default=10_000, help="largest q traced")

    p = add("scan", cmd_scan, "|S(alpha, N)| and its running sup at powers of two")
    p.add_argument("--alpha", required=True)
    p.add_argument("--n-min", type=int, default=1 << 10)
    p.add_argument("--n-max", type=int, default=1 << 17)
    p.add_argument("--eps", type=float, default=1.0)

    p = add("abc", cmd_abc, "powerful part of Pell denominators")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--n-max", type=int, default=30)
    return parser


def dispatch(argv: list[str] | None = None) -> int:
    """Parse ``argv``, run the subcommand, write its report; returns the exit code."""
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _Usage as exc:
        print(parser.format_usage().rstrip(), file=sys.stderr)
        print(exc, file=sys.stderr)
        return EXIT_INVALID
    if getattr(args, "verbose", 0):
        logging.basicConfig(level=logging.DEBUG if args.verbose > 1 else logging.INFO, stream=sys.stderr)
    try:
        cfg = Config(
            max_n=getattr(args, "max_n", Config.max_n),
            max_q=getattr(args, "max_q", Config.max_q),
            seed=getattr(args, "seed", Config.seed),
            fmt=getattr(args, "fmt", Config.fmt),
            out=getattr(args, "out", None),
        )
        payload, code = args.func(args, cfg)
        text = render(payload, cfg.fmt)
    except (InvalidInputError, InfeasibleSplitError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (ResourceError, FactorizationError, MemoryError) as exc:
        print(f"resource error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (ConsistencyError, CubicWeylError) as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
        sys.stdout.flush()
    return code


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
