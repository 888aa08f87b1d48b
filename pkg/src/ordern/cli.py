"""``ordern`` command line: gen, solve, coc, bench, verify.

Exit status: 0 success, 1 usage error, 2 a run or check failed.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import os
import sys

from . import __version__
from . import expr as _expr
from .class1 import canonical_poly, compile_horner, halley_denominator, named_method
from .class2 import q_poly, r_factors
from .errors import InsufficientSamples, OrdernError, ParseError, UnknownMethod
from .harness import (BenchOptions, CorpusCase, estimate_order, estimate_order_from_differences, iterate,
                      load_corpus, predicted_constant, reference_root, report_csv, report_json,
                      resolve_method, run_benchmark, supports_prediction)
from .numeric import MIN_DIGITS, PrecisionContext, default_digits

EXIT_OK, EXIT_USAGE, EXIT_FAILED = 0, 1, 2

GRAMMAR = {
    "--f": "formula: expr := term (('+'|'-') term)*; term := factor (('*'|'/') factor)*; "
           "factor := ('-'|'+') factor | base ['^' int]; base := number | x | fn '(' expr ')' | '(' expr ')'; "
           "fn := sin|cos|tan|exp|log|sqrt|atan|sinh|cosh",
    "--method": "method: newton | chebyshev | halley | m1 | m2 | m3 | ostrowski | canonical:N (N >= 2) "
                "| halley_type:N (N >= 3) | class2:N (N >= 2)",
    "--methods": "methods: comma-separated list of --method names, e.g. newton,halley,class2:3",
    "--digits": f"digits: integer >= {MIN_DIGITS}",
    "--tol": "tol: positive decimal, e.g. 1e-40",
    "--max-iter": "max-iter: integer >= 1",
    "--x0": "x0: decimal literal, e.g. 1.5 or -2e-1",
    "--root": "root: decimal literal (read at the run precision)",
    "--order": "order: integer 2..12 (class 1)",
    "--i": "i: integer 1..4 (class 2)",
    "--class": "class: 1 | 2",
    "--format": "format: csv | json",
    "--corpus": "corpus: path to a JSON array of {name, f, x0, root, digits}",
    "--only": "only: comma-separated criterion numbers or tags (symbolic, class1, class2, order, "
              "constants, costs, efficiency, oracle, robustness)",
}


class UsageError(Exception):
    def __init__(self, message: str, flag: str | None = None):
        self.flag = flag
        super().__init__(message)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        flag = next((f for f in GRAMMAR if f in message.split()), None) or \
            next((f for f in GRAMMAR if f + " " in message or f + ":" in message), None)
        raise UsageError(message, flag)


def _build_parser() -> argparse.ArgumentParser:
    top = _Parser(prog="ordern", description="Arbitrary-order root-finding methods.")
    top.add_argument("--version", action="version", version=f"ordern {__version__}")
    sub = top.add_subparsers(dest="command", parser_class=_Parser)

    def common(p, *, method=True):
        p.add_argument("--digits", type=int, default=None)
        p.add_argument("--tol", default=None)
        p.add_argument("--max-iter", type=int, default=50, dest="max_iter")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--stamp", action="store_true", help="prefix output with '#' metadata lines")
        if method:
            p.add_argument("--f", required=True, dest="f")
            p.add_argument("--x0", required=True)
            p.add_argument("--method", required=True)
            p.add_argument("--root", default=None)

    g = sub.add_parser("gen", help="print a generated method or Class II numerator")
    g.add_argument("--class", type=int, choices=(1, 2), required=True, dest="cls")
    g.add_argument("--order", type=int)
    g.add_argument("--i", type=int, dest="index")
    g.add_argument("--style", choices=("expanded", "horner"), default="expanded")
    g.add_argument("--family", choices=("canonical", "halley_type"), default="canonical")
    g.add_argument("--ascii", action="store_true", help="write Δ_i as D_i")
    g.add_argument("--stamp", action="store_true")

    common(sub.add_parser("solve", help="iterate and print the trace"))
    common(sub.add_parser("coc", help="estimate the order of convergence"))
    b = sub.add_parser("bench", help="corpus benchmark report")
    common(b, method=False)
    b.add_argument("--corpus", default=None)
    b.add_argument("--methods", required=True)
    b.add_argument("--workers", type=int, default=None)

    v = sub.add_parser("verify", help="run the acceptance suite")
    v.add_argument("--only", default=None)
    v.add_argument("--quiet", action="store_true", help="only the per-criterion lines")
    v.add_argument("--stamp", action="store_true")
    return top


# ---------------------------------------------------------------------------
# helpers

def _digits(args) -> int:
    digits = args.digits if args.digits is not None else default_digits()
    if digits < MIN_DIGITS:
        raise UsageError(f"--digits {digits} is below {MIN_DIGITS}", "--digits")
    return digits


def _formula(text: str):
    try:
        return _expr.parse(text)
    except ParseError as exc:
        raise UsageError(f"cannot parse --f {text!r}: {exc}", "--f") from None


def _decimal(ctx: PrecisionContext, text: str, flag: str):
    try:
        return ctx.real(text)
    except (ValueError, TypeError):
        raise UsageError(f"{flag} {text!r} is not a decimal", flag) from None


def _plan(name: str):
    try:
        return resolve_method(name)
    except UnknownMethod as exc:
        raise UsageError(str(exc), "--method") from None


def _tol(args, ctx):
    if args.tol is None:
        return None
    value = _decimal(ctx, args.tol, "--tol")
    if not value > 0:
        raise UsageError("--tol must be positive", "--tol")
    return value


def _stamp(out, args, **extra):
    if getattr(args, "stamp", False):
        now = _dt.datetime.now(_dt.timezone.utc).replace(microsecond=0).isoformat()
        out.write(f"# ordern {__version__} {args.command} at {now}\n")
        for k, v in extra.items():
            out.write(f"# {k}={v}\n")


def _csv_line(values) -> str:
    return ",".join("" if v is None else str(v) for v in values) + "\n"


# ---------------------------------------------------------------------------
# subcommands

def cmd_gen(args, out) -> int:
    _stamp(out, args)
    if args.cls == 1:
        n = args.order
        if n is None or not 2 <= n <= 12:
            raise UsageError(f"--order {n} outside 2..12", "--order")
        if args.family == "halley_type":
            if n < 3:
                raise UsageError("halley_type needs --order >= 3", "--order")
            plan = named_method(f"halley_type:{n}")
            if args.style == "horner":
                out.write(plan.text() + "\n" + plan.cost.line() + "\n")
            else:
                out.write(f"y1 + y2/({halley_denominator(n).to_text()})\n")
            return EXIT_OK
        p = canonical_poly(n)
        if args.style == "horner":
            plan = compile_horner(p, name=f"canonical:{n}", order=n)
            out.write(plan.text() + "\n" + plan.cost.line() + "\n")
        else:
            out.write(p.to_text() + "\n")
        return EXIT_OK
    i = args.index
    if i is None or not 1 <= i <= 4:
        raise UsageError(f"--i {i} outside 1..4", "--i")
    sym = "D" if args.ascii else "Δ"
    q = q_poly(i).to_text(unicode=not args.ascii)
    r = "*".join(f"({sym}{b}-{sym}{a})" for b, a in r_factors(i))
    out.write(f"Q{i} = {q} ; R{i} = {r}\n")
    return EXIT_OK


def _run(args):
    ctx = PrecisionContext(_digits(args))
    f = _formula(args.f)
    plan = _plan(args.method)
    x0 = _decimal(ctx, args.x0, "--x0")
    root = None
    if args.root is not None:
        _decimal(ctx, args.root, "--root")
        try:
            root = reference_root(CorpusCase("cli", args.f, args.x0, args.root), ctx)
        except ValueError as exc:
            raise UsageError(str(exc), "--root") from None
    if args.max_iter < 1:
        raise UsageError("--max-iter must be at least 1", "--max-iter")
    trace = iterate(plan, f, x0, tol=_tol(args, ctx), max_iter=args.max_iter, ctx=ctx, root=root)
    return ctx, plan, f, root, trace


def cmd_solve(args, out) -> int:
    ctx, plan, _, root, trace = _run(args)
    _stamp(out, args, digits=ctx.digits, method=plan.name)
    fmt = lambda v: ctx.format(v, ctx.digits)  # noqa: E731
    short = lambda v: ctx.format(v, 6)  # noqa: E731
    rows = []
    for m, x in enumerate(trace.iterates):
        err = short(trace.errors[m]) if trace.errors is not None else None
        status = str(trace.stop_reason) if m == trace.steps else None
        rows.append({"m": m, "x": fmt(x), "residual": short(trace.residuals[m]), "error": err, "status": status})
    if args.format == "json":
        doc = {"method": plan.name, "digits": ctx.digits, "stop_reason": str(trace.stop_reason),
               "message": trace.stop_reason.message, "iterates": rows}
        out.write(json.dumps(doc, indent=2) + "\n")
    else:
        out.write("m,x,residual,error,status\n")
        for r in rows:
            out.write(_csv_line(r.values()))
    return EXIT_OK if trace.stop_reason.name in ("ResidualTol", "StepTol") else EXIT_FAILED


def cmd_coc(args, out) -> int:
    ctx, plan, f, root, trace = _run(args)
    _stamp(out, args, digits=ctx.digits, method=plan.name)
    try:
        if root is None:
            est = estimate_order_from_differences(trace, plan.order)
        else:
            pred = predicted_constant(plan, f, root, ctx) if supports_prediction(plan) else None
            est = estimate_order(trace, root, plan.order, ctx, predicted=pred)
    except InsufficientSamples as exc:
        out.write(f"error,{exc.kind}: {exc}\n" if args.format == "csv"
                  else json.dumps({"method": plan.name, "error": exc.kind, "message": str(exc)}) + "\n")
        return EXIT_FAILED
    s = lambda v: "" if v is None else ctx.mp.nstr(v, 10, strip_zeros=False)  # noqa: E731
    doc = {"method": plan.name, "declared_order": plan.order, "p_hat": s(est.p_hat), "K_measured": s(est.K_measured),
           "K_predicted": s(est.K_predicted), "samples_used": est.samples_used, "estimator": est.method,
           "superconvergent": est.superconvergent, "iters": trace.steps, "stop_reason": str(trace.stop_reason),
           "p_sequence": [s(v) for v in est.p_sequence]}
    if args.format == "json":
        out.write(json.dumps(doc, indent=2) + "\n")
    else:
        out.write(",".join(k for k in doc) + "\n")
        vals = [";".join(v) if isinstance(v, list) else v for v in doc.values()]
        out.write(_csv_line(vals))
    return EXIT_OK


def cmd_bench(args, out) -> int:
    try:
        corpus = load_corpus(args.corpus)
    except (OSError, ValueError, KeyError) as exc:
        raise UsageError(f"cannot read --corpus: {exc}", "--corpus") from None
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    if not methods:
        raise UsageError("--methods is empty", "--methods")
    for m in methods:
        _plan(m)
    digits = _digits(args) if args.digits is not None else None
    tol = None
    if args.tol is not None:
        tol = _tol(args, PrecisionContext(digits or default_digits()))
    workers = args.workers if args.workers is not None else min(8, os.cpu_count() or 1)
    opts = BenchOptions(digits=digits, tol=args.tol if tol is not None else None, max_iter=args.max_iter,
                        workers=workers)
    rows = run_benchmark(corpus, methods, opts)
    _stamp(out, args, cases=len(corpus), methods=",".join(methods))
    out.write(report_json(rows) if args.format == "json" else report_csv(rows))
    return EXIT_OK if all(r["status"] in ("ok", "superconvergent") for r in rows) else EXIT_FAILED


def cmd_verify(args, out) -> int:
    from . import verify

    only = args.only.split(",") if args.only else None
    selected = verify.select(only)
    if not selected:
        raise UsageError(f"--only {args.only!r} matches no criterion", "--only")
    _stamp(out, args)
    outcomes = verify.run(only, emit=lambda line: out.write(line + "\n"), verbose=not args.quiet)
    failed = [o for o in outcomes if not o.passed]
    if failed:
        out.write(f"first failing criterion: [{failed[0].number}] {failed[0].title}\n")
        return EXIT_FAILED
    out.write(f"all {len(outcomes)} criteria passed\n")
    return EXIT_OK


COMMANDS = {"gen": cmd_gen, "solve": cmd_solve, "coc": cmd_coc, "bench": cmd_bench, "verify": cmd_verify}


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a subcommand is required: gen, solve, coc, bench, verify")
        return COMMANDS[args.command](args, out)
    except UsageError as exc:
        err.write(f"ordern: usage error: {exc}\n")
        if exc.flag in GRAMMAR:
            err.write(f"  {GRAMMAR[exc.flag]}\n")
        return EXIT_USAGE
    except OrdernError as exc:
        err.write(f"ordern: {exc.kind}: {exc}\n")
        return EXIT_FAILED


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
