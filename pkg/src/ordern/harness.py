"""Iteration driver, order and error-constant measurement, corpus benchmarks."""

from __future__ import annotations

import csv
import io
import json
import math
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from decimal import Decimal
from importlib import resources
from pathlib import Path
from typing import Sequence

from . import expr as _expr
from .class1 import MethodPlan, canonical_poly, inverse_nth_derivative_at_root, named_method, step_class1
from .class2 import ESCAPE_BOUND, Class2Plan, class2_plan, kfn_step
from .errors import (DerivativeNearZero, EmptyMethods, InsufficientSamples, OrdernError, UnknownMethod,
                     UnsupportedMethod)
from .numeric import PrecisionContext, default_digits, verification_digits

NAME_PATTERN = re.compile(r"^[A-Za-z0-9_:.-]+$")
PRE_ASYMPTOTIC = 1e-4  # samples with e_m above this are discarded
FLOOR_MARGIN = 12  # ... and those with e_{m+1} below 10^(-digits + FLOOR_MARGIN)
SUPERCONVERGENCE_MARGIN = 0.5

REPORT_FIELDS = ("case", "method", "declared_order", "p_hat", "K_measured", "K_predicted", "iters", "d",
                 "mul", "div", "addsub", "scale", "eff_index_d", "eff_index_ops", "status")


def resolve_method(method) -> MethodPlan | Class2Plan:
    if isinstance(method, (MethodPlan, Class2Plan)):
        return method
    key = str(method).strip().lower()
    if key.startswith("class2:"):
        tail = key.split(":", 1)[1]
        if not tail.isdigit() or int(tail) < 2:
            raise UnknownMethod(f"{method}: class2 order must be an integer >= 2")
        return class2_plan(int(tail))
    return named_method(key)


def step(plan, f, x, ctx: PrecisionContext, bound=ESCAPE_BOUND):
    if isinstance(plan, Class2Plan):
        return kfn_step(f, x, plan.order, ctx, bound)
    return step_class1(plan, f, x, ctx)


def run_digits(plan) -> int:
    """Default precision for order measurements of ``plan``."""
    digits = verification_digits(plan.order)
    return 2 * digits if isinstance(plan, Class2Plan) else digits


# ---------------------------------------------------------------------------
# iteration

@dataclass(frozen=True)
class StopReason:
    name: str  # ResidualTol | StepTol | MaxIter | Diverged | Error
    kind: str | None = None
    message: str | None = None

    def __str__(self):
        return f"Error({self.kind})" if self.name == "Error" else self.name


@dataclass
class Trace:
    method: str
    iterates: list
    residuals: list
    stop_reason: StopReason
    ctx: PrecisionContext = field(repr=False)
    errors: list | None = None

    @property
    def steps(self) -> int:
        return len(self.iterates) - 1

    @property
    def last(self):
        return self.iterates[-1]


def iterate(method, f, x0, *, tol=None, max_iter: int = 50, ctx: PrecisionContext | None = None,
            root=None, bound=ESCAPE_BOUND) -> Trace:
    """Run ``x_{m+1} = h(x_m)`` until a stopping rule fires.

    Rules are checked in the order residual, step, escape, iteration cap.
    Step failures end the trace with ``Error(kind)``; nothing is raised."""
    plan = resolve_method(method)
    ctx = ctx or PrecisionContext(default_digits())
    f = _expr.as_expr(f)
    tol = ctx.tenpow(-(ctx.digits // 2)) if tol is None else ctx.real(tol)
    if not tol > 0:
        raise ValueError("tol must be positive")
    if max_iter < 1:
        raise ValueError("max_iter must be at least 1")
    limit = ctx.real(bound)
    ref = None if root is None else ctx.real(root)

    x = ctx.real(x0)
    iterates, residuals = [x], []
    reason = None
    try:
        residuals.append(abs(_expr.evaluate(f, x, ctx)))
    except OrdernError as exc:
        residuals.append(ctx.mp.nan)
        reason = StopReason("Error", exc.kind, str(exc))
    if reason is None and residuals[-1] < tol:
        reason = StopReason("ResidualTol")
    while reason is None:
        if len(iterates) > max_iter:
            reason = StopReason("MaxIter")
            break
        try:
            nxt = step(plan, f, x, ctx, bound)
        except OrdernError as exc:
            reason = StopReason("Error", exc.kind, str(exc))
            break
        except (ZeroDivisionError, ArithmeticError, ValueError) as exc:
            reason = StopReason("Error", type(exc).__name__, str(exc))
            break
        if not ctx.mp.isfinite(nxt) or abs(nxt) > limit:
            iterates.append(nxt)
            residuals.append(ctx.mp.nan)
            reason = StopReason("Diverged")
            break
        iterates.append(nxt)
        try:
            residuals.append(abs(_expr.evaluate(f, nxt, ctx)))
        except OrdernError as exc:
            residuals.append(ctx.mp.nan)
            reason = StopReason("Error", exc.kind, str(exc))
            break
        if residuals[-1] < tol:
            reason = StopReason("ResidualTol")
        elif abs(nxt - x) < tol:
            reason = StopReason("StepTol")
        x = nxt
    errors = None if ref is None else [abs(v - ref) for v in iterates]
    name = getattr(plan, "name", str(method))
    return Trace(name, iterates, residuals, reason, ctx, errors)


# ---------------------------------------------------------------------------
# order estimation

@dataclass(frozen=True)
class OrderEstimate:
    p_hat: object
    p_sequence: tuple
    K_measured: object
    K_predicted: object = None
    samples_used: int = 0
    superconvergent: bool = False
    method: str = "three_point"
    log_ratio_sequence: tuple = ()


MIN_PAIRS = 2


def _usable(errors, ctx: PrecisionContext):
    """Indices m whose pair (e_m, e_{m+1}) lies in the asymptotic window."""
    floor = ctx.tenpow(-ctx.digits + FLOOR_MARGIN)
    out = []
    for m in range(len(errors) - 1):
        a, b = errors[m], errors[m + 1]
        if 0 < b < a <= PRE_ASYMPTOTIC and b > floor:
            out.append(m)
    return out


def estimate_order(trace: Trace, root=None, declared_n: int | None = None, ctx: PrecisionContext | None = None,
                   predicted=None) -> OrderEstimate:
    """Computational order of convergence against a known root.

    For each pair (e_m, e_{m+1}) in the asymptotic window the estimate is
    ``ln(e_{m+1}/e_m) / ln(e_m/e_{m-1})``, which is exact whenever
    ``e_{k+1} = K e_k^p`` holds exactly; the plain ``ln e_{m+1} / ln e_m``
    values (biased by ``ln K / ln e_m``) are kept in ``log_ratio_sequence``.
    The last pair gives ``p_hat`` and ``K_measured = e_{m+1} / e_m^n``."""
    ctx = ctx or trace.ctx
    mp = ctx.mp
    if root is not None:
        ref = ctx.real(root)
        errors = [abs(v - ref) for v in trace.iterates]
    elif trace.errors is not None:
        errors = trace.errors
    else:
        raise InsufficientSamples("no reference root; use estimate_order_from_differences")
    idx = _usable(errors, ctx)
    if len(idx) < MIN_PAIRS:
        raise InsufficientSamples(f"{len(idx)} error pair(s) inside the asymptotic window "
                                  f"(e_m <= {PRE_ASYMPTOTIC}, e_m+1 > 1e{-ctx.digits + FLOOR_MARGIN}); "
                                  f"need {MIN_PAIRS}")
    seq = tuple(mp.log(errors[m + 1] / errors[m]) / mp.log(errors[m] / errors[m - 1])
                for m in idx if m > 0)
    logs = tuple(mp.log(errors[m + 1]) / mp.log(errors[m]) for m in idx)
    m = idx[-1]
    p_hat = seq[-1]
    n = declared_n if declared_n is not None else round(float(p_hat))
    k_meas = errors[m + 1] / errors[m] ** n
    return OrderEstimate(p_hat, seq, k_meas, predicted, len(idx),
                         p_hat > n + SUPERCONVERGENCE_MARGIN, "three_point", logs)


def estimate_order_from_differences(trace: Trace, declared_n: int | None = None) -> OrderEstimate:
    """Root-free estimate rho_m = ln(|dx_{m+1}|/|dx_m|) / ln(|dx_m|/|dx_{m-1}|).

    Noisier than :func:`estimate_order`; informational only."""
    ctx = trace.ctx
    mp = ctx.mp
    xs = trace.iterates
    dx = [abs(xs[i + 1] - xs[i]) for i in range(len(xs) - 1)]
    floor = ctx.tenpow(-ctx.digits + FLOOR_MARGIN)
    seq = []
    for m in range(1, len(dx) - 1):
        a, b, c = dx[m - 1], dx[m], dx[m + 1]
        if c > floor and 0 < c < b < a and b <= PRE_ASYMPTOTIC:
            seq.append(mp.log(c / b) / mp.log(b / a))
    if not seq:
        raise InsufficientSamples("not enough shrinking steps for a difference-based estimate")
    p_hat = seq[-1]
    n = declared_n if declared_n is not None else round(float(p_hat))
    return OrderEstimate(p_hat, tuple(seq), None, None, len(seq) + 2,
                         p_hat > n + SUPERCONVERGENCE_MARGIN, "differences")


# ---------------------------------------------------------------------------
# predicted constants

def class2_gprime_exponent(n: int, variant: str = "sum") -> int:
    """``sum``: n(n-1)/2 from the orbit products; ``triangular``: n(n+1)/2."""
    if variant == "sum":
        return n * (n - 1) // 2
    if variant == "triangular":
        return n * (n + 1) // 2
    raise ValueError(f"unknown exponent variant {variant!r}")


def predicted_constant(method, f, root, ctx: PrecisionContext, variant: str = "sum"):
    """Asymptotic constant ``lim e_{m+1}/e_m^n`` for canonical and Class II
    methods (rational variants are not covered)."""
    plan = resolve_method(method)
    f = _expr.as_expr(f)
    s = ctx.real(root)
    n = plan.order
    if isinstance(plan, Class2Plan):
        gexp = class2_gprime_exponent(n, variant)
    elif plan.family == "canonical" and plan.source == canonical_poly(n):
        gexp = 0
    else:
        raise UnsupportedMethod(f"no closed-form constant for {plan.name}")
    fp = _expr.derivative_values(f, s, 1, ctx)[1]
    if abs(fp) <= ctx.tenpow(-(ctx.digits // 2)):
        raise DerivativeNearZero("|f'(s)| is below half precision")
    inv = inverse_nth_derivative_at_root(f, s, n, ctx)
    k = abs(inv) / math.factorial(n) * abs(fp) ** n
    if gexp:
        k *= abs(1 + fp) ** gexp
    return k


def supports_prediction(method) -> bool:
    plan = resolve_method(method)
    return isinstance(plan, Class2Plan) or (plan.family == "canonical" and plan.source == canonical_poly(plan.order))


# ---------------------------------------------------------------------------
# efficiency

@dataclass(frozen=True)
class EfficiencyReport:
    method: str | None
    order: object
    d: object
    t_model: str  # eval_count | combinatorial_ops
    index: object
    informational: object


_EFF = PrecisionContext(40)


def efficiency(p, t, *, method: str | None = None, t_model: str = "eval_count") -> EfficiencyReport:
    """Efficiency index ``p^(1/t)`` and informational efficiency ``p/t``.

    Computed at 40 digits from the exact inputs (ints, Fractions, floats or
    decimal strings), so ``E(p, t) == E(p^k, k t)`` holds to rounding of the
    result rather than rounding of ``1/t``."""
    pr, tr = _EFF.real(p), _EFF.real(t)
    if not pr > 1:
        raise ValueError("order must exceed 1")
    if not tr > 0:
        raise ValueError("cost must be positive")
    mp = _EFF.mp
    return EfficiencyReport(method, pr, tr, t_model, mp.exp(mp.log(pr) / tr), pr / tr)


# ---------------------------------------------------------------------------
# corpus

@dataclass(frozen=True)
class CorpusCase:
    name: str
    f: str
    x0: str
    root: str | None = None
    digits: int | None = None

    def __post_init__(self):
        if not NAME_PATTERN.match(self.name):
            raise ValueError(f"case name {self.name!r} must match {NAME_PATTERN.pattern}")

    @classmethod
    def from_dict(cls, data: dict) -> "CorpusCase":
        extra = set(data) - {"name", "f", "x0", "root", "digits"}
        if extra:
            raise ValueError(f"unknown corpus fields: {', '.join(sorted(extra))}")
        root = data.get("root")
        digits = data.get("digits")
        return cls(str(data["name"]), str(data["f"]), str(data["x0"]),
                   None if root is None else str(root), None if digits is None else int(digits))

    def as_dict(self) -> dict:
        return {"name": self.name, "f": self.f, "x0": self.x0, "root": self.root, "digits": self.digits}


def load_corpus(path: str | Path | None = None) -> list:
    """Read a corpus JSON array; the bundled default when ``path`` is None."""
    if path is None:
        text = resources.files("ordern").joinpath("data/corpus.json").read_text()
    else:
        text = Path(path).read_text()
    data = json.loads(text)
    if not isinstance(data, list):
        raise ValueError("corpus file must hold a JSON array")
    return [CorpusCase.from_dict(item) for item in data]


def reference_root(case: CorpusCase, ctx: PrecisionContext):
    """The case root at ``ctx`` precision, polished when the stored decimal
    is shorter than the working precision."""
    if case.root is None:
        return None
    f = _expr.parse(case.f)
    stored = ctx.real(case.root)
    r = stored
    if ctx.digits > _significant_digits(case.root) - 4:
        r = ctx.mp.findroot(lambda t: _expr.evaluate(f, t, ctx), stored,
                            tol=ctx.tenpow(-2 * ctx.digits))
        # the polished root must still round to the stored decimal, give or take its last digit
        unit = ctx.tenpow(Decimal(case.root.strip()).as_tuple().exponent)
        if abs(r - stored) > unit:
            raise ValueError(f"{case.name}: stored root {case.root} is off by more than {ctx.format(unit, 3)}")
    resid = abs(_expr.evaluate(f, r, ctx))
    if resid > ctx.tenpow(-ctx.digits + 8):
        raise ValueError(f"{case.name}: |f(root)| = {ctx.format(resid, 5)} exceeds 1e{-ctx.digits + 8}")
    return r


def _significant_digits(text: str) -> int:
    mantissa = re.split(r"[eE]", text.strip())[0]
    return len(mantissa.lstrip("+-").replace(".", "").lstrip("0"))


# ---------------------------------------------------------------------------
# benchmark

@dataclass(frozen=True)
class BenchOptions:
    digits: int | None = None
    tol: object = None
    max_iter: int = 50
    workers: int | None = None


def _fmt(ctx, x, digits=10) -> str:
    return "" if x is None else ctx.mp.nstr(x, digits, strip_zeros=False)


MAX_ESCALATIONS = 3


@dataclass
class Measurement:
    plan: object
    digits: int
    trace: Trace | None = None
    estimate: OrderEstimate | None = None
    status: str = "ok"


def measure_case(case: CorpusCase, method, *, digits: int | None = None, tol=None, max_iter: int = 50,
                 x0=None) -> Measurement:
    """Iterate ``method`` on ``case`` and estimate its order.

    Without an explicit precision the run starts at :func:`run_digits` and
    doubles (up to MAX_ESCALATIONS times) while the asymptotic window holds
    fewer than MIN_PAIRS error pairs."""
    plan = resolve_method(method)
    fixed = digits or case.digits
    work = fixed or run_digits(plan)
    start = case.x0 if x0 is None else x0
    for attempt in range(MAX_ESCALATIONS + 1):
        ctx = PrecisionContext(work)
        out = Measurement(plan, work)
        try:
            root = reference_root(case, ctx)
            run_tol = tol if tol is not None else ctx.tenpow(-work + 2)
            trace = iterate(plan, case.f, start, tol=run_tol, max_iter=max_iter, ctx=ctx, root=root)
            out.trace = trace
            if trace.stop_reason.name in ("Diverged", "Error", "MaxIter") and not _converged(trace, root):
                out.status = str(trace.stop_reason)
                return out
            if root is None:
                out.estimate = estimate_order_from_differences(trace, plan.order)
            else:
                pred = predicted_constant(plan, case.f, root, ctx) if supports_prediction(plan) else None
                out.estimate = estimate_order(trace, root, plan.order, ctx, predicted=pred)
            out.status = "superconvergent" if out.estimate.superconvergent else "ok"
            return out
        except InsufficientSamples as exc:
            out.status = f"Error({exc.kind})"
            if fixed or attempt == MAX_ESCALATIONS:
                return out
            work *= 2
        except OrdernError as exc:
            out.status = f"Error({exc.kind})"
            return out
        except (ArithmeticError, ValueError) as exc:
            out.status = f"Error({type(exc).__name__})"
            return out
    return out  # pragma: no cover


def measure(case: CorpusCase, method, opts: BenchOptions = BenchOptions()) -> dict:
    """One report row; failures land in the status column."""
    row = dict.fromkeys(REPORT_FIELDS, "")
    row["case"] = case.name
    try:
        plan = resolve_method(method)
    except OrdernError as exc:
        row.update(method=str(method), status=f"Error({exc.kind})")
        return row
    cost = plan.cost
    row.update(method=plan.name, declared_order=str(plan.order), d=str(plan.evals), mul=str(cost.mul),
               div=str(cost.div), addsub=str(cost.addsub), scale=str(cost.int_scale))
    row["eff_index_d"] = f"{float(efficiency(plan.order, plan.evals).index):.6f}"
    if cost.ops() > 0:
        row["eff_index_ops"] = f"{float(efficiency(plan.order, cost.ops()).index):.6f}"
    res = measure_case(case, plan, digits=opts.digits, tol=opts.tol, max_iter=opts.max_iter)
    if res.trace is not None:
        row["iters"] = str(res.trace.steps)
    est = res.estimate
    if est is not None:
        ctx = res.trace.ctx
        row["p_hat"] = _fmt(ctx, est.p_hat, 6)
        row["K_measured"] = _fmt(ctx, est.K_measured, 8)
        row["K_predicted"] = _fmt(ctx, est.K_predicted, 8)
    row["status"] = res.status
    return row


def _converged(trace: Trace, root) -> bool:
    if root is None or trace.errors is None:
        return False
    return trace.errors[-1] < trace.ctx.tenpow(-(trace.ctx.digits // 2))


def run_benchmark(corpus: Sequence[CorpusCase], methods: Sequence, opts: BenchOptions = BenchOptions()) -> list:
    """Rows for every (case, method) pair in corpus order."""
    if not methods:
        raise EmptyMethods("at least one method is required")
    if not corpus:
        raise ValueError("corpus is empty")
    jobs = [(case, m) for case in corpus for m in methods]
    if opts.workers and opts.workers > 1:
        with ThreadPoolExecutor(max_workers=opts.workers) as pool:
            return list(pool.map(lambda job: measure(job[0], job[1], opts), jobs))
    return [measure(case, m, opts) for case, m in jobs]


def report_csv(rows: Sequence[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=REPORT_FIELDS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
    return buf.getvalue()


def report_json(rows: Sequence[dict]) -> str:
    return json.dumps([dict(r) for r in rows], indent=2) + "\n"
