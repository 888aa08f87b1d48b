"""Reproduction suite: eleven acceptance checks over the generators, the
numeric engines and the harness. ``run()`` prints one verdict per check."""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable

from . import expr as _expr
from . import golden
from .algebra import DELTA, Y, VarId, parse_poly
from .class1 import (METHOD_NAMES, Y2, canonical_poly, halley_denominator, named_method, series_in_y2,
                     step_class1, y2_valuation, y_variables)
from .class2 import divided_difference_exact, kfn_step, q_poly, r_poly, steffensen_direct
from .errors import DegenerateNodes, OrbitEscape
from .harness import (CorpusCase, efficiency, iterate, load_corpus, measure_case, predicted_constant,
                      reference_root, resolve_method)
from .numeric import PrecisionContext

LOCAL_OFFSET = "0.01"  # distance from the root for re-measuring escaped Class II orbits
ORDER_TOL = 0.05
K_BAND = (0.99, 1.01)


@dataclass
class Criterion:
    number: int
    title: str
    tags: frozenset
    budget: float  # seconds
    func: Callable


@dataclass
class Outcome:
    number: int
    title: str
    checks: list = field(default_factory=list)  # (ok, text)
    elapsed: float = 0.0
    budget: float = 0.0
    error: str | None = None

    @property
    def passed(self) -> bool:
        return self.error is None and bool(self.checks) and all(ok for ok, _ in self.checks) \
            and self.elapsed < self.budget

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        good = sum(1 for ok, _ in self.checks if ok)
        extra = f"; {self.error}" if self.error else ""
        slow = "" if self.elapsed < self.budget else f"; over budget {self.budget:.0f}s"
        return (f"{verdict} [{self.number}] {self.title} ({good}/{len(self.checks)} checks, "
                f"{self.elapsed:.2f}s{slow}{extra})")


_REGISTRY: list = []


def criterion(number, title, tags, budget):
    def deco(fn):
        _REGISTRY.append(Criterion(number, title, frozenset(tags), budget, fn))
        return fn
    return deco


# ---------------------------------------------------------------------------
# symbolic

@criterion(1, "canonical polynomials n=2..7 equal the displayed expansions", {"class1", "symbolic"}, 1)
def _canonical_golden():
    checks = []
    for n in range(2, 8):
        ok = canonical_poly(n) == golden.canonical(n)
        checks.append((ok, f"P^{n} term-for-term"))
    checks.append((canonical_poly(2).to_text() == golden.NEWTON, f"P^2 prints as {golden.NEWTON}"))
    checks.append((canonical_poly(3).to_text() == golden.CHEBYSHEV, f"P^3 prints as {golden.CHEBYSHEV}"))
    lead = [canonical_poly(7).coefficients_in(Y2)[k] for k in range(2, 7)]
    y3 = VarId(Y, 3)
    catalan = [-c.coefficients_in(y3)[-1].constant_term() for c in lead]
    checks.append((catalan == [1, 2, 5, 14, 42], f"leading y3 coefficients {catalan}"))
    return checks


@criterion(2, "P^n integer coefficients, degree 2n-3, y2-degree n-1 (n=2..10)", {"class1", "symbolic"}, 5)
def _canonical_structure():
    checks = []
    for n in range(2, 11):
        p = canonical_poly(n)
        ok = p.has_integer_coefficients() and p.degree() == 2 * n - 3 and p.degree_in(Y2) == n - 1
        checks.append((ok, f"n={n}: degree {p.degree()}, y2-degree {p.degree_in(Y2)}, {len(p.terms)} terms"))
    return checks


@criterion(3, "Halley-type denominators and y2-valuation", {"class1", "symbolic"}, 5)
def _halley_type():
    checks = []
    for n in range(3, 7):
        checks.append((halley_denominator(n) == golden.halley_denominator(n), f"R^{n} equals display"))
    for n in range(3, 9):
        v = y2_valuation((parse_poly("y2"), halley_denominator(n)), n, canonical_poly(n))
        checks.append((v >= n, f"n={n}: valuation of (y1 + y2/R^n) - P^n is {v}"))
    return checks


def _random_nodes(rng: random.Random, count: int) -> list:
    seen = set()
    while len(seen) < count:
        seen.add(Fraction(rng.randint(-40, 40), rng.randint(1, 9)))
    vals = list(seen)
    rng.shuffle(vals)
    return vals


@criterion(4, "Class II Q_i, R_i equal the displays and Q_i/R_i = (-1)^i D_0..i", {"class2", "symbolic"}, 5)
def _class2_golden():
    checks = []
    rng = random.Random(20240601)
    for i in range(1, 5):
        q, r = q_poly(i), r_poly(i)
        checks.append((q == golden.class2_q(i), f"Q{i} equals display ({len(q.terms)} terms)"))
        checks.append((r == golden.class2_r(i), f"R{i} equals display"))
        gq, gr = golden.class2_q(i), golden.class2_r(i)
        good = 0
        for _ in range(20):
            nodes = _random_nodes(rng, i + 1)
            assign = {VarId(DELTA, k): v for k, v in enumerate(nodes)}
            lhs = gq.evaluate(assign) / gr.evaluate(assign)
            x0s = [Fraction(rng.randint(-99, 99), rng.randint(1, 7)) for _ in range(2)]
            tops = [divided_difference_exact(nodes, x0) for x0 in x0s]
            if all(lhs == (-1) ** i * t for t in tops):
                good += 1
        checks.append((good == 20, f"i={i}: {good}/20 exact evaluations agree, x0-free"))
    return checks


@criterion(5, "Horner schedules reproduce the published operation counts", {"class1", "costs"}, 1)
def _operation_counts():
    checks = []
    for name, want in golden.OPERATION_COUNTS.items():
        plan = resolve_method(name)
        got = plan.cost.as_dict()
        ok = all(got[k] == v for k, v in want.items()) and plan.decompiles()
        checks.append((ok, f"{name}: {plan.cost.line()}  [{plan.text()}]"))
    return checks


# ---------------------------------------------------------------------------
# numeric

CLASS1_FIXED = ("halley", "m1", "m2", "m3", "ostrowski", "halley_type:3", "halley_type:4", "halley_type:5")


def _leading_error_vanishes(plan, case: CorpusCase, root) -> bool:
    """For a flagged superconvergent row: the y2^n coefficient of the
    method's expansion minus P^(n+1) is zero at the root's y-values."""
    n = plan.order
    src = plan.source
    expansion = (parse_poly("y1") + series_in_y2(*src, n)) if isinstance(src, tuple) else src
    coeff = (expansion - canonical_poly(n + 1)).truncate_in(Y2, n).coefficients_in(Y2)
    if len(coeff) <= n:
        return True
    ctx = PrecisionContext(64)
    s = ctx.real(root)
    coeffs = _expr.taylor_coefficients(_expr.parse(case.f), s, n, ctx)
    values = y_variables(coeffs, n + 1, ctx, s)
    return abs(coeff[n].evaluate(values, convert=ctx.real)) < ctx.tenpow(-30)


def _order_check(case, method, *, x0=None, note=""):
    res = measure_case(case, method, x0=x0)
    plan = res.plan
    est = res.estimate
    if est is None:
        return res, (False, f"{case.name} {plan.name}: {res.status}{note}")
    p = float(est.p_hat)
    if est.superconvergent:
        ok = plan.family != "class2" and _leading_error_vanishes(plan, case, case.root)
        return res, (ok, f"{case.name} {plan.name}: p_hat={p:.4f} superconvergent (declared {plan.order}; "
                         f"leading error term vanishes: {ok}) at {res.digits} digits{note}")
    ok = abs(p - plan.order) <= ORDER_TOL
    return res, (ok, f"{case.name} {plan.name}: p_hat={p:.4f} at {res.digits} digits{note}")


@criterion(6, "Class I empirical orders on the corpus", {"class1", "order"}, 60)
def _class1_orders():
    checks = []
    for case in load_corpus():
        for method in [f"canonical:{n}" for n in range(2, 7)] + list(CLASS1_FIXED):
            checks.append(_order_check(case, method)[1])
    return checks


def local_start(case: CorpusCase, ctx: PrecisionContext, offset: str = LOCAL_OFFSET) -> str:
    """A start ``offset`` away from the root, on the side of the corpus x0."""
    s = reference_root(case, ctx)
    x0 = ctx.real(case.x0)
    return ctx.mp.nstr(s + ctx.real(offset) * ctx.mp.sign(x0 - s), ctx.digits)


def _gprime(case, ctx):
    s = reference_root(case, ctx)
    return 1 + _expr.derivative_values(_expr.parse(case.f), s, 1, ctx)[1]


def _class2_measure(case, n):
    """Measure from the corpus x0; an escaped or degenerate orbit is
    reported and re-measured from a local start."""
    res = measure_case(case, f"class2:{n}")
    if res.status in ("Error(OrbitEscape)", "Error(DegenerateNodes)"):
        start = local_start(case, PrecisionContext(64))
        return res.status, measure_case(case, f"class2:{n}", x0=start)
    return None, res


@criterion(7, "Class II empirical orders on the corpus", {"class2", "order"}, 60)
def _class2_orders():
    checks = []
    ctx = PrecisionContext(64)
    for case in load_corpus():
        g = abs(_gprime(case, ctx))
        if g < 0.05 or abs(g - 1) < 0.05:
            checks.append((True, f"{case.name}: |g'(s)| = {float(g):.3f} degenerate, skipped"))
            continue
        for n in range(2, 6):
            first, res = _class2_measure(case, n)
            note = f" (corpus start: {first}; re-measured {LOCAL_OFFSET} from s)" if first else ""
            est = res.estimate
            if est is None:
                checks.append((False, f"{case.name} class2:{n}: {res.status}{note}"))
                continue
            p = float(est.p_hat)
            checks.append((abs(p - n) <= ORDER_TOL, f"{case.name} class2:{n}: p_hat={p:.4f} at {res.digits} digits{note}"))
    return checks


@criterion(8, "asymptotic error constants and the g' exponent adjudication", {"class1", "class2", "constants"}, 60)
def _constants():
    checks = []
    lo, hi = K_BAND
    corpus = load_corpus()
    for case in corpus:
        for n in range(2, 6):
            res = measure_case(case, f"canonical:{n}")
            est = res.estimate
            if est is None or est.K_predicted is None:
                checks.append((False, f"{case.name} canonical:{n}: {res.status}"))
                continue
            ratio = float(est.K_measured / est.K_predicted)
            checks.append((lo <= ratio <= hi, f"{case.name} canonical:{n}: K={float(est.K_measured):.6g} "
                                              f"ratio {ratio:.5f}"))
    for case in corpus:
        for n in range(2, 5):
            first, res = _class2_measure(case, n)
            est = res.estimate
            if est is None:
                checks.append((False, f"{case.name} class2:{n}: {res.status}"))
                continue
            ctx = res.trace.ctx
            ratio = float(est.K_measured / est.K_predicted)
            root = reference_root(case, ctx)
            alt = float(est.K_measured / predicted_constant(f"class2:{n}", case.f, root, ctx, "triangular"))
            note = " (local start)" if first else ""
            checks.append((lo <= ratio <= hi, f"{case.name} class2:{n}: ratio n(n-1)/2 {ratio:.5f}, "
                                              f"n(n+1)/2 {alt:.4g}{note}"))
    case = next(c for c in corpus if c.name == "sqrt2")
    res = measure_case(case, "class2:2")
    ctx = res.trace.ctx
    root = reference_root(case, ctx)
    k_tri = predicted_constant("class2:2", case.f, root, ctx, "triangular")
    factor = float(k_tri / res.estimate.K_measured)
    factor = max(factor, 1 / factor)
    checks.append((factor >= 2, f"adjudication sqrt2 class2:2: n(n+1)/2 prediction off by x{factor:.3f}"))
    return checks


@criterion(9, "efficiency indices and the defining identity", {"efficiency"}, 1)
def _efficiency():
    checks = []
    for name, (p, t, want) in golden.EFFICIENCY.items():
        got = float(efficiency(p, t).index)
        checks.append((abs(got - want) <= 1e-6, f"{name}: {p}^(1/{t}) = {got:.6f}"))
    rng = random.Random(7)
    worst = 0
    for _ in range(1000):
        # exact rationals so that p^3 and 3t carry no input rounding
        p = 1 + Fraction(rng.randint(1, 9 * 10 ** 12), 10 ** 12)
        t = Fraction(rng.randint(1, 10 ** 13), 10 ** 12)
        a = efficiency(p, t).index
        b = efficiency(p ** 3, 3 * t).index
        worst = max(worst, abs(a - b) / a)
    worst = float(worst)
    checks.append((worst <= 1e-15, f"E(p,t) = E(p^3,3t) on 1000 samples, worst rel {worst:.2e}"))
    return checks


def _hand(name, f, x, ctx):
    F, F1, F2 = _expr.derivative_values(f, x, 2, ctx)
    if name == "newton":
        return x - F / F1
    if name == "chebyshev":
        return x - F / F1 - F ** 2 * F2 / (2 * F1 ** 3)
    return x - 2 * F * F1 / (2 * F1 ** 2 - F * F2)


@criterion(10, "compiled steps agree with the textbook formulas to the last ulp", {"class1", "class2", "oracle"}, 5)
def _oracles():
    checks = []
    ctx = PrecisionContext(64)
    for case in load_corpus():
        f = _expr.parse(case.f)
        for name in ("newton", "chebyshev", "halley", "class2:2"):
            x = ctx.real(case.x0)
            worst, count = 0, 0
            for _ in range(4):
                try:
                    if name == "class2:2":
                        a, b = kfn_step(f, x, 2, ctx), steffensen_direct(f, x, ctx)
                    else:
                        a, b = step_class1(named_method(name), f, x, ctx), _hand(name, f, x, ctx)
                except (DegenerateNodes, OrbitEscape):
                    break
                worst = max(worst, abs(a - b) / ctx.ulp(b))
                count += 1
                if abs(_expr.evaluate(f, b, ctx)) < ctx.tenpow(-20):
                    break
                x = b
            checks.append((count > 0 and worst <= 1, f"{case.name} {name}: {count} steps, max {float(worst):.0f} ulp"))
    return checks


@criterion(11, "robustness: cycles, exact-root starts, designated Class II errors", {"class1", "class2", "robustness"}, 10)
def _robustness():
    checks = []
    ctx = PrecisionContext(64)
    tr = iterate("newton", "x^3 - 2*x + 2", "0", tol="1e-30", max_iter=40, ctx=ctx)
    cyc = {ctx.format(v, 6) for v in tr.iterates[-4:]}
    checks.append((tr.stop_reason.name == "MaxIter" and len(cyc) == 2,
                   f"newton x^3-2x+2 from 0: {tr.stop_reason}, tail {sorted(cyc)}"))
    methods = list(METHOD_NAMES) + [f"canonical:{n}" for n in range(2, 7)] + \
        [f"halley_type:{n}" for n in range(3, 6)] + [f"class2:{n}" for n in range(2, 6)]
    for case in load_corpus():
        s = reference_root(case, ctx)
        bad = []
        for m in methods:
            t = iterate(m, case.f, s, ctx=ctx, tol=ctx.tenpow(-40))
            if t.steps > 1 or abs(t.last - s) > ctx.tenpow(-ctx.digits + 4) or t.stop_reason.name == "Error":
                bad.append(m)
        checks.append((not bad, f"{case.name}: {len(methods)} methods from the root stay put"
                                + (f"; failed {bad}" if bad else "")))
    try:
        kfn_step("1 + x - x", "0.5", 3, ctx)
        raised = "nothing"
    except DegenerateNodes as exc:
        raised = exc.kind
    checks.append((raised == "DegenerateNodes", f"class2:3 on a constant f: {raised}"))
    for f, x0, n, want in (("1 + x - x", "0.5", 3, "DegenerateNodes"),
                           ("x*exp(x) - 1", "0.5", 5, "DegenerateNodes"),
                           ("exp(x) - 2", "1", 5, "OrbitEscape"),
                           ("x^3 - 2*x + 2", "-2", 5, "OrbitEscape")):
        t = iterate(f"class2:{n}", f, x0, ctx=ctx, max_iter=20)
        checks.append((t.stop_reason.kind == want,
                       f"class2:{n} on {f} from {x0}: {t.stop_reason} after {t.steps} step(s)"))
    return checks


# ---------------------------------------------------------------------------

CRITERIA = sorted(_REGISTRY, key=lambda c: c.number)


def select(only: Iterable[str] | None = None) -> list:
    if not only:
        return list(CRITERIA)
    wanted = {w.strip().lower() for w in only if w.strip()}
    return [c for c in CRITERIA if str(c.number) in wanted or c.tags & wanted]


def run_criterion(c: Criterion) -> Outcome:
    out = Outcome(c.number, c.title, budget=c.budget)
    t0 = time.perf_counter()
    try:
        out.checks = list(c.func())
    except Exception as exc:  # a crash is a failed criterion, never a silent pass
        out.error = f"{type(exc).__name__}: {exc}"
    out.elapsed = time.perf_counter() - t0
    return out


def run(only=None, emit=print, verbose: bool = True) -> list:
    outcomes = []
    for c in select(only):
        res = run_criterion(c)
        if verbose:
            for ok, text in res.checks:
                emit(f"    {'ok  ' if ok else 'FAIL'} {text}")
        emit(res.line())
        outcomes.append(res)
    return outcomes
