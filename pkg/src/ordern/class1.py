"""Class I methods: iterations built from f and its derivatives at one point.

The canonical order-n method truncates the Taylor expansion of the inverse
function about f(x). In the scaled variables

    y1 = x,  y2 = f/f',  y_j = f^(j-1) / ((j-1)! f')   (j >= 3)

it is an integer polynomial ``P^n(y1, ..., yn)``. Halley-type methods
replace the tail by ``y2 / R^n`` with ``R^n`` a polynomial in y2.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from . import expr as _expr
from .algebra import D, Y, MultiPoly, RationalFunction, VarId, const, d, formal_derivative, \
    series_inverse, y
from .errors import DerivativeNearZero, UnknownMethod
from .numeric import PrecisionContext
from .schedule import PIVOT, CostProfile, Schedule, compile_correction, compile_polynomial, \
    replay_polynomial

Y1, Y2 = VarId(Y, 1), VarId(Y, 2)


# ---------------------------------------------------------------------------
# symbolic generation

@lru_cache(maxsize=None)
def _u_sequence(i: int) -> tuple:
    if i == 0:
        return (const(1),)
    prev = _u_sequence(i - 1)
    u = prev[-1]
    nxt = formal_derivative(u) * d(1) + (1 - 2 * i) * u * d(2)
    return prev + (nxt,)


def inverse_derivative_poly(i: int) -> MultiPoly:
    """``U_{i-1}`` with ``(f^-1)^(i)(f(x)) = U_{i-1} / f'(x)^(2i-1)``."""
    if i < 1:
        raise ValueError("i must be at least 1")
    return _u_sequence(i - 1)[-1]


def _d_to_y(j: int) -> MultiPoly:
    # d_j / d_1 = j! * y_{j+1}
    return const(math.factorial(j)) * y(j + 1)


@lru_cache(maxsize=None)
def canonical_poly(n: int) -> MultiPoly:
    """``P^n`` with ``H_f^n(x) = P^n(y1, ..., yn)``."""
    if n < 2:
        raise ValueError("canonical methods need n >= 2")
    total = y(1)
    for i in range(1, n):
        u = inverse_derivative_poly(i)
        # U_{i-1} is homogeneous of degree i-1, so U/d1^(i-1) is U at d1 = 1
        mapping = {VarId(D, 1): const(1)}
        mapping.update({VarId(D, j): _d_to_y(j) for j in range(2, i + 1)})
        scaled = u.substitute(mapping)
        total = total + Fraction((-1) ** i, math.factorial(i)) * y(2, i) * scaled
    return total


@lru_cache(maxsize=None)
def halley_denominator(n: int) -> MultiPoly:
    """``R^n`` such that ``y1 + y2/R^n`` agrees with ``P^n`` to order y2^n."""
    if n < 3:
        raise ValueError("Halley-type denominators need n >= 3")
    tail = canonical_poly(n) - y(1)
    coeffs = tail.coefficients_in(Y2)
    s = [-c for c in coeffs[1:]]  # P^n - y1 = -y2 * S(y2)
    inv = series_inverse(s, n - 2)
    return -MultiPoly.from_coefficients(Y2, inv)


def series_in_y2(num: MultiPoly, den: MultiPoly, order: int) -> MultiPoly:
    """Power series of ``num/den`` in y2 truncated after ``y2^order``.

    ``den`` must have a nonzero rational constant term in y2."""
    dc = den.coefficients_in(Y2)
    c0 = dc[0]
    if not c0.is_constant() or c0.is_zero():
        raise ValueError("denominator must have a nonzero constant term in y2")
    lead = c0.constant_term()
    inv = series_inverse([c * (1 / lead) for c in dc], order)
    inv_poly = MultiPoly.from_coefficients(Y2, inv) * (1 / lead)
    return (num * inv_poly).truncate_in(Y2, order)


def y2_valuation(form, n_terms: int, reference: MultiPoly) -> int:
    """Valuation in y2 of ``form - reference`` where ``form`` is a polynomial
    or ``(num, den)`` for ``y1 + num/den``; explored up to ``n_terms``."""
    if isinstance(form, tuple):
        num, den = form
        expansion = y(1) + series_in_y2(num, den, n_terms)
    else:
        expansion = form.truncate_in(Y2, n_terms)
    diff = (expansion - reference).truncate_in(Y2, n_terms)
    coeffs = diff.coefficients_in(Y2)
    for k, c in enumerate(coeffs):
        if c:
            return k
    return n_terms + 1


# ---------------------------------------------------------------------------
# method plans

@dataclass(frozen=True)
class MethodPlan:
    name: str
    family: str  # canonical | halley_type | fixed_rational | multipoint
    order: int
    evals: int
    schedule: Schedule | None
    source: object = field(default=None, compare=False)  # MultiPoly or (num, den)

    @property
    def cost(self) -> CostProfile:
        if self.schedule is None:
            return OSTROWSKI_COST
        return self.schedule.cost

    @property
    def derivatives_needed(self) -> int:
        return self.order - 1 if self.family != "multipoint" else 1

    def source_function(self) -> RationalFunction:
        if isinstance(self.source, tuple):
            num, den = self.source
            return RationalFunction.of(y(1)) + RationalFunction(num, den)
        return RationalFunction.of(self.source)

    def decompiles(self) -> bool:
        """Exact replay of the schedule reproduces the source form."""
        if self.schedule is None:
            return True
        return replay_polynomial(self.schedule).equals(self.source_function())

    def text(self) -> str:
        if self.schedule is None:
            return "y - f(y)*(x - y)/(f(x) - 2*f(y)),  y = x - f(x)/f'(x)"
        return self.schedule.text


# y = x - f/f' (1 div, 1 sub); f(x) - 2 f(y) (1 scale, 1 sub);
# f(y)*(x - y) (1 mul, 1 sub); quotient (1 div); final sub
OSTROWSKI_COST = CostProfile(mul=1, div=2, addsub=4, int_scale=1)


def compile_horner(p: MultiPoly, pivot: VarId = PIVOT, *, name: str = "poly", order: int | None = None,
                   family: str = "canonical") -> MethodPlan:
    schedule = compile_polynomial(p, pivot)
    n = order if order is not None else max((v.index for v in p.variables() if v.family == Y), default=2)
    return MethodPlan(name, family, n, n, schedule, p)


def _rational_plan(name, family, order, num, den) -> MethodPlan:
    schedule = compile_correction(Y1, num, den)
    return MethodPlan(name, family, order, order, schedule, (num, den))


def _m2_parts():
    num = y(2) - y(3) * y(2, 2) - y(4) * y(2, 3)
    den = const(-1) + 2 * y(3) * y(2)
    return num, den


def _m3_parts():
    num = y(2) - y(3) * y(2, 2)
    den = const(-1) + 2 * y(3) * y(2) - y(4) * y(2, 2)
    return num, den


_PARAM = re.compile(r"^(canonical|halley_type|class2):(\d+)$")

METHOD_NAMES = ("newton", "chebyshev", "halley", "m1", "m2", "m3", "ostrowski")


@lru_cache(maxsize=None)
def named_method(name: str) -> MethodPlan:
    """Build the plan for a named Class I method."""
    key = name.strip().lower()
    if key == "newton":
        return compile_horner(canonical_poly(2), name="newton", order=2)
    if key == "chebyshev":
        return compile_horner(canonical_poly(3), name="chebyshev", order=3)
    if key == "halley":
        return _rational_plan("halley", "halley_type", 3, y(2), halley_denominator(3))
    if key == "m1":
        return _rational_plan("m1", "halley_type", 4, y(2), halley_denominator(4))
    if key == "m2":
        return _rational_plan("m2", "fixed_rational", 4, *_m2_parts())
    if key == "m3":
        return _rational_plan("m3", "fixed_rational", 4, *_m3_parts())
    if key == "ostrowski":
        return MethodPlan("ostrowski", "multipoint", 4, 3, None, None)
    m = _PARAM.match(key)
    if m and m.group(1) != "class2":
        n = int(m.group(2))
        if m.group(1) == "canonical":
            if n < 2:
                raise UnknownMethod(f"{name}: canonical order must be >= 2")
            return compile_horner(canonical_poly(n), name=key, order=n)
        if n < 3:
            raise UnknownMethod(f"{name}: halley_type order must be >= 3")
        return _rational_plan(key, "halley_type", n, y(2), halley_denominator(n))
    raise UnknownMethod(f"unknown method {name!r}")


# ---------------------------------------------------------------------------
# numeric evaluation

def y_variables(coeffs, n: int, ctx: PrecisionContext, x) -> dict:
    """y1..yn from Taylor coefficients ``c_j = f^(j)(x)/j!``; checks f'."""
    fp = coeffs[1]
    if abs(fp) <= ctx.tenpow(-(ctx.digits // 2)):
        raise DerivativeNearZero(f"|f'(x)| = {ctx.format(abs(fp), 6)} is below half precision")
    values = {Y1: x, Y2: coeffs[0] / fp}
    for j in range(3, n + 1):
        values[VarId(Y, j)] = coeffs[j - 1] / fp
    return values


def _ostrowski_step(f, x, ctx):
    c = _expr.taylor_coefficients(f, x, 1, ctx)
    if abs(c[1]) <= ctx.tenpow(-(ctx.digits // 2)):
        raise DerivativeNearZero("|f'(x)| is below half precision")
    if c[0] == 0:
        return x
    yv = x - c[0] / c[1]
    fy = _expr.evaluate(f, yv, ctx)
    denom = c[0] - 2 * fy
    if denom == 0:
        raise DerivativeNearZero("Ostrowski denominator vanished")
    return yv - fy * (x - yv) / denom


def step_class1(plan: MethodPlan, f, x, ctx: PrecisionContext):
    """One iteration ``x -> h(x)`` of a Class I plan."""
    f = _expr.as_expr(f)
    x = ctx.real(x)
    if plan.family == "multipoint":
        return _ostrowski_step(f, x, ctx)
    n = plan.order
    coeffs = _expr.taylor_coefficients(f, x, plan.derivatives_needed, ctx)
    values = y_variables(coeffs, n, ctx, x)
    return plan.schedule.run(values, convert=ctx.real)


def inverse_nth_derivative_at_root(f, s, n: int, ctx: PrecisionContext):
    """``(f^-1)^(n)(0)`` at the simple zero s."""
    f = _expr.as_expr(f)
    derivs = _expr.derivative_values(f, s, n, ctx)
    fp = derivs[1]
    if abs(fp) <= ctx.tenpow(-(ctx.digits // 2)):
        raise DerivativeNearZero("|f'(s)| is below half precision")
    u = inverse_derivative_poly(n)
    values = {VarId(D, j): derivs[j] for j in range(1, n + 1)}
    return u.evaluate(values, convert=ctx.real) / fp ** (2 * n - 1)


__all__ = [
    "MethodPlan",
    "METHOD_NAMES",
    "OSTROWSKI_COST",
    "canonical_poly",
    "compile_horner",
    "halley_denominator",
    "inverse_derivative_poly",
    "inverse_nth_derivative_at_root",
    "named_method",
    "series_in_y2",
    "step_class1",
    "y2_valuation",
    "y_variables",
]
