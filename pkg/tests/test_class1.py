from fractions import Fraction

import pytest

from ordern import golden
from ordern.algebra import Y, MultiPoly, VarId, const, d, parse_poly, y
from ordern.class1 import (Y2, canonical_poly, compile_horner, halley_denominator, inverse_derivative_poly,
                           inverse_nth_derivative_at_root, named_method, series_in_y2, step_class1, y2_valuation)
from ordern.errors import DerivativeNearZero, UnknownMethod
from ordern.harness import load_corpus, reference_root
from ordern.numeric import PrecisionContext

CORPUS = load_corpus()
PLANS = ["newton", "chebyshev", "halley", "m1", "m2", "m3", "ostrowski",
         "canonical:4", "canonical:5", "canonical:6", "halley_type:4", "halley_type:5"]


def test_inverse_derivative_recurrence():
    assert inverse_derivative_poly(1) == const(1)
    assert inverse_derivative_poly(2) == -d(2)
    assert inverse_derivative_poly(3) == 3 * d(2, 2) - d(1) * d(3)
    with pytest.raises(ValueError):
        inverse_derivative_poly(0)


def test_inverse_derivative_homogeneity():
    # U_{i-1} is homogeneous of degree i-1 and has weight 2(i-1) in the d-indices
    for i in range(1, 8):
        u = inverse_derivative_poly(i)
        assert u.is_homogeneous() and u.degree() == i - 1
        for mono in u.terms:
            assert sum(v.index * e for v, e in mono) == 2 * (i - 1)


def test_small_canonical_polys():
    assert canonical_poly(2) == y(1) - y(2)
    assert canonical_poly(3) == y(1) - y(2) - y(3) * y(2, 2)
    assert str(canonical_poly(3)) == "y1 - y2 - y3*y2^2"


@pytest.mark.parametrize("n", range(2, 8))
def test_canonical_matches_display(n):
    assert canonical_poly(n) == golden.canonical(n)


def test_catalan_leading_coefficients():
    # coefficient of -y3^(k-1) y2^k is the Catalan number C_{k-1}
    catalan = [1, 1, 2, 5, 14, 42]
    p = canonical_poly(7)
    coeffs = p.coefficients_in(Y2)
    for k in range(1, 7):
        lead = coeffs[k].terms.get(((VarId(Y, 3), k - 1),) if k > 1 else ())
        assert lead == -catalan[k - 1]


@pytest.mark.parametrize("n", range(2, 11))
def test_canonical_structure(n):
    p = canonical_poly(n)
    assert p.has_integer_coefficients()
    assert p.degree() == 2 * n - 3
    assert p.degree_in(Y2) == n - 1


@pytest.mark.parametrize("n", range(2, 11))
def test_weighted_homogeneity(n):
    coeffs = canonical_poly(n).coefficients_in(Y2)
    for i, c in enumerate(coeffs):
        if i < 2:
            continue
        for mono in c.terms:
            assert sum((v.index - 2) * e for v, e in mono) == i - 1


@pytest.mark.parametrize("n", range(3, 7))
def test_halley_denominator_matches_display(n):
    assert halley_denominator(n) == golden.halley_denominator(n)


@pytest.mark.parametrize("n", range(3, 9))
def test_halley_type_matches_canonical_to_order_n(n):
    assert y2_valuation((y(2), halley_denominator(n)), n + 1, canonical_poly(n)) >= n
    assert halley_denominator(n).degree_in(Y2) == n - 2


def test_small_orders_rejected():
    with pytest.raises(ValueError):
        canonical_poly(1)
    with pytest.raises(ValueError):
        halley_denominator(2)


def test_series_in_y2():
    s = series_in_y2(const(1), const(1) - y(2), 3)
    assert s == const(1) + y(2) + y(2, 2) + y(2, 3)
    with pytest.raises(ValueError):
        series_in_y2(const(1), y(2), 2)


@pytest.mark.parametrize("name", ["m1", "m2", "m3"])
def test_fixed_variants_have_order_four(name):
    plan = named_method(name)
    num, den = (parse_poly(t) for t in golden.M_FORMS[name])
    assert plan.source[0] == num and plan.source[1] == den
    assert y2_valuation(plan.source, 5, canonical_poly(4)) >= 4


def test_m_nested_displays():
    for name in ("m1", "m2"):
        num, den = (parse_poly(t) for t in golden.M_NESTED[name])
        plan = named_method(name)
        assert num == plan.source[0] and den == plan.source[1]
    # the nested m3 numerator carries a flipped sign and would lose an order
    num, den = (parse_poly(t) for t in golden.M_NESTED["m3"])
    assert den == named_method("m3").source[1]
    assert num != named_method("m3").source[0]
    assert y2_valuation((num, den), 5, canonical_poly(4)) < 4


@pytest.mark.parametrize("name, cost", [
    ("newton", (0, 0, 1)),
    ("chebyshev", (2, 0, 2)),
    ("halley", (1, 1, 2)),
    ("m1", (3, 1, None)),
    ("m2", (4, 1, None)),
    ("m3", (4, 1, None)),
    ("canonical:4", (4, 0, 4)),
])
def test_operation_counts(name, cost):
    c = named_method(name).cost
    mul, div, addsub = cost
    assert c.mul == mul and c.div == div
    if addsub is not None:
        assert c.addsub == addsub


def test_compile_horner_examples():
    assert compile_horner(y(1) - y(2)).cost.ops() == 0
    assert compile_horner(y(1) - y(2)).cost.addsub == 1
    assert compile_horner(canonical_poly(3)).cost.mul == 2
    p4 = compile_horner(canonical_poly(4))
    assert (p4.cost.mul, p4.cost.addsub) == (4, 4)
    nested = parse_poly("y1 - y2*(1 + y2*(y3 + y2*(2*y3^2 - y4)))")
    assert nested == canonical_poly(4)


def test_horner_text():
    assert named_method("halley").text() == "y1 + y2/(-1 + y3*y2)"


def test_named_methods():
    orders = {"newton": 2, "chebyshev": 3, "halley": 3, "m1": 4, "m2": 4, "m3": 4, "ostrowski": 4}
    for name, n in orders.items():
        plan = named_method(name)
        assert plan.order == n
        assert plan.evals == (3 if name == "ostrowski" else n)
    assert named_method("canonical:7").order == 7
    assert named_method("halley_type:5").family == "halley_type"
    for bad in ("secant", "canonical:1", "halley_type:2", "class2:3"):
        with pytest.raises(UnknownMethod):
            named_method(bad)


@pytest.mark.parametrize("name", PLANS[:6] + PLANS[7:])
def test_schedules_decompile(name):
    plan = named_method(name)
    assert plan.decompiles()


@pytest.mark.parametrize("name", PLANS[:6] + PLANS[7:])
def test_schedules_use_only_declared_variables(name):
    plan = named_method(name)
    used = {v.index for v in plan.schedule.inputs() if v.family == Y}
    assert used <= set(range(1, plan.order + 1))


def test_step_examples():
    ctx = PrecisionContext(64)
    newton = step_class1(named_method("newton"), "x^2-2", "1.5", ctx)
    assert abs(newton - ctx.real(Fraction(17, 12))) <= ctx.ulp(newton)
    halley = step_class1(named_method("halley"), "x^2-2", "1.5", ctx)
    assert abs(halley - ctx.real(Fraction(99, 70))) <= 2 * ctx.ulp(halley)


def test_step_matches_exact_evaluation():
    # the y-values of x^2 - 2 at 3/2 are rational, so each step has an exact value
    ctx = PrecisionContext(64)
    at = {VarId(Y, 1): Fraction(3, 2), VarId(Y, 2): Fraction(1, 12), VarId(Y, 3): Fraction(1, 3)}
    at.update({VarId(Y, j): Fraction(0) for j in range(4, 8)})
    for name in PLANS:
        if name == "ostrowski":
            continue
        plan = named_method(name)
        exact = plan.source_function().evaluate(at)
        got = step_class1(plan, "x^2-2", "1.5", ctx)
        assert abs(got - ctx.real(exact)) <= 8 * ctx.ulp(got), name


@pytest.mark.parametrize("case", CORPUS, ids=lambda c: c.name)
@pytest.mark.parametrize("name", PLANS)
def test_step_from_root_is_fixed(case, name):
    ctx = PrecisionContext(64)
    s = reference_root(case, ctx)
    out = step_class1(named_method(name), case.f, s, ctx)
    assert abs(out - s) <= ctx.tenpow(-ctx.digits + 4)


def test_derivative_near_zero():
    ctx = PrecisionContext(64)
    with pytest.raises(DerivativeNearZero):
        step_class1(named_method("newton"), "x^3", "1e-20", ctx)
    with pytest.raises(DerivativeNearZero):
        step_class1(named_method("ostrowski"), "x^3", "1e-20", ctx)


def test_inverse_derivatives_at_root():
    ctx = PrecisionContext(64)
    s = ctx.mp.sqrt(2)
    v2 = inverse_nth_derivative_at_root("x^2-2", s, 2, ctx)
    v3 = inverse_nth_derivative_at_root("x^2-2", s, 3, ctx)
    assert abs(v2 - (-2 / (2 * s) ** 3)) <= ctx.tenpow(-60)
    assert abs(v3 - 12 / (2 * s) ** 5) <= ctx.tenpow(-60)
    assert ctx.format(v2, 6) == "-0.0883883"
    assert ctx.format(v3, 6) == "0.0662913"
    for n in range(2, 6):
        assert inverse_nth_derivative_at_root("3*x - 1", ctx.real(1) / 3, n, ctx) == 0


def test_inverse_derivative_against_mpmath():
    # cross-check with numerical differentiation of the explicit inverse log(2 + t)
    ctx = PrecisionContext(64)
    s = ctx.mp.log(2)
    for n in range(1, 6):
        got = inverse_nth_derivative_at_root("exp(x) - 2", s, n, ctx)
        ref = ctx.mp.diff(lambda t: ctx.mp.log(2 + t), 0, n)
        assert abs(got - ref) <= ctx.tenpow(-40) * abs(ref)


def test_source_function_kinds():
    assert named_method("newton").source_function().equals(named_method("newton").source_function())
    assert isinstance(named_method("chebyshev").source, MultiPoly)
    assert isinstance(named_method("halley").source, tuple)
