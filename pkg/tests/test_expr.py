import math
import random
from fractions import Fraction

import pytest

from ordern.algebra import D, VarId, poly_eval_exact
from ordern.class1 import inverse_derivative_poly
from ordern.errors import DomainError, ParseError, UnknownFunction
from ordern.expr import (Binary, Number, Unary, Var, derivative_values, eval_scalar, parse, taylor_coefficients,
                         to_text)
from ordern.harness import load_corpus
from ordern.numeric import PrecisionContext

X = Var("x")
SMOOTH = [c.f for c in load_corpus()] + [
    "tan(x/3) + atan(x)",
    "sqrt(x + 4) * log(x + 3)",
    "sinh(x) - cosh(x/2)",
    "1/(x^2 + 1) - x^-2",
]


def test_parse_examples():
    assert parse("x^2 - 2") == Binary("sub", Binary("pow", X, Number("2")), Number("2"))
    assert parse("x*exp(x) - 1") == Binary("sub", Binary("mul", X, Unary("exp", X)), Number("1"))
    assert parse("x^-2") == Binary("pow", X, Number("-2"))
    assert parse("x^(-2)") == parse("x^-2")


def test_power_binds_tighter_than_negation():
    assert parse("-x^2") == Unary("neg", Binary("pow", X, Number("2")))


def test_left_associative():
    assert parse("x - 1 - 2") == Binary("sub", Binary("sub", X, Number("1")), Number("2"))
    assert parse("x / 2 / 3") == Binary("div", Binary("div", X, Number("2")), Number("3"))


def test_whitespace_insensitive():
    assert parse(" x*exp( x )-1 ") == parse("x*exp(x)-1")


@pytest.mark.parametrize("text, offset", [
    ("x^2 +", 5),
    ("x^1.5", 2),
    ("(x + 1", 6),
    ("x 2", 2),
    ("exp x", 4),
    ("", 0),
])
def test_parse_error_offsets(text, offset):
    with pytest.raises(ParseError) as info:
        parse(text)
    assert info.value.offset == offset
    assert info.value.expected


def test_unknown_function():
    with pytest.raises(UnknownFunction) as info:
        parse("x + foo(x)")
    assert info.value.name == "foo"
    assert info.value.offset == 4


@pytest.mark.parametrize("text", SMOOTH + ["-x^2", "-(x - 1)^3", "x - (1 - x)", "2/(x*x)", "x^(-3)*-x"])
def test_round_trip(text):
    e = parse(text)
    assert parse(to_text(e)) == e


def test_eval_examples():
    ctx = PrecisionContext(64)
    assert eval_scalar(parse("x^2-2"), "1.5", ctx) == ctx.real("0.25")
    ln2 = ctx.mp.log(2)
    assert abs(eval_scalar(parse("exp(x)-2"), ln2, ctx)) <= ctx.tenpow(-62)
    ctx32 = PrecisionContext(32)
    w = "0.56714329040978387299996866221035554975381578718651"
    assert abs(eval_scalar(parse("x*exp(x)-1"), w, ctx32)) <= ctx32.tenpow(-15)


def test_literals_follow_context_precision():
    e = parse("x - 0.1")
    lo, hi = PrecisionContext(32), PrecisionContext(96)
    assert abs(eval_scalar(e, "0.1", lo)) == 0
    assert abs(eval_scalar(e, "0.1", hi)) == 0


@pytest.mark.parametrize("text, x, op", [
    ("log(x - 3)", 1, "log"),
    ("sqrt(x) + 1", -1, "sqrt"),
    ("1/(x - 2)", 2, "div"),
    ("x^-1", 0, "pow"),
])
def test_domain_error_carries_node(text, x, op):
    ctx = PrecisionContext(32)
    with pytest.raises(DomainError) as info:
        eval_scalar(parse(text), x, ctx)
    assert info.value.node is not None
    assert info.value.node.op == op


def test_domain_error_in_jets():
    ctx = PrecisionContext(32)
    with pytest.raises(DomainError) as info:
        derivative_values(parse("log(x)"), -1, 2, ctx)
    assert info.value.node == Unary("log", X)


def test_derivative_examples():
    ctx = PrecisionContext(64)
    assert derivative_values(parse("x^2-2"), "1.5", 2, ctx) == [ctx.real("0.25"), 3, 2]
    assert derivative_values(parse("exp(x)"), 0, 4, ctx) == [1, 1, 1, 1, 1]
    assert derivative_values(parse("sin(x)"), 0, 3, ctx) == [0, 1, 0, -1]


def test_taylor_coefficients_are_scaled():
    ctx = PrecisionContext(64)
    c = taylor_coefficients(parse("exp(x)"), 0, 3, ctx)
    assert c[2] == ctx.real(Fraction(1, 2))
    assert abs(c[3] - ctx.real(Fraction(1, 6))) <= ctx.ulp(c[3])


def test_polynomial_derivatives_match_exact_algebra():
    # f(x) = sum a_k x^k; its derivatives are formed exactly over the coefficient list
    rng = random.Random(7)
    ctx = PrecisionContext(64)
    for _ in range(40):
        deg = rng.randint(1, 6)
        coeffs = [Fraction(rng.randint(-9, 9), rng.randint(1, 4)) for _ in range(deg + 1)]
        text = " + ".join(f"({c.numerator}/{c.denominator})*x^{k}" for k, c in enumerate(coeffs))
        x = Fraction(rng.randint(-300, 300), 100)
        got = derivative_values(parse(text), ctx.real(x), deg, ctx)
        current = coeffs
        for j in range(deg + 1):
            exact = ctx.real(sum(c * x ** k for k, c in enumerate(current)))
            # ulps of the largest term, since cancellation can make the sum tiny
            scale = ctx.real(max(abs(c * x ** k) for k, c in enumerate(current)) or 1)
            assert abs(got[j] - exact) <= 10 * ctx.ulp(scale)
            current = [k * c for k, c in enumerate(current)][1:]


def test_polynomial_derivatives_via_d_variables():
    # f' = -5/4, f'' = 3, f''' = 6 at x = 1/2, pushed through U_2 in d-variables
    ctx = PrecisionContext(64)
    derivs = derivative_values(parse("x^3 - 2*x + 2"), "0.5", 3, ctx)
    u2 = inverse_derivative_poly(3)
    at = {VarId(D, j): Fraction(v) for j, v in zip((1, 2, 3), (Fraction(-5, 4), Fraction(3), Fraction(6)))}
    assert ctx.real(poly_eval_exact(u2, at)) == 3 * derivs[2] ** 2 - derivs[1] * derivs[3]


def _central_difference(e, x, j, h, ctx):
    total = 0
    for k in range(j + 1):
        total += (-1) ** k * math.comb(j, k) * eval_scalar(e, x + (ctx.real(j) / 2 - k) * h, ctx)
    return total / h ** j


@pytest.mark.parametrize("text", SMOOTH)
def test_finite_difference_cross_check(text):
    ctx = PrecisionContext(64)
    e = parse(text)
    x = ctx.real("0.7")
    h = ctx.real("1e-8")
    derivs = derivative_values(e, x, 4, ctx)
    for j in range(1, 5):
        fd = _central_difference(e, x, j, h, ctx)
        assert abs(fd - derivs[j]) <= ctx.real("1e-6") * max(abs(derivs[j]), 1)
