import math
import random

import pytest

from ordern.errors import DomainError, JetDivisionByZero
from ordern.expr import derivative_values, eval_scalar, evaluate, parse
from ordern.harness import load_corpus, reference_root
from ordern.numeric import (MIN_DIGITS, Jet, PrecisionContext, default_digits, jet_arith, jet_transcendental,
                            verification_digits)

CTX = PrecisionContext(64)


def jet(*coeffs, ctx=CTX):
    return Jet(coeffs, ctx)


def close(a: Jet, b, ulps=10):
    b = b.coeffs if isinstance(b, Jet) else b
    return all(abs(p - a.ctx.real(q)) <= ulps * a.ctx.eps() * max(1, abs(p)) for p, q in zip(a.coeffs, b))


def test_context_minimum():
    with pytest.raises(ValueError):
        PrecisionContext(MIN_DIGITS - 1)
    assert PrecisionContext(MIN_DIGITS).bits >= math.ceil(MIN_DIGITS * math.log2(10))


def test_contexts_are_independent():
    lo, hi = PrecisionContext(32), PrecisionContext(128)
    third_lo = lo.real(1) / 3
    third_hi = hi.real(1) / 3
    assert lo.mp.dps == 32 and hi.mp.dps == 128
    assert abs(hi.real(third_lo) - third_hi) > hi.tenpow(-40)


def test_decimal_intake_is_exact_to_precision():
    ctx = PrecisionContext(100)
    root = load_corpus()[0].root
    assert abs(ctx.real(root) ** 2 - 2) < ctx.tenpow(-78)


def test_verification_digits():
    assert verification_digits(2) == 80
    assert verification_digits(7) == 180


def test_default_digits_env(monkeypatch):
    monkeypatch.delenv("ORDERN_DIGITS", raising=False)
    assert default_digits() == 64
    monkeypatch.setenv("ORDERN_DIGITS", "96")
    assert default_digits() == 96


def test_ulp():
    ctx = PrecisionContext(32)
    assert ctx.ulp(1) == ctx.mp.mpf(2) ** (1 - ctx.bits)
    assert ctx.ulp(-8) == 8 * ctx.ulp(1)


def test_identity_jet():
    assert Jet.identity("1.5", 3, CTX).coeffs == (CTX.real("1.5"), 1, 0, 0)


def test_cauchy_square():
    a = Jet.identity("1.5", 2, CTX)
    assert (a * a - 2).coeffs == (CTX.real("0.25"), 3, 1)


def test_self_division():
    a = jet("0.3", "-2", "7", "1.25")
    assert close(jet_arith(a, a, "div"), (1, 0, 0, 0))


def test_product_of_conjugates():
    assert jet_arith(jet(1, 1), jet(1, -1), "mul").coeffs == (1, 0)


def test_scalar_operands():
    a = jet(2, 3, 4)
    assert jet_arith(a, 2, "add").coeffs == (4, 3, 4)
    assert jet_arith(a, 2, "mul").coeffs == (4, 6, 8)
    assert jet_arith(a, 2, "div").coeffs == (1, CTX.real("1.5"), 2)
    assert (1 - a).coeffs == (-1, -3, -4)


def test_truncation_order_is_fixed():
    a, b = jet(1, 2, 3), jet(1, 2)
    assert (a * a).order == 2
    with pytest.raises(ValueError):
        a + b


def test_division_by_zero_head():
    with pytest.raises(JetDivisionByZero):
        jet_arith(jet(1, 1), jet(0, 1), "div")
    with pytest.raises(JetDivisionByZero):
        jet_arith(jet(1, 1), 0, "div")
    with pytest.raises(JetDivisionByZero):
        jet(0, 1) ** -1


def test_exp_series():
    e = jet_transcendental(Jet.identity(0, 3, CTX), "exp")
    assert close(e, (1, 1, CTX.real(1) / 2, CTX.real(1) / 6), ulps=2)


def random_jet(rng, k, positive=False):
    head = rng.uniform(0.2, 2.0) if positive else rng.uniform(-2.0, 2.0)
    return Jet([repr(head)] + [repr(rng.uniform(-1, 1)) for _ in range(k)], CTX)


@pytest.mark.parametrize("seed", range(5))
def test_log_inverts_exp(seed):
    a = random_jet(random.Random(seed), 5)
    assert close(jet_transcendental(jet_transcendental(a, "exp"), "log"), a)


@pytest.mark.parametrize("seed", range(5))
def test_pythagorean_identity(seed):
    a = random_jet(random.Random(seed), 6)
    s, c = jet_transcendental(a, "sin"), jet_transcendental(a, "cos")
    assert close(s * s + c * c, (1,) + (0,) * 6)


@pytest.mark.parametrize("seed", range(5))
def test_function_identities(seed):
    rng = random.Random(100 + seed)
    a = random_jet(rng, 5, positive=True)
    r = jet_transcendental(a, "sqrt")
    assert close(r * r, a)
    sh, ch = jet_transcendental(a, "sinh"), jet_transcendental(a, "cosh")
    assert close(ch * ch - sh * sh, (1,) + (0,) * 5, ulps=40)
    t = jet_transcendental(a, "tan")
    assert close(t, jet_transcendental(a, "sin") / jet_transcendental(a, "cos"), ulps=40)
    # atan(tan(a)) = a for |a_0| < pi/2
    small = Jet([a.coeffs[0] / 2] + list(a.coeffs[1:]), CTX)
    assert close(jet_transcendental(jet_transcendental(small, "tan"), "atan"), small, ulps=40)


def test_unknown_function():
    with pytest.raises(ValueError):
        jet_transcendental(jet(1, 1), "erf")


def test_log_domain():
    with pytest.raises(DomainError):
        jet_transcendental(jet(-1, 1), "log")


@pytest.mark.parametrize("case", load_corpus(), ids=lambda c: c.name)
def test_precision_scaling(case):
    # doubling the precision moves values, derivatives and the root by <= 10^(-digits+2)
    lo, hi = PrecisionContext(64), PrecisionContext(128)
    e = parse(case.f)
    tol = lo.tenpow(-lo.digits + 2)
    for x in (case.x0, "0.3", "1.7"):
        a = derivative_values(e, x, 4, lo)
        b = derivative_values(e, x, 4, hi)
        for p, q in zip(a, b):
            assert abs(hi.real(p) - q) <= tol * max(abs(q), 1)
    assert abs(hi.real(reference_root(case, lo)) - reference_root(case, hi)) <= tol * abs(reference_root(case, hi))


def _fd(e, x, j, h, ctx):
    return sum((-1) ** k * math.comb(j, k) * eval_scalar(e, x + (ctx.real(j) / 2 - k) * h, ctx)
               for k in range(j + 1)) / h ** j


@pytest.mark.parametrize("case", load_corpus(), ids=lambda c: c.name)
def test_jet_coefficients_match_finite_differences(case):
    e = parse(case.f)
    x = CTX.real(case.x0)
    h = CTX.real("1e-8")
    j_coeffs = Jet.identity(x, 4, CTX)
    out = evaluate(e, j_coeffs, CTX)
    for j in range(1, 5):
        value = out.coeffs[j] * math.factorial(j)
        assert abs(value - _fd(e, x, j, h, CTX)) <= CTX.real("1e-6") * max(abs(value), 1)
