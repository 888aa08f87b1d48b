"""Independent bisection oracle for the bundled corpus roots."""

import pytest

from ordern.expr import eval_scalar, parse
from ordern.harness import load_corpus
from ordern.numeric import PrecisionContext

BRACKETS = {
    "sqrt2": ("1", "2"),
    "exp_minus_2": ("0", "1"),
    "omega": ("0", "1"),
    "sin_half": ("1.5", "2.5"),
    "cubic": ("-2", "-1.5"),
}


def bisect(f, lo, hi, ctx, steps):
    flo = eval_scalar(f, lo, ctx)
    assert flo * eval_scalar(f, hi, ctx) < 0
    for _ in range(steps):
        mid = (lo + hi) / 2
        fm = eval_scalar(f, mid, ctx)
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return (lo + hi) / 2


@pytest.mark.parametrize("case", load_corpus(), ids=lambda c: c.name)
def test_root_matches_bisection(case):
    ctx = PrecisionContext(100)
    lo, hi = (ctx.real(v) for v in BRACKETS[case.name])
    root = bisect(parse(case.f), lo, hi, ctx, steps=300)
    assert abs(root - ctx.real(case.root)) <= ctx.tenpow(-78)


@pytest.mark.parametrize("case", load_corpus(), ids=lambda c: c.name)
def test_formula_is_finite_at_start(case):
    ctx = PrecisionContext(64)
    assert ctx.mp.isfinite(eval_scalar(parse(case.f), case.x0, ctx))
