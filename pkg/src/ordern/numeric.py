"""Configurable-precision reals and truncated Taylor jets.

Reals are ``mpmath`` floats owned by a private :class:`mpmath.MPContext`,
so each :class:`PrecisionContext` is independent of global state.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath

from .errors import DomainError, JetDivisionByZero

MIN_DIGITS = 32
DEFAULT_DIGITS = 64


def default_digits() -> int:
    env = os.environ.get("ORDERN_DIGITS")
    return int(env) if env else DEFAULT_DIGITS


def verification_digits(order: int) -> int:
    """Minimum precision for order-verification runs of an order-n method."""
    return 20 * order + 40


@dataclass(frozen=True)
class PrecisionContext:
    """A working precision of ``digits`` significant decimal digits
    (round-to-nearest)."""

    digits: int = DEFAULT_DIGITS
    mp: mpmath.ctx_mp.MPContext = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.digits < MIN_DIGITS:
            raise ValueError(f"precision must be at least {MIN_DIGITS} digits")
        ctx = mpmath.MPContext()
        ctx.dps = self.digits
        object.__setattr__(self, "mp", ctx)

    @property
    def bits(self) -> int:
        return self.mp.prec

    def real(self, value):
        """Convert an int, Fraction, decimal string or mpf into a context real."""
        if isinstance(value, Fraction):
            return self.mp.mpf(value.numerator) / value.denominator
        if isinstance(value, str):
            return self.mp.mpf(value.strip())
        return self.mp.mpf(value)

    def eps(self):
        return self.mp.eps

    def ulp(self, x):
        """Unit in the last place of ``x`` at this precision."""
        x = abs(self.mp.mpf(x))
        if x == 0:
            return self.mp.mpf(2) ** (-self.bits)  # pragma: no cover - degenerate
        _, e = self.mp.frexp(x)
        return self.mp.ldexp(1, e - self.bits)

    def tenpow(self, k):
        return self.mp.mpf(10) ** k

    def format(self, x, digits: int | None = None) -> str:
        return self.mp.nstr(x, digits or self.digits, strip_zeros=False)

    def doubled(self) -> "PrecisionContext":
        return PrecisionContext(2 * self.digits)


class Jet:
    """Truncated Taylor series ``a_0 + a_1 t + ... + a_k t^k`` of a function
    at a point. Coefficients, not derivative values.
    """

    __slots__ = ("coeffs", "ctx")

    def __init__(self, coeffs, ctx: PrecisionContext):
        self.ctx = ctx
        self.coeffs = tuple(ctx.mp.mpf(c) for c in coeffs)

    @classmethod
    def identity(cls, x, order: int, ctx: PrecisionContext) -> "Jet":
        return cls([ctx.real(x), 1] + [0] * (order - 1), ctx) if order else cls([ctx.real(x)], ctx)

    @classmethod
    def constant(cls, c, order: int, ctx: PrecisionContext) -> "Jet":
        return cls([c] + [0] * order, ctx)

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def _zero(self):
        return self.ctx.mp.mpf(0)

    def _lift(self, other) -> "Jet":
        if isinstance(other, Jet):
            if other.order != self.order:
                raise ValueError("jets of different truncation order")
            return other
        return Jet.constant(other, self.order, self.ctx)

    def derivatives(self) -> list:
        """Derivative values ``f^(j) = j! * a_j``."""
        return [c * math.factorial(j) for j, c in enumerate(self.coeffs)]

    # arithmetic ---------------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, Jet):
            return Jet((self.coeffs[0] + other,) + self.coeffs[1:], self.ctx)
        o = self._lift(other)
        return Jet([a + b for a, b in zip(self.coeffs, o.coeffs)], self.ctx)

    __radd__ = __add__

    def __neg__(self):
        return Jet([-a for a in self.coeffs], self.ctx)

    def __sub__(self, other):
        if not isinstance(other, Jet):
            return Jet((self.coeffs[0] - other,) + self.coeffs[1:], self.ctx)
        o = self._lift(other)
        return Jet([a - b for a, b in zip(self.coeffs, o.coeffs)], self.ctx)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Jet):
            return Jet([a * other for a in self.coeffs], self.ctx)
        a, b = self.coeffs, self._lift(other).coeffs
        k = self.order
        return Jet([self.ctx.mp.fsum(a[i] * b[j - i] for i in range(j + 1)) for j in range(k + 1)],
                   self.ctx)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            if other == 0:
                raise JetDivisionByZero("jet divided by zero")
            return Jet([a / other for a in self.coeffs], self.ctx)
        a, b = self.coeffs, self._lift(other).coeffs
        if b[0] == 0:
            raise JetDivisionByZero("jet division by a jet with zero constant term")
        c = []
        for j in range(self.order + 1):
            acc = a[j] - self.ctx.mp.fsum(b[i] * c[j - i] for i in range(1, j + 1))
            c.append(acc / b[0])
        return Jet(c, self.ctx)

    def __rtruediv__(self, other):
        return self._lift(other) / self

    def __pow__(self, n: int):
        if not isinstance(n, int):
            raise TypeError("jets support integer powers only")
        if n < 0:
            if self.coeffs[0] == 0:
                raise JetDivisionByZero("negative power of a jet with zero constant term")
            return Jet.constant(1, self.order, self.ctx) / (self ** (-n))
        result = Jet.constant(1, self.order, self.ctx)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other):
        return isinstance(other, Jet) and self.coeffs == other.coeffs

    __hash__ = None

    def __repr__(self):
        return f"Jet({[self.ctx.format(c, 12) for c in self.coeffs]})"


def jet_arith(a: Jet, b, op: str) -> Jet:
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    raise ValueError(f"unknown jet operation {op!r}")


# ---------------------------------------------------------------------------
# transcendental recurrences

def jet_exp(a: Jet) -> Jet:
    mp = a.ctx.mp
    e = [mp.exp(a.coeffs[0])]
    for j in range(1, a.order + 1):
        e.append(mp.fsum(i * a.coeffs[i] * e[j - i] for i in range(1, j + 1)) / j)
    return Jet(e, a.ctx)


def jet_log(a: Jet) -> Jet:
    mp = a.ctx.mp
    a0 = a.coeffs[0]
    if a0 <= 0:
        raise DomainError("log of a non-positive argument")
    out = [mp.log(a0)]
    for j in range(1, a.order + 1):
        acc = mp.fsum(i * out[i] * a.coeffs[j - i] for i in range(1, j))
        out.append((a.coeffs[j] - acc / j) / a0)
    return Jet(out, a.ctx)


def _sin_cos_pair(a: Jet, s0, c0, hyperbolic: bool):
    mp = a.ctx.mp
    s, c = [s0], [c0]
    sgn = 1 if hyperbolic else -1
    for j in range(1, a.order + 1):
        s.append(mp.fsum(i * a.coeffs[i] * c[j - i] for i in range(1, j + 1)) / j)
        c.append(sgn * mp.fsum(i * a.coeffs[i] * s[j - i] for i in range(1, j + 1)) / j)
    return Jet(s, a.ctx), Jet(c, a.ctx)


def jet_sin_cos(a: Jet):
    mp = a.ctx.mp
    return _sin_cos_pair(a, mp.sin(a.coeffs[0]), mp.cos(a.coeffs[0]), False)


def jet_sinh_cosh(a: Jet):
    mp = a.ctx.mp
    return _sin_cos_pair(a, mp.sinh(a.coeffs[0]), mp.cosh(a.coeffs[0]), True)


def jet_sin(a: Jet) -> Jet:
    return jet_sin_cos(a)[0]


def jet_cos(a: Jet) -> Jet:
    return jet_sin_cos(a)[1]


def jet_tan(a: Jet) -> Jet:
    s, c = jet_sin_cos(a)
    if c.coeffs[0] == 0:
        raise DomainError("tan at a pole")
    return s / c


def jet_sinh(a: Jet) -> Jet:
    return jet_sinh_cosh(a)[0]


def jet_cosh(a: Jet) -> Jet:
    return jet_sinh_cosh(a)[1]


def jet_sqrt(a: Jet) -> Jet:
    mp = a.ctx.mp
    a0 = a.coeffs[0]
    if a0 < 0 or (a0 == 0 and a.order > 0):
        raise DomainError("sqrt outside its (differentiable) domain")
    r = [mp.sqrt(a0)]
    for j in range(1, a.order + 1):
        acc = mp.fsum(r[i] * r[j - i] for i in range(1, j))
        r.append((a.coeffs[j] - acc) / (2 * r[0]))
    return Jet(r, a.ctx)


def jet_atan(a: Jet) -> Jet:
    mp = a.ctx.mp
    k = a.order
    b = (a * a + 1).coeffs
    da = [(m + 1) * a.coeffs[m + 1] for m in range(k)]
    dt = []
    for m in range(k):
        acc = mp.fsum(b[i] * dt[m - i] for i in range(1, m + 1))
        dt.append((da[m] - acc) / b[0])
    return Jet([mp.atan(a.coeffs[0])] + [dt[m] / (m + 1) for m in range(k)], a.ctx)


JET_FUNCTIONS = {
    "exp": jet_exp,
    "log": jet_log,
    "sin": jet_sin,
    "cos": jet_cos,
    "tan": jet_tan,
    "sqrt": jet_sqrt,
    "atan": jet_atan,
    "sinh": jet_sinh,
    "cosh": jet_cosh,
}


def jet_transcendental(a: Jet, fn: str) -> Jet:
    try:
        return JET_FUNCTIONS[fn](a)
    except KeyError:
        raise ValueError(f"unknown jet function {fn!r}") from None
