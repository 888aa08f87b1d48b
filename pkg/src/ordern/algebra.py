"""Exact multivariate polynomials over the rationals.

Variables are indexed symbols from three families:

* ``D``     -- ``d_j`` stands for the j-th derivative of f at x (printed ``d3``)
* ``Y``     -- the scaled variables ``y_j`` used by Class I methods (``y2``)
* ``DELTA`` -- orbit increments ``Δ_i`` of Class II methods (``D1``)

Coefficients are :class:`fractions.Fraction`, so all arithmetic is exact.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import total_ordering
from math import gcd
from typing import Callable, Iterable, Mapping, Sequence

from .errors import InvalidVariable, NotNormalized, ParseError, UnboundVariable

Rational = Fraction

D, Y, DELTA = "D", "Y", "DELTA"
_FAMILY_RANK = {D: 0, Y: 1, DELTA: 2}
_PREFIX = {D: "d", Y: "y", DELTA: "D"}
_UNICODE_PREFIX = {D: "d", Y: "y", DELTA: "Δ"}


@total_ordering
@dataclass(frozen=True)
class VarId:
    family: str
    index: int

    def __post_init__(self):
        if self.family not in _FAMILY_RANK:
            raise InvalidVariable(f"unknown variable family {self.family!r}")
        if self.index < 0:
            raise InvalidVariable("variable index must be non-negative")

    def _key(self):
        return (_FAMILY_RANK[self.family], self.index)

    def __lt__(self, other):
        return self._key() < other._key()

    def name(self, unicode=False):
        prefix = (_UNICODE_PREFIX if unicode else _PREFIX)[self.family]
        return f"{prefix}{self.index}"

    def __str__(self):
        return self.name()


# monomial: tuple of (VarId, exponent) pairs sorted by VarId, exponents > 0
Monomial = tuple


def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    exps = dict(a)
    for v, e in b:
        exps[v] = exps.get(v, 0) + e
    return tuple(sorted(exps.items()))


def _mono_degree(m: Monomial) -> int:
    return sum(e for _, e in m)


def _as_fraction(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, int):
        return Fraction(c)
    raise TypeError(f"coefficient must be int or Fraction, got {type(c).__name__}")


class MultiPoly:
    """Immutable polynomial with rational coefficients.

    Zero coefficients are never stored, so ``==`` is structural equality.
    """

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[Monomial, Fraction] | None = None):
        clean = {}
        if terms:
            for mono, c in terms.items():
                c = _as_fraction(c)
                if c:
                    clean[mono] = c
        self._terms = clean
        self._hash = None

    # construction -------------------------------------------------------
    @classmethod
    def const(cls, c) -> "MultiPoly":
        return cls({(): _as_fraction(c)})

    @classmethod
    def var(cls, family: str, index: int, power: int = 1) -> "MultiPoly":
        if power == 0:
            return cls.const(1)
        return cls({((VarId(family, index), power),): Fraction(1)})

    @classmethod
    def _coerce(cls, other) -> "MultiPoly":
        if isinstance(other, MultiPoly):
            return other
        if isinstance(other, (int, Fraction)):
            return cls.const(other)
        return NotImplemented

    # inspection ---------------------------------------------------------
    @property
    def terms(self) -> dict:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return all(not m for m in self._terms)

    def constant_term(self) -> Fraction:
        return self._terms.get((), Fraction(0))

    def variables(self) -> list:
        found = set()
        for mono in self._terms:
            found.update(v for v, _ in mono)
        return sorted(found)

    def families(self) -> set:
        return {v.family for v in self.variables()}

    def degree(self) -> int:
        if not self._terms:
            return -1
        return max(_mono_degree(m) for m in self._terms)

    def degree_in(self, v: VarId) -> int:
        if not self._terms:
            return -1
        return max(dict(m).get(v, 0) for m in self._terms)

    def is_homogeneous(self) -> bool:
        return len({_mono_degree(m) for m in self._terms}) <= 1

    def sorted_terms(self) -> list:
        """Terms in canonical order: ascending total degree, then graded
        reverse-lexicographic (smaller exponent of the largest variable first)."""
        vs = self.variables()[::-1]

        def key(item):
            mono = dict(item[0])
            return (_mono_degree(item[0]), tuple(mono.get(v, 0) for v in vs))

        return sorted(self._terms.items(), key=key)

    # arithmetic ---------------------------------------------------------
    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self._terms)
        for m, c in other._terms.items():
            out[m] = out.get(m, 0) + c
        return MultiPoly(out)

    __radd__ = __add__

    def __neg__(self):
        return MultiPoly({m: -c for m, c in self._terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other - self

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out: dict = {}
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                m = _mono_mul(m1, m2)
                out[m] = out.get(m, 0) + c1 * c2
        return MultiPoly(out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("MultiPoly powers must be non-negative integers")
        result = MultiPoly.const(1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def __bool__(self):
        return bool(self._terms)

    # structure ----------------------------------------------------------
    def coefficients_in(self, v: VarId) -> list:
        """Split into ``[c_0, c_1, ...]`` with ``self == sum c_k * v**k``."""
        buckets: dict = {}
        for mono, c in self._terms.items():
            exps = dict(mono)
            k = exps.pop(v, 0)
            rest = tuple(sorted(exps.items()))
            buckets.setdefault(k, {})[rest] = c
        if not buckets:
            return []
        return [MultiPoly(buckets.get(k, {})) for k in range(max(buckets) + 1)]

    @staticmethod
    def from_coefficients(v: VarId, coeffs: Sequence["MultiPoly"]) -> "MultiPoly":
        out = MultiPoly()
        power = MultiPoly.const(1)
        pv = MultiPoly({((v, 1),): Fraction(1)})
        for c in coeffs:
            if c:
                out = out + c * power
            power = power * pv
        return out

    def truncate_in(self, v: VarId, max_power: int) -> "MultiPoly":
        return MultiPoly({m: c for m, c in self._terms.items() if dict(m).get(v, 0) <= max_power})

    def substitute(self, mapping: Mapping[VarId, "MultiPoly"]) -> "MultiPoly":
        out = MultiPoly()
        cache: dict = {}
        for mono, c in self._terms.items():
            term = MultiPoly.const(c)
            for v, e in mono:
                if v in mapping:
                    key = (v, e)
                    if key not in cache:
                        cache[key] = MultiPoly._coerce(mapping[v]) ** e
                    term = term * cache[key]
                else:
                    term = term * MultiPoly({((v, e),): Fraction(1)})
            out = out + term
        return out

    def content(self) -> Fraction:
        """Positive gcd of the numerators over lcm of denominators."""
        if not self._terms:
            return Fraction(0)
        g_num = 0
        l_den = 1
        for c in self._terms.values():
            g_num = gcd(g_num, c.numerator)
            l_den = l_den * c.denominator // gcd(l_den, c.denominator)
        return Fraction(g_num, l_den)

    def has_integer_coefficients(self) -> bool:
        return all(c.denominator == 1 for c in self._terms.values())

    # evaluation ---------------------------------------------------------
    def evaluate(self, assignment: Mapping[VarId, object], convert: Callable | None = None):
        """Evaluate at ``assignment``; ``convert`` maps Fraction coefficients
        into the target number type (identity for exact evaluation)."""
        if convert is None:
            convert = _identity
        total = None
        powers: dict = {}
        for mono, c in self._terms.items():
            term = convert(c)
            for v, e in mono:
                if v not in assignment:
                    raise UnboundVariable(f"no value bound for {v}")
                key = (v, e)
                if key not in powers:
                    powers[key] = assignment[v] ** e
                term = term * powers[key]
            total = term if total is None else total + term
        if total is None:
            return convert(Fraction(0))
        return total

    # text form ----------------------------------------------------------
    def to_text(self, unicode: bool = False) -> str:
        if not self._terms:
            return "0"
        parts = []
        for i, (mono, c) in enumerate(self.sorted_terms()):
            sign = "-" if c < 0 else "+"
            body = _term_text(mono, abs(c), unicode)
            if i == 0:
                parts.append(body if sign == "+" else "-" + body)
            else:
                parts.append(f" {sign} {body}")
        return "".join(parts)

    def __str__(self):
        return self.to_text()

    def __repr__(self):
        return f"MultiPoly({self.to_text()!r})"


def _identity(c):
    return c


def _mono_print_order(mono: Monomial) -> list:
    # y2 is the Horner pivot of Class I forms and is written last (``y3*y2^2``)
    pivot = VarId(Y, 2)
    body = [(v, e) for v, e in mono if v != pivot]
    body += [(v, e) for v, e in mono if v == pivot]
    return body


def _coef_text(c: Fraction) -> str:
    if c.denominator == 1:
        return str(c.numerator)
    return f"{c.numerator}/{c.denominator}"


def _term_text(mono: Monomial, c: Fraction, unicode: bool) -> str:
    factors = []
    for v, e in _mono_print_order(mono):
        name = v.name(unicode)
        factors.append(name if e == 1 else f"{name}^{e}")
    if not factors:
        return _coef_text(c)
    if c != 1:
        factors.insert(0, _coef_text(c))
    return "*".join(factors)


# convenience constructors
def d(j: int, power: int = 1) -> MultiPoly:
    return MultiPoly.var(D, j, power)


def y(j: int, power: int = 1) -> MultiPoly:
    return MultiPoly.var(Y, j, power)


def delta(i: int, power: int = 1) -> MultiPoly:
    return MultiPoly.var(DELTA, i, power)


def const(c) -> MultiPoly:
    return MultiPoly.const(c)


# ---------------------------------------------------------------------------
# operations

def poly_arith(a: MultiPoly, b: MultiPoly, op: str) -> MultiPoly:
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise ValueError(f"unknown polynomial operation {op!r}")


def formal_derivative(p: MultiPoly) -> MultiPoly:
    """Total x-derivative of a polynomial in the derivative symbols,
    using ``d_j -> d_{j+1}`` and the Leibniz rule."""
    bad = p.families() - {D}
    if bad:
        raise InvalidVariable("formal_derivative is defined only on derivative symbols d_j")
    out: dict = {}
    for mono, c in p.items():
        exps = dict(mono)
        for v, e in mono:
            new = dict(exps)
            if e == 1:
                del new[v]
            else:
                new[v] = e - 1
            nxt = VarId(D, v.index + 1)
            new[nxt] = new.get(nxt, 0) + 1
            m = tuple(sorted(new.items()))
            out[m] = out.get(m, 0) + c * e
    return MultiPoly(out)


def series_inverse(s: Sequence[MultiPoly], k: int) -> list:
    """Reciprocal of a power series ``sum s[i] t^i`` with ``s[0] == 1``, to order k."""
    coeffs = [MultiPoly._coerce(c) for c in s]
    if not coeffs or coeffs[0] != MultiPoly.const(1):
        raise NotNormalized("series_inverse needs a constant term equal to 1")
    coeffs += [MultiPoly()] * (k + 1 - len(coeffs))
    b = [MultiPoly.const(1)]
    for j in range(1, k + 1):
        acc = MultiPoly()
        for i in range(1, j + 1):
            if coeffs[i]:
                acc = acc + coeffs[i] * b[j - i]
        b.append(-acc)
    return b


def poly_eval_exact(p: MultiPoly, assignment: Mapping[VarId, Fraction]) -> Fraction:
    values = {v: _as_fraction(x) for v, x in assignment.items()}
    return Fraction(p.evaluate(values))


def valuation_in(p: MultiPoly, v: VarId) -> int | float:
    """Smallest power of ``v`` with a nonzero coefficient (inf for zero)."""
    coeffs = p.coefficients_in(v)
    for k, c in enumerate(coeffs):
        if c:
            return k
    return float("inf")


# ---------------------------------------------------------------------------
# rational functions (only what schedule replay and identity checks need)

@dataclass(frozen=True)
class RationalFunction:
    num: MultiPoly
    den: MultiPoly

    def __post_init__(self):
        if self.den.is_zero():
            raise ZeroDivisionError("rational function with zero denominator")

    @classmethod
    def of(cls, p) -> "RationalFunction":
        return cls(MultiPoly._coerce(p), MultiPoly.const(1))

    @staticmethod
    def _lift(x):
        if isinstance(x, RationalFunction):
            return x
        return RationalFunction.of(x)

    def __add__(self, other):
        o = self._lift(other)
        if self.den == o.den:
            return RationalFunction(self.num + o.num, self.den)
        return RationalFunction(self.num * o.den + o.num * self.den, self.den * o.den)

    __radd__ = __add__

    def __neg__(self):
        return RationalFunction(-self.num, self.den)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        o = self._lift(other)
        return RationalFunction(self.num * o.num, self.den * o.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._lift(other)
        if o.num.is_zero():
            raise ZeroDivisionError("division by the zero rational function")
        return RationalFunction(self.num * o.den, self.den * o.num)

    def __rtruediv__(self, other):
        return self._lift(other) / self

    def equals(self, other) -> bool:
        o = self._lift(other)
        return self.num * o.den == o.num * self.den

    def evaluate(self, assignment, convert=None):
        return self.num.evaluate(assignment, convert) / self.den.evaluate(assignment, convert)


def rational_equal(num1, den1, num2, den2, *, trials: int = 20, seed: int = 0) -> bool:
    """Decide ``num1/den1 == num2/den2`` by clearing denominators.

    If the cross-multiplied polynomials disagree structurally the answer is
    re-checked by ``trials`` random exact evaluations before returning False
    (a guard against non-canonical inputs)."""
    lhs = num1 * den2
    rhs = num2 * den1
    if lhs == rhs:
        return True
    variables = sorted(set(lhs.variables()) | set(rhs.variables()))
    rng = random.Random(seed)
    for _ in range(trials):
        point = {v: Fraction(rng.randint(-97, 97), rng.randint(1, 31)) for v in variables}
        if lhs.evaluate(point) != rhs.evaluate(point):
            return False
    return True


def random_identity_check(lhs: Callable, rhs: Callable, variables: Iterable[VarId], *,
                          trials: int = 20, seed: int = 0, accept: Callable | None = None) -> bool:
    """Compare two callables of a rational assignment at random points.

    ``accept(point)`` may veto points (e.g. coincident nodes)."""
    variables = list(variables)
    rng = random.Random(seed)
    done = 0
    while done < trials:
        point = {v: Fraction(rng.randint(-60, 60), rng.randint(1, 17)) for v in variables}
        if accept is not None and not accept(point):
            continue
        if lhs(point) != rhs(point):
            return False
        done += 1
    return True


# ---------------------------------------------------------------------------
# text form parsing

_TOKEN = re.compile(r"\s*(?:(\d+)|([dyDΔ])(\d+)|(\S))")


def parse_poly(text: str) -> MultiPoly:
    """Parse the canonical text form (sums of ``c*v^e*...`` terms).

    Parentheses are accepted around sub-expressions; ``^`` takes a
    non-negative integer exponent."""
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            break
        if m.group(0).strip() == "":
            break
        start = m.start(m.lastindex) if m.lastindex else pos
        if m.group(1) is not None:
            tokens.append(("num", int(m.group(1)), start))
        elif m.group(2) is not None:
            fam = {"d": D, "y": Y, "D": DELTA, "Δ": DELTA}[m.group(2)]
            tokens.append(("var", VarId(fam, int(m.group(3))), start))
        else:
            tokens.append(("op", m.group(4), start))
        pos = m.end()
    tokens.append(("end", None, len(text)))
    parser = _PolyParser(tokens)
    result = parser.expr()
    parser.expect_end()
    return result


class _PolyParser:
    def __init__(self, tokens):
        self.tokens = tokens
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def is_op(self, ch):
        kind, val, _ = self.peek()
        return kind == "op" and val == ch

    def expect_end(self):
        kind, _, off = self.peek()
        if kind != "end":
            raise ParseError("unexpected trailing input", off, {"end"})

    def expr(self):
        sign = 1
        if self.is_op("-"):
            self.take()
            sign = -1
        elif self.is_op("+"):
            self.take()
        acc = self.term() * sign
        while self.is_op("+") or self.is_op("-"):
            op = self.take()[1]
            t = self.term()
            acc = acc + t if op == "+" else acc - t
        return acc

    def term(self):
        acc = self.factor()
        while self.is_op("*") or self.is_op("/"):
            op = self.take()[1]
            rhs = self.factor()
            if op == "*":
                acc = acc * rhs
            else:
                if not rhs.is_constant() or rhs.is_zero():
                    _, _, off = self.peek()
                    raise ParseError("division only by nonzero constants", off)
                acc = acc * (1 / rhs.constant_term())
        return acc

    def factor(self):
        base = self.atom()
        if self.is_op("^"):
            self.take()
            kind, val, off = self.take()
            if kind != "num":
                raise ParseError("exponent must be an integer", off, {"integer"})
            base = base ** val
        return base

    def atom(self):
        kind, val, off = self.take()
        if kind == "num":
            return MultiPoly.const(val)
        if kind == "var":
            return MultiPoly({((val, 1),): Fraction(1)})
        if kind == "op" and val == "(":
            inner = self.expr()
            if not self.is_op(")"):
                raise ParseError("missing ')'", self.peek()[2], {")"})
            self.take()
            return inner
        if kind == "op" and val == "-":
            return -self.factor()
        raise ParseError("unexpected token", off, {"number", "variable", "("})
