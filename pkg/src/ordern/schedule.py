"""Straight-line evaluation schedules built from nested (Horner) forms.

A polynomial over the y-variables is nested in powers of a pivot variable
(``y2`` for Class I forms); each coefficient is nested recursively in its
lowest-index variable. Nodes are hash-consed, so a repeated subexpression
is computed once.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .algebra import Y, MultiPoly, VarId

SMALL_SCALE = 8  # |k| <= 8 integer scalings are counted apart from products


# --- nodes -----------------------------------------------------------------

@dataclass(frozen=True)
class Leaf:
    var: VarId


@dataclass(frozen=True)
class Const:
    value: Fraction


@dataclass(frozen=True)
class Op:
    op: str  # add | sub | mul | div | neg
    args: tuple


@dataclass(frozen=True)
class Scale:
    k: Fraction
    arg: object


# --- costs -----------------------------------------------------------------

@dataclass(frozen=True)
class CostProfile:
    mul: int = 0
    div: int = 0
    addsub: int = 0
    int_scale: int = 0

    def line(self) -> str:
        return f"mul={self.mul} div={self.div} addsub={self.addsub} scale={self.int_scale}"

    def ops(self) -> int:
        """Products plus quotients, the combinatorial cost used for efficiency."""
        return self.mul + self.div

    def as_dict(self) -> dict:
        return {"mul": self.mul, "div": self.div, "addsub": self.addsub, "scale": self.int_scale}


@dataclass(frozen=True)
class Instr:
    op: str  # load | const | add | sub | mul | div | neg | scale
    dst: int
    args: tuple = ()
    value: object = None  # VarId for load, Fraction for const / scale


@dataclass(frozen=True)
class Schedule:
    instrs: tuple
    output: int
    text: str

    @property
    def cost(self) -> CostProfile:
        counts = {"mul": 0, "div": 0, "addsub": 0, "scale": 0}
        for ins in self.instrs:
            if ins.op in ("add", "sub", "neg"):
                counts["addsub"] += 1
            elif ins.op == "mul":
                counts["mul"] += 1
            elif ins.op == "div":
                counts["div"] += 1
            elif ins.op == "scale":
                k = ins.value
                if k.denominator == 1 and abs(k) <= SMALL_SCALE:
                    counts["scale"] += 1
                else:
                    counts["mul"] += 1
        return CostProfile(counts["mul"], counts["div"], counts["addsub"], counts["scale"])

    def inputs(self) -> list:
        return sorted({ins.value for ins in self.instrs if ins.op == "load"})

    def run(self, values: Mapping[VarId, object], convert=None):
        """Replay over any number type; ``convert`` turns Fraction constants
        into that type."""
        if convert is None:
            convert = lambda c: c  # noqa: E731
        slots: list = [None] * (max((i.dst for i in self.instrs), default=-1) + 1)
        for ins in self.instrs:
            a = [slots[j] for j in ins.args]
            if ins.op == "load":
                r = values[ins.value]
            elif ins.op == "const":
                r = convert(ins.value)
            elif ins.op == "add":
                r = a[0] + a[1]
            elif ins.op == "sub":
                r = a[0] - a[1]
            elif ins.op == "mul":
                r = a[0] * a[1]
            elif ins.op == "div":
                r = a[0] / a[1]
            elif ins.op == "neg":
                r = -a[0]
            elif ins.op == "scale":
                k = ins.value
                r = a[0] * k.numerator if k.denominator == 1 else a[0] * convert(k)
            else:  # pragma: no cover - construction never emits other ops
                raise ValueError(ins.op)
            slots[ins.dst] = r
        return slots[self.output]


# --- nesting ---------------------------------------------------------------

def _is_one(node) -> bool:
    return isinstance(node, Const) and node.value == 1


def _mul(a, b):
    if _is_one(a):
        return b
    if _is_one(b):
        return a
    if isinstance(b, Const) and b.value.denominator == 1:
        return Scale(b.value, a)
    if isinstance(a, Const) and a.value.denominator == 1:
        return Scale(a.value, b)
    return Op("mul", (a, b))


def _power(v: VarId, e: int):
    if e == 1:
        return Leaf(v)
    half = _power(v, e // 2)
    sq = Op("mul", (half, half))
    return Op("mul", (sq, Leaf(v))) if e % 2 else sq


def _combine(c: MultiPoly, cnode, csign, tnode, tsign):
    """Node for ``c + tsign*tnode`` where ``c == csign*cnode``."""
    if c.is_constant():
        value = c.constant_term()
        if value > 0 or tsign > 0:
            op = "add" if tsign > 0 else "sub"
            return Op(op, (Const(value), tnode)), 1
        return Op("add", (Const(-value), tnode)), -1
    if csign == tsign:
        return Op("add", (cnode, tnode)), csign
    if csign > 0:
        return Op("sub", (cnode, tnode)), 1
    return Op("sub", (tnode, cnode)), 1


def nest(p: MultiPoly, pivot: VarId | None = None):
    """Nested form of ``p`` as ``(node, sign)`` with ``p == sign * node``.

    Returns ``(None, 1)`` for the zero polynomial."""
    if p.is_zero():
        return None, 1
    if p.is_constant():
        c = p.constant_term()
        return Const(c), 1
    if pivot is None or p.degree_in(pivot) <= 0:
        pivot = p.variables()[0]
    coeffs = p.coefficients_in(pivot)
    nonzero = [k for k, c in enumerate(coeffs) if c]
    top = nonzero[-1]
    node, sign = nest(coeffs[top])
    if isinstance(node, Const) and node.value < 0:
        node, sign = Const(-node.value), -sign
    for lower, upper in zip(reversed(nonzero[:-1]), reversed(nonzero[1:])):
        term = _mul(_power(pivot, upper - lower), node)
        c = coeffs[lower]
        cnode, csign = nest(c)
        node, sign = _combine(c, cnode, csign, term, sign)
    if nonzero[0] > 0:
        node = _mul(_power(pivot, nonzero[0]), node)
    return node, sign


def _signed(node, sign):
    return node if sign > 0 else Op("neg", (node,))


# --- lowering --------------------------------------------------------------

class _Emitter:
    def __init__(self):
        self.instrs: list = []
        self.memo: dict = {}

    def emit(self, node) -> int:
        if node in self.memo:
            return self.memo[node]
        if isinstance(node, Leaf):
            ins = Instr("load", len(self.instrs), value=node.var)
        elif isinstance(node, Const):
            ins = Instr("const", len(self.instrs), value=node.value)
        elif isinstance(node, Scale):
            a = self.emit(node.arg)
            ins = Instr("scale", len(self.instrs), (a,), node.k)
        else:
            args = tuple(self.emit(a) for a in node.args)
            ins = Instr(node.op, len(self.instrs), args)
        self.instrs.append(ins)
        self.memo[node] = ins.dst
        return ins.dst


def _const_text(v: Fraction) -> str:
    return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"


def lower(node, sign: int = 1) -> Schedule:
    root = _signed(node, sign)
    em = _Emitter()
    out = em.emit(root)
    return Schedule(tuple(em.instrs), out, pretty(root))


def pretty(node) -> str:
    """Printed nested form with powers of a single variable shown as ``v^e``."""
    return _pretty(node)


def _pow_exponent(node):
    if isinstance(node, Leaf):
        return node.var, 1
    if isinstance(node, Op) and node.op == "mul":
        parts = [_pow_exponent(a) for a in node.args]
        if all(p is not None for p in parts) and len({p[0] for p in parts}) == 1:
            return parts[0][0], sum(p[1] for p in parts)
    return None


def _pretty(node) -> str:
    pw = _pow_exponent(node)
    if pw is not None and pw[1] > 1:
        return f"{pw[0].name()}^{pw[1]}"
    if isinstance(node, Leaf):
        return node.var.name()
    if isinstance(node, Const):
        return _const_text(node.value)
    if isinstance(node, Scale):
        k = node.k
        ks = str(k.numerator) if k.denominator == 1 else f"({k.numerator}/{k.denominator})"
        inner = _pretty(node.arg)
        if isinstance(node.arg, Op) and node.arg.op in ("add", "sub", "neg"):
            inner = f"({inner})"
        return f"{ks}*{inner}"
    op, args = node.op, node.args
    if op == "neg":
        inner = _pretty(args[0])
        return "-" + (inner if isinstance(args[0], (Leaf, Const)) else f"({inner})")
    if op in ("add", "sub"):
        rhs = _pretty(args[1])
        if op == "sub" and isinstance(args[1], Op) and args[1].op in ("add", "sub", "neg"):
            rhs = f"({rhs})"
        return f"{_pretty(args[0])} {'+' if op == 'add' else '-'} {rhs}"
    if op == "mul":
        a, b = args
        sums = ("add", "sub", "neg")
        a_sum = isinstance(a, Op) and a.op in sums
        b_sum = isinstance(b, Op) and b.op in sums
        if a_sum and not b_sum:
            a, b = b, a
            a_sum, b_sum = b_sum, a_sum
        left = _pretty(a)
        right = _pretty(b)
        if a_sum:
            left = f"({left})"
        if b_sum:
            return f"{left}*({right})"
        # leaf products keep the pivot power last: y3*y2
        if _pow_exponent(a) is not None and _pow_exponent(b) is not None \
                and _pow_exponent(a)[0] < _pow_exponent(b)[0]:
            left, right = right, left
        if _pow_exponent(a) is not None and _pow_exponent(b) is None:
            left, right = right, left
        return f"{left}*{right}"
    if op == "div":
        a, b = args
        ls, rs = _pretty(a), _pretty(b)
        if not isinstance(a, (Leaf, Const)) and _pow_exponent(a) is None:
            ls = f"({ls})"
        if not isinstance(b, (Leaf, Const)) and _pow_exponent(b) is None:
            rs = f"({rs})"
        return f"{ls}/{rs}"
    raise ValueError(op)  # pragma: no cover


# --- public entry points ---------------------------------------------------

PIVOT = VarId(Y, 2)


def compile_polynomial(p: MultiPoly, pivot: VarId = PIVOT) -> Schedule:
    node, sign = nest(p, pivot)
    if node is None:
        node, sign = Const(Fraction(0)), 1
    return lower(node, sign)


def compile_correction(base: VarId, num: MultiPoly, den: MultiPoly, pivot: VarId = PIVOT) -> Schedule:
    """Schedule for ``base + num/den`` with both parts nested in ``pivot``."""
    n_node, n_sign = nest(num, pivot)
    d_node, d_sign = nest(den, pivot)
    quotient = Op("div", (n_node, d_node))
    op = "add" if n_sign * d_sign > 0 else "sub"
    return lower(Op(op, (Leaf(base), quotient)))


def replay_polynomial(schedule: Schedule, variables: Sequence[VarId] | None = None):
    """Exact symbolic replay: feed each input its own variable."""
    from .algebra import RationalFunction

    inputs = schedule.inputs() if variables is None else variables
    values = {v: RationalFunction.of(MultiPoly({((v, 1),): Fraction(1)})) for v in inputs}
    return schedule.run(values, convert=RationalFunction.of)
