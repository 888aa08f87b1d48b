"""Formula parser and evaluator for f(x).

Grammar (whitespace-insensitive)::

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := ('-' | '+') factor | base ('^' int)?
    int    := ['-' | '+'] digits | '(' ['-' | '+'] digits ')'
    base   := number | 'x' | ident '(' expr ')' | '(' expr ')'

``^`` binds tighter than unary minus, so ``-x^2`` is ``-(x^2)``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

from .errors import DomainError, ParseError, UnknownFunction
from .numeric import JET_FUNCTIONS, Jet, PrecisionContext

UNARY_FUNCTIONS = ("sin", "cos", "tan", "exp", "log", "sqrt", "atan", "sinh", "cosh")
BINARY_OPS = ("add", "sub", "mul", "div", "pow")


@dataclass(frozen=True)
class Number:
    text: str


@dataclass(frozen=True)
class Var:
    name: str = "x"


@dataclass(frozen=True)
class Unary:
    op: str
    arg: "Expr"


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Expr"
    right: "Expr"


Expr = Union[Number, Var, Unary, Binary]


# ---------------------------------------------------------------------------
# tokenizer / parser

_TOKEN = re.compile(
    r"(?P<ws>\s+)"
    r"|(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()])"
)


def _tokenize(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", pos,
                             {"number", "identifier", "operator"})
        kind = m.lastgroup
        if kind != "ws":
            tokens.append((kind, m.group(), m.start()))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def at_op(self, *ops):
        kind, val, _ = self.peek()
        return kind == "op" and val in ops

    def fail(self, expected):
        kind, val, off = self.peek()
        what = "end of input" if kind == "end" else repr(val)
        raise ParseError(f"unexpected {what}", off, expected)

    def parse(self) -> Expr:
        e = self.expr()
        if self.peek()[0] != "end":
            self.fail({"+", "-", "*", "/", "^", "end"})
        return e

    def expr(self) -> Expr:
        node = self.term()
        while self.at_op("+", "-"):
            op = "add" if self.advance()[1] == "+" else "sub"
            node = Binary(op, node, self.term())
        return node

    def term(self) -> Expr:
        node = self.factor()
        while self.at_op("*", "/"):
            op = "mul" if self.advance()[1] == "*" else "div"
            node = Binary(op, node, self.factor())
        return node

    def factor(self) -> Expr:
        if self.at_op("-"):
            self.advance()
            return Unary("neg", self.factor())
        if self.at_op("+"):
            self.advance()
            return self.factor()
        node = self.base()
        if self.at_op("^"):
            self.advance()
            node = Binary("pow", node, self.integer())
        return node

    def integer(self) -> Number:
        paren = False
        if self.at_op("("):
            self.advance()
            paren = True
        sign = ""
        if self.at_op("-", "+"):
            sign = "-" if self.advance()[1] == "-" else ""
        kind, val, off = self.peek()
        if kind != "num" or not val.isdigit():
            self.fail({"integer exponent"})
        self.advance()
        if paren:
            if not self.at_op(")"):
                self.fail({")"})
            self.advance()
        return Number(sign + val)

    def base(self) -> Expr:
        kind, val, off = self.peek()
        if kind == "num":
            self.advance()
            return Number(val)
        if kind == "ident":
            self.advance()
            if val == "x":
                return Var("x")
            if not self.at_op("("):
                if val in UNARY_FUNCTIONS:
                    self.fail({"("})
                raise UnknownFunction(val, off)
            if val not in UNARY_FUNCTIONS:
                raise UnknownFunction(val, off)
            self.advance()
            arg = self.expr()
            if not self.at_op(")"):
                self.fail({")"})
            self.advance()
            return Unary(val, arg)
        if self.at_op("("):
            self.advance()
            inner = self.expr()
            if not self.at_op(")"):
                self.fail({")"})
            self.advance()
            return inner
        self.fail({"number", "x", "function", "(", "-", "+"})


def parse(text: str) -> Expr:
    return _Parser(text).parse()


# ---------------------------------------------------------------------------
# printing

_PREC = {"add": 1, "sub": 1, "mul": 2, "div": 2, "neg": 3, "pow": 4}
_SYMBOL = {"add": "+", "sub": "-", "mul": "*", "div": "/"}


def to_text(e: Expr) -> str:
    """Render ``e`` so that ``parse(to_text(e)) == e``."""
    return _render(e)


def _prec(e: Expr) -> int:
    if isinstance(e, Binary):
        return _PREC[e.op]
    if isinstance(e, Unary) and e.op == "neg":
        return _PREC["neg"]
    return 5


def _render(e: Expr) -> str:
    if isinstance(e, Number):
        return e.text
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Unary):
        if e.op == "neg":
            inner = _render(e.arg)
            return "-" + (f"({inner})" if _prec(e.arg) < _PREC["neg"] else inner)
        return f"{e.op}({_render(e.arg)})"
    if e.op == "pow":
        base = _render(e.left)
        if _prec(e.left) <= _PREC["pow"]:
            base = f"({base})"
        return f"{base}^{e.right.text}"
    p = _PREC[e.op]
    left = _render(e.left)
    if _prec(e.left) < p:
        left = f"({left})"
    right = _render(e.right)
    # left-associative: equal precedence on the right needs parentheses
    if _prec(e.right) <= p:
        right = f"({right})"
    return f"{left} {_SYMBOL[e.op]} {right}"


# ---------------------------------------------------------------------------
# evaluation

def _scalar_unary(op, v, ctx, node):
    mp = ctx.mp
    if op == "log" and v <= 0:
        raise DomainError("log of a non-positive argument", node)
    if op == "sqrt" and v < 0:
        raise DomainError("sqrt of a negative argument", node)
    if op == "tan" and mp.cos(v) == 0:
        raise DomainError("tan at a pole", node)  # pragma: no cover - unreachable in floating point
    return getattr(mp, op)(v)


def _jet_unary(op, v: Jet, node):
    try:
        return JET_FUNCTIONS[op](v)
    except DomainError as exc:
        raise DomainError(str(exc), node) from None


def evaluate(e: Expr, x, ctx: PrecisionContext):
    """Evaluate ``e`` at ``x``, which may be a context real or a :class:`Jet`."""
    cache: dict = {}
    is_jet = isinstance(x, Jet)

    def ev(node):
        key = id(node)
        if key in cache:
            return cache[key][1]
        val = _ev(node)
        cache[key] = (node, val)
        return val

    def _ev(node):
        if isinstance(node, Number):
            return ctx.real(node.text)
        if isinstance(node, Var):
            return x
        if isinstance(node, Unary):
            v = ev(node.arg)
            if node.op == "neg":
                return -v
            if isinstance(v, Jet):
                return _jet_unary(node.op, v, node)
            return _scalar_unary(node.op, v, ctx, node)
        a = ev(node.left)
        if node.op == "pow":
            k = int(node.right.text)
            head = a.coeffs[0] if isinstance(a, Jet) else a
            if k < 0 and head == 0:
                raise DomainError("negative power of zero", node)
            if isinstance(a, Jet):
                return a ** k
            return ctx.mp.power(a, k)
        b = ev(node.right)
        if node.op == "add":
            return a + b
        if node.op == "sub":
            return a - b
        if node.op == "mul":
            return a * b
        head = b.coeffs[0] if isinstance(b, Jet) else b
        if head == 0:
            raise DomainError("division by zero", node)
        if is_jet and not isinstance(a, Jet):
            a = Jet.constant(a, x.order, ctx)
        return a / b

    return ev(e)


def eval_scalar(e: Expr, x, ctx: PrecisionContext):
    return evaluate(e, ctx.real(x), ctx)


def taylor_coefficients(e: Expr, x, k: int, ctx: PrecisionContext) -> list:
    """Taylor coefficients ``f^(j)(x)/j!`` for j = 0..k."""
    return list(evaluate(e, Jet.identity(ctx.real(x), k, ctx), ctx).coeffs)


def derivative_values(e: Expr, x, k: int, ctx: PrecisionContext) -> list:
    """``(f(x), f'(x), ..., f^(k)(x))`` via jet propagation."""
    if k < 0:
        raise ValueError("derivative order must be non-negative")
    return Jet(taylor_coefficients(e, x, k, ctx), ctx).derivatives()


class Formula:
    """A parsed formula that remembers its source text."""

    __slots__ = ("text", "expr")

    def __init__(self, text: str):
        self.text = text
        self.expr = parse(text)

    def __call__(self, x, ctx: PrecisionContext):
        return evaluate(self.expr, x, ctx)

    def __repr__(self):
        return f"Formula({self.text!r})"


def as_expr(f) -> Expr:
    if isinstance(f, Formula):
        return f.expr
    if isinstance(f, str):
        return parse(f)
    return f
