"""Scalar field expressions over the chart coordinates (t, x).

A tiny recursive-descent parser, a numpy evaluator, a printer that
round-trips through the parser, and symbolic first derivatives (used for
exact gradients of transformation functions and vector fields).

Grammar::

    expr  := term (("+"|"-") term)*
    term  := unary (("*"|"/") unary)*
    unary := "-" unary | power
    power := atom ("^" unary)?
    atom  := NUMBER | "t" | "x" | "pi" | FUNC "(" expr ")" | "(" expr ")"
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from functools import cached_property

import numpy as np

__all__ = [
    "ExprError",
    "ExprSyntaxError",
    "ExprDomainError",
    "Num",
    "Var",
    "Neg",
    "BinOp",
    "Call",
    "ScalarField",
    "parse",
    "parse_field_expr",
    "to_source",
    "evaluate",
    "derivative",
    "sum_of_squares",
]

FUNCS = ("sin", "cos", "tan", "exp", "log", "abs", "sqrt")
VARS = ("t", "x")


class ExprError(ValueError):
    pass


class ExprSyntaxError(ExprError):
    def __init__(self, message: str, position: int, source: str = ""):
        self.position = position
        self.source = source
        super().__init__(f"{message} at position {position}")


class ExprDomainError(ExprError):
    """Raised when an expression leaves its real domain (log(0), sqrt(-1), 1/0...)."""


# -- tree -------------------------------------------------------------------


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str  # "t", "x" or "pi"


@dataclass(frozen=True)
class Neg:
    arg: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Node"


Node = Num | Var | Neg | BinOp | Call


# -- tokenizer / parser -----------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:"
    r"(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()])"
    r")"
)


def _tokenize(src: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    n = len(src)
    while pos < n:
        if src[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(src, pos)
        if m is None or m.end() == pos:
            raise ExprSyntaxError(f"unexpected character {src[pos]!r}", pos, src)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), start))
        pos = m.end()
    tokens.append(("end", "", n))
    return tokens


class _Parser:
    def __init__(self, src: str):
        self.src = src
        self.tokens = _tokenize(src)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, text, pos = self.take()
        if text != value or kind != "op":
            found = "end of input" if kind == "end" else repr(text)
            raise ExprSyntaxError(f"expected {value!r}, found {found}", pos, self.src)

    def parse(self) -> Node:
        node = self.expr()
        kind, text, pos = self.peek()
        if kind != "end":
            raise ExprSyntaxError(f"unexpected token {text!r}", pos, self.src)
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Node:
        kind, text, _ = self.peek()
        if kind == "op" and text == "-":
            self.take()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        kind, text, _ = self.peek()
        if kind == "op" and text == "^":
            self.take()
            return BinOp("^", base, self.unary())
        return base

    def atom(self) -> Node:
        kind, text, pos = self.take()
        if kind == "num":
            return Num(float(text))
        if kind == "name":
            if text in VARS or text == "pi":
                return Var(text)
            if text in FUNCS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(text, arg)
            raise ExprSyntaxError(f"unknown identifier {text!r}", pos, self.src)
        if kind == "op" and text == "(":
            node = self.expr()
            self.expect(")")
            return node
        found = "end of input" if kind == "end" else repr(text)
        raise ExprSyntaxError(f"unexpected {found}", pos, self.src)


def parse(src: str) -> Node:
    if not src or not src.strip():
        raise ExprSyntaxError("empty expression", 0, src)
    return _Parser(src).parse()


# -- printing ---------------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 4}


def _prec(node: Node) -> int:
    if isinstance(node, BinOp):
        return _PREC[node.op]
    if isinstance(node, Neg):
        return 3
    if isinstance(node, Num) and node.value < 0:
        return 3
    return 5


def _num_source(value: float) -> str:
    if value < 0:
        return "-" + _num_source(-value)
    if value == math.inf:
        raise ExprError("cannot print a non-finite constant")
    return repr(float(value))


def to_source(node: Node) -> str:
    """Print ``node`` so that ``parse(to_source(node))`` rebuilds the same tree."""
    if isinstance(node, Num):
        return _num_source(node.value)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Call):
        return f"{node.func}({to_source(node.arg)})"
    if isinstance(node, Neg):
        inner = to_source(node.arg)
        return f"-({inner})" if _prec(node.arg) < 3 else f"-{inner}"
    op = node.op
    left, right = to_source(node.left), to_source(node.right)
    if op == "^":
        # base must be an atom, exponent a unary
        if _prec(node.left) < 5:
            left = f"({left})"
        if _prec(node.right) < 3:
            right = f"({right})"
        return f"{left}^{right}"
    p = _PREC[op]
    if _prec(node.left) < p:
        left = f"({left})"
    if _prec(node.right) <= p:
        right = f"({right})"
    return f"{left} {op} {right}"


# -- evaluation -------------------------------------------------------------

_NP_FUNCS = {
    "sin": np.sin,
    "cos": np.cos,
    "tan": np.tan,
    "exp": np.exp,
    "log": np.log,
    "abs": np.abs,
    "sqrt": np.sqrt,
}


def _eval(node: Node, t, x):
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        if node.name == "t":
            return t
        if node.name == "x":
            return x
        return math.pi
    if isinstance(node, Neg):
        return np.negative(_eval(node.arg, t, x))
    if isinstance(node, Call):
        return _NP_FUNCS[node.func](_eval(node.arg, t, x))
    a = _eval(node.left, t, x)
    b = _eval(node.right, t, x)
    if node.op == "+":
        return np.add(a, b)
    if node.op == "-":
        return np.subtract(a, b)
    if node.op == "*":
        return np.multiply(a, b)
    if node.op == "/":
        return np.divide(a, b)
    return np.power(a, b)


def evaluate(node: Node, t, x):
    """Evaluate on scalars or broadcastable arrays. Scalars in, float out."""
    t_arr = np.asarray(t, dtype=float)
    x_arr = np.asarray(x, dtype=float)
    shape = np.broadcast_shapes(t_arr.shape, x_arr.shape)
    try:
        with np.errstate(divide="raise", invalid="raise", over="raise"):
            out = np.asarray(_eval(node, t_arr, x_arr), dtype=float)
    except FloatingPointError as exc:
        raise ExprDomainError(f"{to_source(node)}: {exc}") from None
    if not np.all(np.isfinite(out)):
        raise ExprDomainError(f"{to_source(node)}: non-finite value")
    if shape == ():
        return float(out)
    return np.broadcast_to(out, shape).copy()


# -- symbolic derivative ----------------------------------------------------

_ZERO = Num(0.0)
_ONE = Num(1.0)


def _is(node: Node, value: float) -> bool:
    return isinstance(node, Num) and node.value == value


def _add(a, b):
    if _is(a, 0.0):
        return b
    if _is(b, 0.0):
        return a
    return BinOp("+", a, b)


def _sub(a, b):
    if _is(b, 0.0):
        return a
    if _is(a, 0.0):
        return Neg(b)
    return BinOp("-", a, b)


def _mul(a, b):
    if _is(a, 0.0) or _is(b, 0.0):
        return _ZERO
    if _is(a, 1.0):
        return b
    if _is(b, 1.0):
        return a
    return BinOp("*", a, b)


def _div(a, b):
    if _is(a, 0.0):
        return _ZERO
    if _is(b, 1.0):
        return a
    return BinOp("/", a, b)


def _depends(node: Node, var: str) -> bool:
    if isinstance(node, Num):
        return False
    if isinstance(node, Var):
        return node.name == var
    if isinstance(node, (Neg, Call)):
        return _depends(node.arg, var)
    return _depends(node.left, var) or _depends(node.right, var)


def derivative(node: Node, var: str) -> Node:
    """d node / d var as a new (lightly folded) tree."""
    if var not in VARS:
        raise ExprError(f"cannot differentiate with respect to {var!r}")
    if not _depends(node, var):
        return _ZERO
    if isinstance(node, Var):
        return _ONE
    if isinstance(node, Neg):
        d = derivative(node.arg, var)
        return _ZERO if _is(d, 0.0) else Neg(d)
    if isinstance(node, Call):
        u = node.arg
        du = derivative(u, var)
        f = node.func
        if f == "sin":
            outer = Call("cos", u)
        elif f == "cos":
            outer = Neg(Call("sin", u))
        elif f == "tan":
            outer = _div(_ONE, BinOp("^", Call("cos", u), Num(2.0)))
        elif f == "exp":
            outer = node
        elif f == "log":
            outer = _div(_ONE, u)
        elif f == "abs":
            outer = _div(u, node)
        else:  # sqrt
            outer = _div(_ONE, _mul(Num(2.0), node))
        return _mul(outer, du)
    a, b = node.left, node.right
    da, db = derivative(a, var), derivative(b, var)
    if node.op == "+":
        return _add(da, db)
    if node.op == "-":
        return _sub(da, db)
    if node.op == "*":
        return _add(_mul(da, b), _mul(a, db))
    if node.op == "/":
        return _div(_sub(_mul(da, b), _mul(a, db)), BinOp("^", b, Num(2.0)))
    # power
    if not _depends(b, var):
        if isinstance(b, Num):
            lowered = Num(b.value - 1.0)
        else:
            lowered = BinOp("-", b, _ONE)
        return _mul(_mul(b, BinOp("^", a, lowered)), da)
    # general u^v = exp(v log u): valid for u > 0 only
    return _mul(node, _add(_mul(db, Call("log", a)), _div(_mul(b, da), a)))


# -- field wrapper ----------------------------------------------------------


@dataclass(frozen=True)
class ScalarField:
    """A scalar function of (t, x) backed by an expression tree."""

    node: Node
    name: str = ""

    @classmethod
    def parse(cls, src: str, name: str = "") -> "ScalarField":
        return cls(parse(src), name)

    @classmethod
    def constant(cls, value: float) -> "ScalarField":
        return cls(Num(float(value)))

    def __call__(self, t, x):
        return evaluate(self.node, t, x)

    def __str__(self) -> str:
        return to_source(self.node)

    @cached_property
    def grad(self) -> tuple["ScalarField", "ScalarField"]:
        return (
            ScalarField(derivative(self.node, "t")),
            ScalarField(derivative(self.node, "x")),
        )

    def is_zero(self) -> bool:
        return _is(self.node, 0.0)


def parse_field_expr(src: str) -> ScalarField:
    return ScalarField.parse(src)


def sum_of_squares() -> ScalarField:
    """Named preset f = t^2 + x^2."""
    return ScalarField.parse("t^2 + x^2", name="SumOfSquares")
