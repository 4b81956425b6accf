"""Derived-parameter expressions: parsing, evaluation and canonical printing.

Grammar (lowest to highest precedence)::

    expr    := term (('+' | '-') term)*
    term    := power (('*' | '/') power)*
    power   := unary (('^' | '**') power)?        right-associative
    unary   := ('-' | '+') unary | primary
    primary := NUMBER | 'x' INT | FUNC '(' expr ')' | AGG '(' expr ')' | '(' expr ')'

Unary minus binds tighter than power, so ``-x1^2`` is ``(-x1)^2``.

The bare symbol ``x`` is the whole parameter vector.  It may only appear
inside an aggregate (sum, mean, min, max), where operators and functions act
element-wise: ``mean(x)``, ``log(mean(exp(x)))``, ``sum(x^2)``.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Union

import numpy as np

FUNCTIONS = ("log", "exp", "sqrt", "sign")
AGGREGATES = ("sum", "mean", "min", "max")


class ExprError(ValueError):
    pass


class ExprSyntaxError(ExprError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class ExprNameError(ExprSyntaxError):
    pass


class ExprRangeError(ExprSyntaxError):
    pass


class ExprDomainError(ExprError):
    """Evaluation left the domain of an operation.

    ``subexpression`` is the canonical text of the offending node and
    ``index`` the first offending row when evaluating a batch.
    """

    def __init__(self, message: str, subexpression: str, index: int | None = None):
        where = f" (sample {index})" if index is not None else ""
        super().__init__(f"{message} in {subexpression}{where}")
        self.reason = message
        self.subexpression = subexpression
        self.index = index


# --- AST -------------------------------------------------------------------

@dataclass(frozen=True)
class Num:
    value: float

    def __post_init__(self):
        v = float(self.value)
        if not math.isfinite(v) or math.copysign(1.0, v) < 0:
            raise ExprError("numeric literals must be finite and non-negative")
        object.__setattr__(self, "value", v)


@dataclass(frozen=True)
class Var:
    index: int  # 1-based


@dataclass(frozen=True)
class VecX:
    """The whole vector x; legal only inside an aggregate argument."""


@dataclass(frozen=True)
class Neg:
    operand: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * / ^
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Node"


@dataclass(frozen=True)
class Aggregate:
    func: str
    arg: "Node" = VecX()


Node = Union[Num, Var, VecX, Neg, BinOp, Call, Aggregate]


def _uses_vector(node: Node) -> bool:
    if isinstance(node, VecX):
        return True
    if isinstance(node, Neg):
        return _uses_vector(node.operand)
    if isinstance(node, BinOp):
        return _uses_vector(node.left) or _uses_vector(node.right)
    if isinstance(node, Call):
        return _uses_vector(node.arg)
    return False  # aggregates reduce their vector to a scalar


@dataclass(frozen=True)
class DerivedExpr:
    ast: Node
    dimension: int

    def __str__(self):
        return pretty_print(self)


# --- tokenizer -------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:"
    r"(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>\*\*|[-+*/^(),])"
    r")"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    end = len(text.rstrip())
    while pos < end:
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            bad = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise ExprSyntaxError(f"unexpected character {text[bad]!r}", bad)
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(("end", "", end))
    return tokens


class _Parser:
    def __init__(self, text: str, dimension: int):
        self.tokens = _tokenize(text)
        self.i = 0
        self.dimension = dimension
        self.in_aggregate = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, val, pos = self.take()
        if val != value or kind != "op":
            found = "end of input" if kind == "end" else repr(val)
            raise ExprSyntaxError(f"expected {value!r}, found {found}", pos)

    def parse(self) -> Node:
        node = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            raise ExprSyntaxError(f"unexpected {val!r}", pos)
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.power()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.power())
        return node

    def power(self) -> Node:
        base = self.unary()
        if self.peek()[0] == "op" and self.peek()[1] in ("^", "**"):
            self.take()
            return BinOp("^", base, self.power())
        return base

    def unary(self) -> Node:
        kind, val, _ = self.peek()
        if kind == "op" and val == "-":
            self.take()
            return Neg(self.unary())
        if kind == "op" and val == "+":
            self.take()
            return self.unary()
        return self.primary()

    def primary(self) -> Node:
        kind, val, pos = self.take()
        if kind == "num":
            return Num(float(val))
        if kind == "op" and val == "(":
            node = self.expr()
            self.expect(")")
            return node
        if kind == "ident":
            return self.identifier(val, pos)
        found = "end of input" if kind == "end" else repr(val)
        raise ExprSyntaxError(f"unexpected {found}", pos)

    def identifier(self, name: str, pos: int) -> Node:
        if name in FUNCTIONS:
            self.expect("(")
            arg = self.expr()
            self.expect(")")
            return Call(name, arg)
        if name in AGGREGATES:
            self.expect("(")
            apos = self.peek()[2]
            self.in_aggregate += 1
            arg = self.expr()
            self.in_aggregate -= 1
            self.expect(")")
            if not _uses_vector(arg):
                raise ExprSyntaxError(f"{name}() needs an argument built from the vector x", apos)
            return Aggregate(name, arg)
        m = re.fullmatch(r"x(\d+)", name)
        if m:
            k = int(m.group(1))
            if not 1 <= k <= self.dimension:
                raise ExprRangeError(
                    f"variable index {name} out of range for dimension {self.dimension}", pos)
            return Var(k)
        if name == "x":
            if self.in_aggregate:
                return VecX()
            raise ExprSyntaxError("bare x is only allowed inside sum/mean/min/max", pos)
        raise ExprNameError(f"unknown identifier {name!r}", pos)


def parse(text: str, dimension: int) -> DerivedExpr:
    """Parse ``text`` into an expression over x1..x{dimension}."""
    if int(dimension) != dimension or dimension < 1:
        raise ExprError("dimension must be an integer >= 1")
    if not text or not text.strip():
        raise ExprSyntaxError("empty expression", 0)
    return DerivedExpr(_Parser(text, int(dimension)).parse(), int(dimension))


def _show(node: Node) -> str:
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, Var):
        return f"x{node.index}"
    if isinstance(node, VecX):
        return "x"
    if isinstance(node, Neg):
        return f"(-{_show(node.operand)})"
    if isinstance(node, BinOp):
        return f"({_show(node.left)} {node.op} {_show(node.right)})"
    if isinstance(node, Call):
        return f"{node.func}({_show(node.arg)})"
    if isinstance(node, Aggregate):
        return f"{node.func}({_show(node.arg)})"
    raise TypeError(f"not an expression node: {node!r}")


def pretty_print(e: DerivedExpr | Node) -> str:
    """Canonical fully parenthesised text; ``parse`` inverts it exactly."""
    return _show(e.ast if isinstance(e, DerivedExpr) else e)


# --- evaluation ------------------------------------------------------------

def _fail(message: str, node: Node, bad: np.ndarray):
    if bad.ndim == 2:
        bad = bad.any(axis=1)
    idx = int(np.flatnonzero(bad)[0])
    raise ExprDomainError(message, _show(node), idx)


def _finite(node: Node, out: np.ndarray) -> np.ndarray:
    bad = ~np.isfinite(out)
    if bad.any():
        _fail("non-finite result", node, bad)
    return out


def _eval(node: Node, X: np.ndarray) -> np.ndarray:
    # scalar nodes give shape (N,), vector nodes (N, D)
    if isinstance(node, Num):
        return np.full(X.shape[0], node.value)
    if isinstance(node, Var):
        return X[:, node.index - 1]
    if isinstance(node, VecX):
        return X
    if isinstance(node, Neg):
        return -_eval(node.operand, X)
    if isinstance(node, Aggregate):
        v = _eval(node.arg, X)
        if node.func == "sum":
            return v.sum(axis=1)
        if node.func == "mean":
            return v.sum(axis=1) / X.shape[1]
        return v.min(axis=1) if node.func == "min" else v.max(axis=1)
    if isinstance(node, Call):
        a = _eval(node.arg, X)
        if node.func == "log":
            bad = a <= 0
            if bad.any():
                _fail("log of a non-positive value", node, bad)
            return np.log(a)
        if node.func == "sqrt":
            bad = a < 0
            if bad.any():
                _fail("sqrt of a negative value", node, bad)
            return np.sqrt(a)
        if node.func == "sign":
            return np.sign(a)
        with np.errstate(over="ignore"):
            return _finite(node, np.exp(a))
    left = _eval(node.left, X)
    right = _eval(node.right, X)
    if left.ndim != right.ndim:
        if left.ndim == 1:
            left = left[:, None]
        else:
            right = right[:, None]
    with np.errstate(all="ignore"):
        if node.op == "+":
            return _finite(node, left + right)
        if node.op == "-":
            return _finite(node, left - right)
        if node.op == "*":
            return _finite(node, left * right)
        if node.op == "/":
            bad = right == 0
            if bad.any():
                _fail("division by zero", node, bad)
            return _finite(node, left / right)
        return _finite(node, np.power(left, right))


def evaluate_batch(e: DerivedExpr, X) -> np.ndarray:
    """Evaluate over the rows of an (N, D) array; order preserved."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != e.dimension:
        raise ExprError(f"expected an (N, {e.dimension}) array, got shape {X.shape}")
    if X.shape[0] == 0:
        return np.empty(0)
    out = _eval(e.ast, X)
    return np.array(out, dtype=np.float64, copy=True)


def evaluate(e: DerivedExpr, x) -> float:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.size != e.dimension:
        raise ExprError(f"expected a vector of length {e.dimension}")
    if not np.all(np.isfinite(x)):
        raise ExprError("non-finite input")
    try:
        return float(evaluate_batch(e, x[None, :])[0])
    except ExprDomainError as err:
        raise ExprDomainError(err.reason, err.subexpression) from None
