"""Expression tree, parser and printer for the chart-coordinate expression language.

Grammar (lowest to highest precedence)::

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := ('-' | '+') unary | power
    power   := atom ('^' unary)?          # right associative
    atom    := NUMBER | NAME | NAME '(' expr ')' | '(' expr ')'

Names are the coordinates ``u0 .. u<n>``, the constants ``pi`` and ``e``, and
the one-argument functions listed in :data:`FUNCTIONS`.  Exponents must be
free of coordinates; a non-integer exponent needs a positive base at
evaluation time.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Sequence, Union

FUNCTIONS = ("sin", "cos", "tan", "sinh", "cosh", "tanh", "exp", "log", "sqrt", "abs")
CONSTANTS = {"pi": math.pi, "e": math.e}


class ExprError(ValueError):
    """Base class for expression errors."""


class ExprSyntaxError(ExprError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at byte offset {offset}")
        self.offset = offset


class UnknownIdentifierError(ExprError):
    def __init__(self, name: str, offset: int):
        super().__init__(f"unknown identifier {name!r} at byte offset {offset}")
        self.name = name
        self.offset = offset


class ArityError(ExprError):
    def __init__(self, name: str, given: int, offset: int):
        super().__init__(
            f"{name}() takes exactly one argument ({given} given) at byte offset {offset}"
        )
        self.name = name
        self.offset = offset


class DomainError(ExprError, ArithmeticError):
    """Evaluation left the real domain of a subexpression."""

    def __init__(self, message: str, subexpr: "Expr | None" = None):
        text = message if subexpr is None else f"{message} in '{to_source(subexpr)}'"
        super().__init__(text)
        self.subexpr = subexpr


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Const:
    name: str

    @property
    def value(self) -> float:
        return CONSTANTS[self.name]


@dataclass(frozen=True)
class Var:
    index: int


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Expr"


Expr = Union[Num, Const, Var, Neg, BinOp, Call]

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<op>\*\*|[-+*/^(),]))"
)
_VAR = re.compile(r"u(0|[1-9]\d*)$")


@dataclass
class _Tok:
    kind: str
    text: str
    offset: int


def _byte_offset(source: str, index: int) -> int:
    return len(source[:index].encode("utf-8"))


def _tokenize(source: str) -> list[_Tok]:
    toks: list[_Tok] = []
    pos = 0
    n = len(source)
    while pos < n:
        if source[pos:].strip() == "":
            break
        m = _TOKEN.match(source, pos)
        if m is None or m.end() == pos:
            bad = pos + (len(source[pos:]) - len(source[pos:].lstrip()))
            raise ExprSyntaxError(f"unexpected character {source[bad]!r}", _byte_offset(source, bad))
        kind = m.lastgroup
        text = m.group(kind)
        start = m.start(kind)
        if kind == "op" and text == "**":
            text = "^"
        toks.append(_Tok(kind, text, _byte_offset(source, start)))
        pos = m.end()
    toks.append(_Tok("end", "", _byte_offset(source, n)))
    return toks


class _Parser:
    def __init__(self, source: str, dim: int | None):
        self.toks = _tokenize(source)
        self.i = 0
        self.dim = dim

    def peek(self) -> _Tok:
        return self.toks[self.i]

    def take(self) -> _Tok:
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, text: str) -> _Tok:
        tok = self.take()
        if tok.text != text or tok.kind == "end":
            found = "end of input" if tok.kind == "end" else repr(tok.text)
            raise ExprSyntaxError(f"expected {text!r}, found {found}", tok.offset)
        return tok

    def parse(self) -> Expr:
        node = self.expr()
        tok = self.peek()
        if tok.kind != "end":
            raise ExprSyntaxError(f"unexpected {tok.text!r}", tok.offset)
        return node

    def expr(self) -> Expr:
        node = self.term()
        while self.peek().kind == "op" and self.peek().text in "+-":
            op = self.take().text
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Expr:
        node = self.unary()
        while self.peek().kind == "op" and self.peek().text in "*/":
            op = self.take().text
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Expr:
        tok = self.peek()
        if tok.kind == "op" and tok.text == "-":
            self.take()
            return Neg(self.unary())
        if tok.kind == "op" and tok.text == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        tok = self.peek()
        if tok.kind == "op" and tok.text == "^":
            self.take()
            exponent = self.unary()
            if free_vars(exponent):
                raise ExprSyntaxError("exponent must not depend on coordinates", tok.offset)
            return BinOp("^", base, exponent)
        return base

    def atom(self) -> Expr:
        tok = self.take()
        if tok.kind == "num":
            return Num(float(tok.text))
        if tok.kind == "name":
            name = tok.text
            if name in FUNCTIONS:
                self.expect("(")
                if self.peek().text == ")":
                    raise ArityError(name, 0, tok.offset)
                arg = self.expr()
                nargs = 1
                while self.peek().kind == "op" and self.peek().text == ",":
                    self.take()
                    self.expr()
                    nargs += 1
                if nargs != 1:
                    raise ArityError(name, nargs, tok.offset)
                self.expect(")")
                return Call(name, arg)
            if self.peek().kind == "op" and self.peek().text == "(":
                raise UnknownIdentifierError(name, tok.offset)
            if name in CONSTANTS:
                return Const(name)
            m = _VAR.match(name)
            if m:
                index = int(m.group(1))
                if self.dim is not None and index >= self.dim:
                    raise UnknownIdentifierError(name, tok.offset)
                return Var(index)
            raise UnknownIdentifierError(name, tok.offset)
        if tok.kind == "op" and tok.text == "(":
            node = self.expr()
            self.expect(")")
            return node
        found = "end of input" if tok.kind == "end" else repr(tok.text)
        raise ExprSyntaxError(f"unexpected {found}", tok.offset)


def parse(source: str, dim: int | None = None) -> Expr:
    """Parse ``source`` into an expression tree.

    With ``dim`` given, coordinates ``u<k>`` with ``k >= dim`` are rejected.
    """
    if not source or not source.strip():
        raise ExprSyntaxError("empty expression", 0)
    return _Parser(source, dim).parse()


def free_vars(e: Expr) -> set[int]:
    if isinstance(e, Var):
        return {e.index}
    if isinstance(e, Neg):
        return free_vars(e.operand)
    if isinstance(e, BinOp):
        return free_vars(e.left) | free_vars(e.right)
    if isinstance(e, Call):
        return free_vars(e.arg)
    return set()


# binding strength used by the printer
_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4}


def _prec(e: Expr) -> int:
    if isinstance(e, BinOp):
        return _PREC[e.op]
    if isinstance(e, Neg):
        return _PREC["neg"]
    if isinstance(e, Num) and (e.value < 0 or math.copysign(1.0, e.value) < 0):
        return _PREC["neg"]
    return 5


def to_source(e: Expr) -> str:
    """Print ``e`` so that ``parse(to_source(e))`` evaluates identically."""
    if isinstance(e, Num):
        if not math.isfinite(e.value):
            raise ExprError(f"cannot print non-finite literal {e.value!r}")
        if math.copysign(1.0, e.value) < 0:
            return "-" + to_source(Num(-e.value))
        if e.value.is_integer() and abs(e.value) < 1e15:
            return str(int(e.value))
        return repr(e.value)
    if isinstance(e, Const):
        return e.name
    if isinstance(e, Var):
        return f"u{e.index}"
    if isinstance(e, Call):
        return f"{e.func}({to_source(e.arg)})"
    if isinstance(e, Neg):
        inner = to_source(e.operand)
        # -a^b already parses as -(a^b); anything looser needs parens
        if _prec(e.operand) < _PREC["neg"]:
            inner = f"({inner})"
        return f"-{inner}"
    p = _PREC[e.op]
    left = to_source(e.left)
    right = to_source(e.right)
    if e.op == "^":
        if _prec(e.left) <= p:
            left = f"({left})"
        # right operand of ^ is parsed at unary level
        if _prec(e.right) < _PREC["neg"]:
            right = f"({right})"
        return f"{left}^{right}"
    if _prec(e.left) < p:
        left = f"({left})"
    if _prec(e.right) <= p:
        right = f"({right})"
    return f"{left} {e.op} {right}"


_MATH = {
    "sin": math.sin,
    "cos": math.cos,
    "tan": math.tan,
    "sinh": math.sinh,
    "cosh": math.cosh,
    "tanh": math.tanh,
    "exp": math.exp,
    "log": math.log,
    "sqrt": math.sqrt,
    "abs": abs,
}


def evaluate(e: Expr, point: Sequence[float]) -> float:
    """Plain floating-point evaluation (no derivatives)."""
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Var):
        return float(point[e.index])
    if isinstance(e, Neg):
        return -evaluate(e.operand, point)
    if isinstance(e, Call):
        x = evaluate(e.arg, point)
        if e.func == "log" and x <= 0.0:
            raise DomainError("log of non-positive value", e)
        if e.func == "sqrt" and x < 0.0:
            raise DomainError("sqrt of negative value", e)
        try:
            return _MATH[e.func](x)
        except (OverflowError, ValueError) as exc:
            raise DomainError(str(exc), e) from None
    a = evaluate(e.left, point)
    b = evaluate(e.right, point)
    if e.op == "+":
        return a + b
    if e.op == "-":
        return a - b
    if e.op == "*":
        return a * b
    if e.op == "/":
        if b == 0.0:
            raise DomainError("division by zero", e)
        return a / b
    if b != int(b) and a <= 0.0:
        raise DomainError("non-integer power of non-positive base", e)
    if a == 0.0 and b < 0:
        raise DomainError("negative power of zero", e)
    try:
        return math.pow(a, b)
    except OverflowError as exc:
        raise DomainError(str(exc), e) from None


def constant_value(e: Expr) -> float:
    """Value of a coordinate-free expression."""
    if free_vars(e):
        raise ExprError("expression depends on coordinates")
    return evaluate(e, ())
