"""Flatten expression trees into a shared instruction tape.

A tape evaluates many expressions at once (all metric entries, or all field
components) with common subexpressions computed a single time.  The kernels
in ``_kernel.pyx`` / ``_kernel_py.py`` consume the flat arrays built here.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .ast import BinOp, Call, DomainError, Expr, Neg, Var, constant_value, free_vars

# opcodes; keep in sync with both kernels
CONST, VAR, ADD, SUB, MUL, DIV, NEG, POWI, POWR = range(9)
SIN, COS, TAN, SINH, COSH, TANH, EXP, LOG, SQRT, ABS = range(9, 19)

_FUNC_OPS = {
    "sin": SIN,
    "cos": COS,
    "tan": TAN,
    "sinh": SINH,
    "cosh": COSH,
    "tanh": TANH,
    "exp": EXP,
    "log": LOG,
    "sqrt": SQRT,
    "abs": ABS,
}
_BIN_OPS = {"+": ADD, "-": SUB, "*": MUL, "/": DIV}


@dataclass(frozen=True)
class Tape:
    dim: int
    ops: np.ndarray  # int32
    arg0: np.ndarray  # int32
    arg1: np.ndarray  # int32
    consts: np.ndarray  # float64
    outputs: np.ndarray  # int32, one slot per compiled expression
    nodes: tuple  # source subexpression of every instruction, for error reports

    def __len__(self) -> int:
        return len(self.ops)


class _Builder:
    def __init__(self, dim: int):
        self.dim = dim
        self.ops: list[int] = []
        self.a: list[int] = []
        self.b: list[int] = []
        self.c: list[float] = []
        self.nodes: list[Expr] = []
        self.memo: dict = {}

    def emit(self, key, op: int, a: int, b: int, c: float, node: Expr) -> int:
        slot = self.memo.get(key)
        if slot is not None:
            return slot
        self.ops.append(op)
        self.a.append(a)
        self.b.append(b)
        self.c.append(c)
        self.nodes.append(node)
        slot = len(self.ops) - 1
        self.memo[key] = slot
        return slot

    def const(self, value: float, node: Expr) -> int:
        # keyed on the bit pattern so that -0.0 and 0.0 stay distinct
        return self.emit(("c", float(value).hex()), CONST, 0, 0, float(value), node)

    def visit(self, e: Expr) -> int:
        if isinstance(e, Var):
            if e.index >= self.dim:
                raise ValueError(f"coordinate u{e.index} outside a {self.dim}-dimensional chart")
            return self.emit(("v", e.index), VAR, e.index, 0, 0.0, e)
        if not free_vars(e):
            return self.const(constant_value(e), e)
        if isinstance(e, Neg):
            a = self.visit(e.operand)
            return self.emit(("neg", a), NEG, a, 0, 0.0, e)
        if isinstance(e, Call):
            a = self.visit(e.arg)
            op = _FUNC_OPS[e.func]
            return self.emit((e.func, a), op, a, 0, 0.0, e)
        assert isinstance(e, BinOp)
        if e.op == "^":
            a = self.visit(e.left)
            p = constant_value(e.right)
            if p == int(p) and abs(p) < 2**31:
                return self.emit(("powi", a, p), POWI, a, 0, float(p), e)
            return self.emit(("powr", a, float(p).hex()), POWR, a, 0, float(p), e)
        a = self.visit(e.left)
        b = self.visit(e.right)
        op = _BIN_OPS[e.op]
        if op in (ADD, MUL) and b < a:
            a, b = b, a
        return self.emit((e.op, a, b), op, a, b, 0.0, e)


def compile_tape(exprs: Sequence[Expr], dim: int) -> Tape:
    """Compile ``exprs`` over a ``dim``-dimensional chart into one tape."""
    builder = _Builder(dim)
    outputs = [builder.visit(e) for e in exprs]
    return Tape(
        dim=dim,
        ops=np.asarray(builder.ops, dtype=np.int32),
        arg0=np.asarray(builder.a, dtype=np.int32),
        arg1=np.asarray(builder.b, dtype=np.int32),
        consts=np.asarray(builder.c, dtype=np.float64),
        outputs=np.asarray(outputs, dtype=np.int32),
        nodes=tuple(builder.nodes),
    )


_REASONS = {
    DIV: "division by zero",
    POWI: "negative power of zero",
    POWR: "non-integer power of non-positive base",
    LOG: "log of non-positive value",
    SQRT: "sqrt of non-positive value",
    TAN: "tan at a pole",
}


def domain_error(tape: Tape, index: int) -> DomainError:
    op = int(tape.ops[index])
    reason = _REASONS.get(op, "non-finite result")
    return DomainError(reason, tape.nodes[index])
