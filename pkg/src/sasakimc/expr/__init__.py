"""Closed-form expressions over chart coordinates with exact second derivatives."""

from .ast import (
    CONSTANTS,
    FUNCTIONS,
    ArityError,
    BinOp,
    Call,
    Const,
    DomainError,
    Expr,
    ExprError,
    ExprSyntaxError,
    Neg,
    Num,
    UnknownIdentifierError,
    Var,
    evaluate,
    free_vars,
    parse,
    to_source,
)
from .jet import BACKEND, CompiledExprs, Jet2, eval_jet2

__all__ = [
    "BACKEND",
    "CONSTANTS",
    "FUNCTIONS",
    "ArityError",
    "BinOp",
    "Call",
    "Const",
    "CompiledExprs",
    "DomainError",
    "Expr",
    "ExprError",
    "ExprSyntaxError",
    "Jet2",
    "Neg",
    "Num",
    "UnknownIdentifierError",
    "Var",
    "eval_jet2",
    "evaluate",
    "free_vars",
    "parse",
    "to_source",
]
