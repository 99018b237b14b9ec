"""Second-order forward jets.

:class:`Jet2` is a value together with its gradient and Hessian with respect
to the chart coordinates.  ``eval_jet2`` and :class:`CompiledExprs` run the
tape kernel (compiled when available); the arithmetic on :class:`Jet2` itself
is a small numpy implementation for composing jets by hand.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .ast import DomainError, Expr, parse
from .tape import Tape, compile_tape, domain_error

if os.environ.get("SASAKIMC_PURE_PYTHON"):
    from ._kernel_py import run_tape

    BACKEND = "python"
else:
    try:
        from ._kernel import run_tape

        BACKEND = "cython"
    except ImportError:
        from ._kernel_py import run_tape

        BACKEND = "python"


@dataclass(frozen=True)
class Jet2:
    value: float
    gradient: np.ndarray
    hessian: np.ndarray

    @classmethod
    def constant(cls, value: float, dim: int) -> "Jet2":
        return cls(float(value), np.zeros(dim), np.zeros((dim, dim)))

    @classmethod
    def variable(cls, index: int, value: float, dim: int) -> "Jet2":
        g = np.zeros(dim)
        g[index] = 1.0
        return cls(float(value), g, np.zeros((dim, dim)))

    @property
    def dim(self) -> int:
        return len(self.gradient)

    def _lift(self, other) -> "Jet2":
        if isinstance(other, Jet2):
            return other
        return Jet2.constant(other, self.dim)

    def __add__(self, other) -> "Jet2":
        o = self._lift(other)
        return Jet2(self.value + o.value, self.gradient + o.gradient, self.hessian + o.hessian)

    __radd__ = __add__

    def __neg__(self) -> "Jet2":
        return Jet2(-self.value, -self.gradient, -self.hessian)

    def __sub__(self, other) -> "Jet2":
        return self + (-self._lift(other))

    def __rsub__(self, other) -> "Jet2":
        return self._lift(other) - self

    def __mul__(self, other) -> "Jet2":
        o = self._lift(other)
        outer = np.outer(self.gradient, o.gradient)
        return Jet2(
            self.value * o.value,
            self.value * o.gradient + o.value * self.gradient,
            self.value * o.hessian + o.value * self.hessian + outer + outer.T,
        )

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Jet2":
        return self * self._lift(other).reciprocal()

    def reciprocal(self) -> "Jet2":
        v = self.value
        if v == 0.0:
            raise DomainError("division by zero")
        return self.apply(1.0 / v, -1.0 / v**2, 2.0 / v**3)

    def __rtruediv__(self, other) -> "Jet2":
        return self._lift(other) / self

    def __pow__(self, p: float) -> "Jet2":
        x = self.value
        if p != int(p) and x <= 0.0:
            raise DomainError("non-integer power of non-positive base")
        if x == 0.0 and p < 0:
            raise DomainError("negative power of zero")
        f1 = p * x ** (p - 1) if p != 0 else 0.0
        f2 = p * (p - 1) * x ** (p - 2) if p not in (0, 1) else 0.0
        return self.apply(x**p, f1, f2)

    def apply(self, f0: float, f1: float, f2: float) -> "Jet2":
        """Chain rule for a scalar function with value/derivatives ``f0, f1, f2`` at ``value``."""
        g = self.gradient
        return Jet2(f0, f1 * g, f1 * self.hessian + f2 * np.outer(g, g))

    def sin(self) -> "Jet2":
        s, c = math.sin(self.value), math.cos(self.value)
        return self.apply(s, c, -s)

    def cos(self) -> "Jet2":
        s, c = math.sin(self.value), math.cos(self.value)
        return self.apply(c, -s, -c)

    def exp(self) -> "Jet2":
        e = math.exp(self.value)
        return self.apply(e, e, e)

    def log(self) -> "Jet2":
        if self.value <= 0.0:
            raise DomainError("log of non-positive value")
        return self.apply(math.log(self.value), 1.0 / self.value, -1.0 / self.value**2)

    def sqrt(self) -> "Jet2":
        if self.value <= 0.0:
            raise DomainError("sqrt of non-positive value")
        s = math.sqrt(self.value)
        return self.apply(s, 0.5 / s, -0.25 / (s * self.value))


class CompiledExprs:
    """Several expressions over one chart, evaluated together as jets.

    Instances are immutable and safe to share between threads; each call
    allocates its own work buffers.
    """

    def __init__(self, exprs: Sequence[Expr], dim: int):
        self.exprs = tuple(exprs)
        self.dim = dim
        self.tape: Tape = compile_tape(self.exprs, dim)

    def __len__(self) -> int:
        return len(self.exprs)

    def _run(self, point) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        p = np.ascontiguousarray(point, dtype=np.float64)
        if p.shape != (self.dim,):
            raise ValueError(f"expected a point with {self.dim} coordinates, got shape {p.shape}")
        m = len(self.tape)
        val = np.empty(m)
        grad = np.empty((m, self.dim))
        hess = np.empty((m, self.dim, self.dim))
        tp = self.tape
        status = run_tape(tp.ops, tp.arg0, tp.arg1, tp.consts, p, val, grad, hess)
        if status >= 0:
            raise domain_error(tp, status)
        return val, grad, hess

    def jets(self, point) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Values ``(k,)``, gradients ``(k, dim)`` and Hessians ``(k, dim, dim)``."""
        val, grad, hess = self._run(point)
        out = self.tape.outputs
        return val[out], grad[out], hess[out]

    def values(self, point) -> np.ndarray:
        return self.jets(point)[0]


def eval_jet2(e: Expr | str, point) -> Jet2:
    """Value, gradient and Hessian of one expression at ``point``."""
    p = np.asarray(point, dtype=np.float64).ravel()
    if isinstance(e, str):
        e = parse(e, len(p))
    val, grad, hess = CompiledExprs([e], len(p)).jets(p)
    return Jet2(float(val[0]), grad[0].copy(), hess[0].copy())
