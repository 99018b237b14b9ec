"""Pure-Python second-order jet kernel.

Mirrors ``_kernel.pyx`` operation for operation (same libm calls, same
association order), so both backends return bitwise-identical jets.
"""

import math

import numpy as np

from .tape import (
    ABS,
    ADD,
    CONST,
    COS,
    COSH,
    DIV,
    EXP,
    LOG,
    MUL,
    NEG,
    POWI,
    POWR,
    SIN,
    SINH,
    SQRT,
    SUB,
    TAN,
    TANH,
    VAR,
)


def _unary(f0, f1, f2, ga, ha, nv, pairs):
    g = [f1 * x for x in ga]
    h = [0.0] * (nv * nv)
    for i, j in pairs:
        v = f1 * ha[i * nv + j] + f2 * (ga[i] * ga[j])
        h[i * nv + j] = v
        h[j * nv + i] = v
    return f0, g, h


def run_tape(ops, arg0, arg1, consts, point, val, grad, hess):
    """Evaluate a tape at ``point``; fills ``val``, ``grad``, ``hess`` in place.

    Returns -1 on success, else the index of the first failing instruction.
    """
    nv = len(point)
    pairs = [(i, j) for i in range(nv) for j in range(i, nv)]
    zero_g = [0.0] * nv
    zero_h = [0.0] * (nv * nv)
    V = []
    G = []
    H = []
    ops = ops.tolist()
    arg0 = arg0.tolist()
    arg1 = arg1.tolist()
    consts = consts.tolist()
    pt = [float(x) for x in point]
    for t, op in enumerate(ops):
        a = arg0[t]
        b = arg1[t]
        c = consts[t]
        try:
            if op == CONST:
                v, g, h = c, zero_g, zero_h
            elif op == VAR:
                v = pt[a]
                g = [0.0] * nv
                g[a] = 1.0
                h = zero_h
            elif op == ADD or op == SUB:
                va, ga, ha = V[a], G[a], H[a]
                vb, gb, hb = V[b], G[b], H[b]
                if op == ADD:
                    v = va + vb
                    g = [ga[i] + gb[i] for i in range(nv)]
                    h = [ha[k] + hb[k] for k in range(nv * nv)]
                else:
                    v = va - vb
                    g = [ga[i] - gb[i] for i in range(nv)]
                    h = [ha[k] - hb[k] for k in range(nv * nv)]
            elif op == MUL:
                va, ga, ha = V[a], G[a], H[a]
                vb, gb, hb = V[b], G[b], H[b]
                v = va * vb
                g = [va * gb[i] + vb * ga[i] for i in range(nv)]
                h = [0.0] * (nv * nv)
                for i, j in pairs:
                    x = va * hb[i * nv + j] + vb * ha[i * nv + j] + (ga[i] * gb[j] + gb[i] * ga[j])
                    h[i * nv + j] = x
                    h[j * nv + i] = x
            elif op == DIV:
                va, ga, ha = V[a], G[a], H[a]
                vb, gb, hb = V[b], G[b], H[b]
                if vb == 0.0:
                    return t
                v = va / vb
                g = [(ga[i] - v * gb[i]) / vb for i in range(nv)]
                h = [0.0] * (nv * nv)
                for i, j in pairs:
                    x = (ha[i * nv + j] - v * hb[i * nv + j] - (g[i] * gb[j] + gb[i] * g[j])) / vb
                    h[i * nv + j] = x
                    h[j * nv + i] = x
            elif op == NEG:
                v = -V[a]
                g = [-x for x in G[a]]
                h = [-x for x in H[a]]
            else:
                x = V[a]
                if op == POWI:
                    if x == 0.0 and c < 0.0:
                        return t
                    f0 = math.pow(x, c)
                    f1 = c * math.pow(x, c - 1.0) if c != 0.0 else 0.0
                    f2 = c * (c - 1.0) * math.pow(x, c - 2.0) if (c != 0.0 and c != 1.0) else 0.0
                elif op == POWR:
                    if x <= 0.0:
                        return t
                    f0 = math.pow(x, c)
                    f1 = c * math.pow(x, c - 1.0)
                    f2 = c * (c - 1.0) * math.pow(x, c - 2.0)
                elif op == SIN:
                    s = math.sin(x)
                    co = math.cos(x)
                    f0, f1, f2 = s, co, -s
                elif op == COS:
                    s = math.sin(x)
                    co = math.cos(x)
                    f0, f1, f2 = co, -s, -co
                elif op == TAN:
                    if math.cos(x) == 0.0:
                        return t
                    f0 = math.tan(x)
                    f1 = 1.0 + f0 * f0
                    f2 = 2.0 * f0 * f1
                elif op == SINH:
                    f0 = math.sinh(x)
                    f1 = math.cosh(x)
                    f2 = f0
                elif op == COSH:
                    f0 = math.cosh(x)
                    f1 = math.sinh(x)
                    f2 = f0
                elif op == TANH:
                    f0 = math.tanh(x)
                    f1 = 1.0 - f0 * f0
                    f2 = -2.0 * f0 * f1
                elif op == EXP:
                    f0 = math.exp(x)
                    f1 = f0
                    f2 = f0
                elif op == LOG:
                    if x <= 0.0:
                        return t
                    f0 = math.log(x)
                    f1 = 1.0 / x
                    f2 = -f1 * f1
                elif op == SQRT:
                    if x <= 0.0:
                        return t
                    f0 = math.sqrt(x)
                    f1 = 0.5 / f0
                    f2 = -f1 / (2.0 * x)
                elif op == ABS:
                    f0 = math.fabs(x)
                    f1 = 1.0 if x > 0.0 else (-1.0 if x < 0.0 else 0.0)
                    f2 = 0.0
                else:
                    raise ValueError(f"bad opcode {op}")
                v, g, h = _unary(f0, f1, f2, G[a], H[a], nv, pairs)
        except (OverflowError, ValueError, ZeroDivisionError):
            return t
        if not math.isfinite(v):
            return t
        V.append(v)
        G.append(g)
        H.append(h)
    m = len(ops)
    if m:
        val[:m] = V
        grad[:m] = np.asarray(G, dtype=np.float64).reshape(m, nv)
        hess[:m] = np.asarray(H, dtype=np.float64).reshape(m, nv, nv)
    return -1
