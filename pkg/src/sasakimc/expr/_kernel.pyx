# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled second-order jet kernel.

Same contract and the same floating-point operation order as
``_kernel_py.run_tape``; the two must stay bitwise identical.
"""

from libc.math cimport sin, cos, tan, sinh, cosh, tanh, exp, log, sqrt, fabs, pow, isfinite

cdef enum:
    CONST = 0
    VAR = 1
    ADD = 2
    SUB = 3
    MUL = 4
    DIV = 5
    NEG = 6
    POWI = 7
    POWR = 8
    SIN = 9
    COS = 10
    TAN = 11
    SINH = 12
    COSH = 13
    TANH = 14
    EXP = 15
    LOG = 16
    SQRT = 17
    ABS = 18


def run_tape(const int[::1] ops, const int[::1] arg0, const int[::1] arg1,
             const double[::1] consts, const double[::1] point,
             double[::1] val, double[:, ::1] grad, double[:, :, ::1] hess):
    """Evaluate a tape at ``point``; fills ``val``, ``grad``, ``hess`` in place.

    Returns -1 on success, else the index of the first failing instruction.
    """
    cdef Py_ssize_t m = ops.shape[0]
    cdef Py_ssize_t nv = point.shape[0]
    cdef Py_ssize_t t, i, j
    cdef int op, a, b
    cdef double c, v, va, vb, x, f0, f1, f2, s, co, h
    cdef Py_ssize_t status = -1
    with nogil:
        for t in range(m):
            op = ops[t]
            a = arg0[t]
            b = arg1[t]
            c = consts[t]
            if op == CONST:
                v = c
                for i in range(nv):
                    grad[t, i] = 0.0
                    for j in range(nv):
                        hess[t, i, j] = 0.0
            elif op == VAR:
                v = point[a]
                for i in range(nv):
                    grad[t, i] = 0.0
                    for j in range(nv):
                        hess[t, i, j] = 0.0
                grad[t, a] = 1.0
            elif op == ADD:
                v = val[a] + val[b]
                for i in range(nv):
                    grad[t, i] = grad[a, i] + grad[b, i]
                    for j in range(nv):
                        hess[t, i, j] = hess[a, i, j] + hess[b, i, j]
            elif op == SUB:
                v = val[a] - val[b]
                for i in range(nv):
                    grad[t, i] = grad[a, i] - grad[b, i]
                    for j in range(nv):
                        hess[t, i, j] = hess[a, i, j] - hess[b, i, j]
            elif op == MUL:
                va = val[a]
                vb = val[b]
                v = va * vb
                for i in range(nv):
                    grad[t, i] = va * grad[b, i] + vb * grad[a, i]
                for i in range(nv):
                    for j in range(i, nv):
                        h = (va * hess[b, i, j] + vb * hess[a, i, j]
                             + (grad[a, i] * grad[b, j] + grad[b, i] * grad[a, j]))
                        hess[t, i, j] = h
                        hess[t, j, i] = h
            elif op == DIV:
                va = val[a]
                vb = val[b]
                if vb == 0.0:
                    status = t
                    break
                v = va / vb
                for i in range(nv):
                    grad[t, i] = (grad[a, i] - v * grad[b, i]) / vb
                for i in range(nv):
                    for j in range(i, nv):
                        h = (hess[a, i, j] - v * hess[b, i, j]
                             - (grad[t, i] * grad[b, j] + grad[b, i] * grad[t, j])) / vb
                        hess[t, i, j] = h
                        hess[t, j, i] = h
            elif op == NEG:
                v = -val[a]
                for i in range(nv):
                    grad[t, i] = -grad[a, i]
                    for j in range(nv):
                        hess[t, i, j] = -hess[a, i, j]
            else:
                x = val[a]
                if op == POWI:
                    if x == 0.0 and c < 0.0:
                        status = t
                        break
                    f0 = pow(x, c)
                    if c != 0.0:
                        f1 = c * pow(x, c - 1.0)
                    else:
                        f1 = 0.0
                    if c != 0.0 and c != 1.0:
                        f2 = c * (c - 1.0) * pow(x, c - 2.0)
                    else:
                        f2 = 0.0
                elif op == POWR:
                    if x <= 0.0:
                        status = t
                        break
                    f0 = pow(x, c)
                    f1 = c * pow(x, c - 1.0)
                    f2 = c * (c - 1.0) * pow(x, c - 2.0)
                elif op == SIN:
                    s = sin(x)
                    co = cos(x)
                    f0 = s
                    f1 = co
                    f2 = -s
                elif op == COS:
                    s = sin(x)
                    co = cos(x)
                    f0 = co
                    f1 = -s
                    f2 = -co
                elif op == TAN:
                    if cos(x) == 0.0:
                        status = t
                        break
                    f0 = tan(x)
                    f1 = 1.0 + f0 * f0
                    f2 = 2.0 * f0 * f1
                elif op == SINH:
                    f0 = sinh(x)
                    f1 = cosh(x)
                    f2 = f0
                elif op == COSH:
                    f0 = cosh(x)
                    f1 = sinh(x)
                    f2 = f0
                elif op == TANH:
                    f0 = tanh(x)
                    f1 = 1.0 - f0 * f0
                    f2 = -2.0 * f0 * f1
                elif op == EXP:
                    f0 = exp(x)
                    f1 = f0
                    f2 = f0
                elif op == LOG:
                    if x <= 0.0:
                        status = t
                        break
                    f0 = log(x)
                    f1 = 1.0 / x
                    f2 = -f1 * f1
                elif op == SQRT:
                    if x <= 0.0:
                        status = t
                        break
                    f0 = sqrt(x)
                    f1 = 0.5 / f0
                    f2 = -f1 / (2.0 * x)
                elif op == ABS:
                    f0 = fabs(x)
                    if x > 0.0:
                        f1 = 1.0
                    elif x < 0.0:
                        f1 = -1.0
                    else:
                        f1 = 0.0
                    f2 = 0.0
                else:
                    status = t
                    break
                v = f0
                for i in range(nv):
                    grad[t, i] = f1 * grad[a, i]
                for i in range(nv):
                    for j in range(i, nv):
                        h = f1 * hess[a, i, j] + f2 * (grad[a, i] * grad[a, j])
                        hess[t, i, j] = h
                        hess[t, j, i] = h
            if not isfinite(v):
                status = t
                break
            val[t] = v
    return status
