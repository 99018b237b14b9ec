"""Compare the compiled and pure-Python jet kernels.

Run ``python3 benchmarks/bench_kernel.py``. For each backend it times the
raw tape kernel, metric jets of an expression-heavy chart metric, and full
mean-curvature evaluations (closed form and frame-derivative route) with the
kernel swapped in. The last two are dominated by dense linear algebra, so
the kernel speedup shows mostly in the first two columns.
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from sasakimc import catalog
from sasakimc.expr import _kernel_py
from sasakimc.expr import jet as jet_module
from sasakimc.manifold import ChartMetric
from sasakimc.mean_curvature import mean_curvature_at, mean_curvature_sh_at

try:
    from sasakimc.expr import _kernel as _kernel_c
except ImportError:  # pragma: no cover
    _kernel_c = None

BUSY_METRIC = {
    (0, 0): "2 + sin(u0*u1)^2 + exp(-u2^2)",
    (1, 1): "3 + cos(u1 + u2)*tanh(u0) + u0^2/(1 + u1^2)",
    (2, 2): "2 + log(2 + u0^2 + u1^2)*cosh(u2/3)",
    (0, 1): "0.3*sin(u0 + 2*u1)*exp(-u2^2/4)",
    (0, 2): "0.2*cos(u0*u2)/(1 + u1^2)",
    (1, 2): "0.1*sqrt(1 + u0^2 + u2^2)*sin(u1)",
}


def _tape_call(kernel, tape, point):
    m = len(tape)
    dim = tape.dim
    val = np.empty(m)
    grad = np.empty((m, dim))
    hess = np.empty((m, dim, dim))

    def call():
        kernel.run_tape(tape.ops, tape.arg0, tape.arg1, tape.consts, point, val, grad, hess)

    return call


def _best(fn, number: int, repeat: int) -> float:
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    # distinct singular values, so the frame-derivative route applies
    entry = catalog.instantiate("lob_np1_vf2", n=3, theta=np.pi / 3, a=2.0)
    point = np.ascontiguousarray(entry.metric.center, dtype=float)
    busy = ChartMetric.from_strings(BUSY_METRIC, [(-1.0, 1.0)] * 3)
    busy_tape = busy._compiled.tape
    busy_point = np.array([0.3, -0.2, 0.5])

    kernels = [("python", _kernel_py)]
    if _kernel_c is not None:
        kernels.insert(0, ("cython", _kernel_c))

    print(f"busy metric tape: {len(busy_tape)} instructions; field: lob_np1_vf2 n=3")
    header = ("backend", "tape (us)", "metric jets (us)", "H (ms)", "H via frames (ms)")
    print(f"{header[0]:<8} {header[1]:>10} {header[2]:>17} {header[3]:>8} {header[4]:>18}")
    rows = {}
    original = jet_module.run_tape
    try:
        for name, kern in kernels:
            jet_module.run_tape = kern.run_tape
            mean_curvature_sh_at(entry.field, point)
            t = (
                _best(_tape_call(kern, busy_tape, busy_point), 200, args.repeat),
                _best(lambda: busy.jets(busy_point), 200, args.repeat),
                _best(lambda: mean_curvature_at(entry.field, point), 20, args.repeat),
                _best(lambda: mean_curvature_sh_at(entry.field, point), 3, args.repeat),
            )
            rows[name] = t
            print(f"{name:<8} {t[0] * 1e6:10.2f} {t[1] * 1e6:17.2f} {t[2] * 1e3:8.3f} {t[3] * 1e3:18.3f}")
    finally:
        jet_module.run_tape = original
    if len(rows) == 2:
        pairs = zip(("tape", "metric jets", "H", "frames"), rows["cython"], rows["python"])
        print("speedup: " + ", ".join(f"{k} {b / a:.2f}x" for k, a, b in pairs))


if __name__ == "__main__":
    main()
