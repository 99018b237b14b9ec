"""Random smooth expressions for derivative and printer tests.

Every generated expression is finite and smooth on the box [-1, 1]^dim:
log and sqrt only see arguments bounded away from zero, division only by
quantities bounded below, and exp only of bounded arguments.
"""

from __future__ import annotations

import numpy as np
from hypothesis import strategies as st


def _wrap(kind: str, a: str, b: str) -> str:
    return {
        "add": f"({a}) + ({b})",
        "sub": f"({a}) - ({b})",
        "mul": f"({a})*({b})",
        "div": f"({a})/(2 + sin({b}))",
        "sin": f"sin({a})",
        "cos": f"cos({a})",
        "tanh": f"tanh({a})",
        "exp": f"exp(tanh({a}))",
        "log": f"log(3 + cos({a}))",
        "sqrt": f"sqrt(2 + sin({a}))",
        "sinh": f"sinh(tanh({a}))",
        "cosh": f"cosh(tanh({a}))",
        "tan": f"tan(tanh({a})/2)",
        "square": f"({a})^2",
        "cube": f"-({a})^3",
        "rpow": f"(2 + cos({a}))^1.5",
        "abs": f"abs(2 + sin({a}))",
        "neg": f"-({a})",
    }[kind]


KINDS = (
    "add", "sub", "mul", "div", "sin", "cos", "tanh", "exp", "log", "sqrt",
    "sinh", "cosh", "tan", "square", "cube", "rpow", "abs", "neg",
)  # fmt: skip


def random_expression(rng: np.random.Generator, dim: int, depth: int = 4) -> str:
    """Seeded counterpart of :func:`expressions`, for fixed-size suites."""
    if depth == 0 or rng.random() < 0.2:
        if rng.random() < 0.7:
            return f"u{rng.integers(dim)}"
        return repr(round(float(rng.uniform(-2, 2)), 3))
    kind = KINDS[rng.integers(len(KINDS))]
    return _wrap(kind, random_expression(rng, dim, depth - 1), random_expression(rng, dim, depth - 1))


def expressions(dim: int, max_leaves: int = 12):
    """Hypothesis strategy producing expression text over ``u0..u{dim-1}``."""
    leaves = st.one_of(
        st.integers(0, dim - 1).map(lambda k: f"u{k}"),
        st.floats(-2, 2, allow_nan=False).map(lambda x: repr(round(x, 3))),
        st.sampled_from(["pi", "e"]),
    )

    def extend(children):
        return st.builds(_wrap, st.sampled_from(KINDS), children, children)

    return st.recursive(leaves, extend, max_leaves=max_leaves)


def box_points(dim: int):
    return st.lists(st.floats(-1, 1, allow_nan=False), min_size=dim, max_size=dim).map(np.array)
