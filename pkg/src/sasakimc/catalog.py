"""Built-in manifold and field pairs with closed-form expected answers."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from .expr import ExprError, parse
from .expr.ast import constant_value
from .framefield import UnitField
from .manifold import ChartMetric


class CatalogError(ValueError):
    pass


@dataclass(frozen=True)
class ParamSpec:
    name: str
    kind: str  # "real", "int" or "choice"
    default: object
    low: float | None = None
    high: float | None = None
    choices: tuple[str, ...] = ()

    def describe(self) -> str:
        if self.kind == "choice":
            return f"{self.name} in {{{', '.join(self.choices)}}} (default {self.default})"
        return f"{self.name}: {self.kind} in [{_fmt(self.low)}, {_fmt(self.high)}] (default {_fmt(self.default)})"

    def coerce(self, raw) -> object:
        if self.kind == "choice":
            value = str(raw).strip()
            if value not in self.choices:
                raise CatalogError(f"parameter {self.name}={value!r} not one of {list(self.choices)}")
            return value
        if isinstance(raw, str):
            try:
                value = constant_value(parse(raw, 0))
            except ExprError as exc:
                raise CatalogError(f"parameter {self.name}: {exc}") from None
        else:
            value = float(raw)
        if self.kind == "int":
            if value != int(value):
                raise CatalogError(f"parameter {self.name} must be an integer, got {value!r}")
            value = int(value)
        if not (self.low <= value <= self.high):
            raise CatalogError(
                f"parameter {self.name}={value!r} outside [{_fmt(self.low)}, {_fmt(self.high)}]"
            )
        return value


def _fmt(x) -> str:
    if isinstance(x, float) and x == round(x, 6):
        return repr(round(x, 6))
    return repr(x)


@dataclass(frozen=True)
class Expected:
    """Closed-form answer at one point.

    ``components`` lists ``(λ, |H_σ|)`` in the reference labelling; match
    computed components by singular value, taking ties in order.
    ``spectrum`` is λ_1..λ_n followed by 0, sorted descending.
    """

    magnitude: float
    components: tuple[tuple[float, float], ...] | None = None
    spectrum: tuple[float, ...] | None = None


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    metric: ChartMetric
    field: UnitField
    expected: Callable[[np.ndarray], Expected]
    params: Mapping[str, object]
    provenance: str
    description: str = ""

    @property
    def dim(self) -> int:
        return self.metric.dim


@dataclass(frozen=True)
class _Recipe:
    name: str
    params: tuple[ParamSpec, ...]
    provenance: str
    build: Callable[..., CatalogEntry]
    description: str = field(default="")


def _spectrum(lams) -> tuple[float, ...]:
    return tuple(sorted([abs(float(x)) for x in lams] + [0.0], reverse=True))


def _num(x: float) -> str:
    return repr(float(x))


def _lobachevsky2(a: float, b: float) -> CatalogEntry:
    metric = ChartMetric.from_strings({(0, 0): "1", (1, 1): "exp(2*u0)"}, [(-1.0, 1.0), (-1.0, 1.0)])
    w = f"({_num(a)}*u0 + {_num(b)})"
    fld = UnitField.from_strings(metric, [f"cos{w}", f"sin{w}*exp(-u0)"])
    lam = math.sqrt(1.0 + a * a)
    h = abs(a) / (2.0 * math.sqrt(2.0 + a * a))

    def expected(p):
        return Expected(h, ((lam, h),), _spectrum([lam]))

    return CatalogEntry("lobachevsky2", metric, fld, expected, {"a": a, "b": b},
                        "Lobachevsky plane, field at angle a*u+b to the u-geodesics: |H| = a/(2 sqrt(2+a^2))")


def _exp2uv() -> CatalogEntry:
    metric = ChartMetric.from_strings({(0, 0): "1", (1, 1): "exp(2*u0*u1)"}, [(-1.0, 1.0), (-1.0, 1.0)])
    fld = UnitField.from_strings(metric, ["1", "0"])

    def expected(p):
        u, v = float(p[0]), float(p[1])
        h = math.exp(-u * v) / (2.0 * (1.0 + v * v) ** 1.5)
        return Expected(h, ((abs(v), h),), _spectrum([v]))

    return CatalogEntry("exp2uv", metric, fld, expected, {},
                        "geodesic but not strongly normal field on ds^2 = du^2 + exp(2uv) dv^2")


_WARP = {
    # name: (exp(2g) text, exp(-g) text, g, g')
    "u": ("exp(2*u0)", "exp(-u0)", lambda u: u, lambda u: 1.0),
    "u2": ("exp(u0^2)", "exp(-u0^2/2)", lambda u: u * u / 2, lambda u: u),
    "logcosh": ("cosh(u0)^2", "1/cosh(u0)", lambda u: math.log(math.cosh(u)), lambda u: math.tanh(u)),
}
_ANGLE = {
    # name: (ω text given c, ω_v, ω_vv)
    "const": (lambda c: f"{_num(c)}", lambda c, v: 0.0, lambda c, v: 0.0),
    "linear": (lambda c: f"{_num(c)}*u1", lambda c, v: c, lambda c, v: 0.0),
    "quadratic": (lambda c: f"{_num(c)}*u1^2/2", lambda c, v: c * v, lambda c, v: c),
}


def _warped2(gprofile: str, wprofile: str, c: float) -> CatalogEntry:
    e2g, emg, g, dg = _WARP[gprofile]
    wtext, wv, wvv = _ANGLE[wprofile]
    metric = ChartMetric.from_strings({(0, 0): "1", (1, 1): e2g}, [(-1.0, 1.0), (-1.0, 1.0)])
    w = f"({wtext(c)})"
    fld = UnitField.from_strings(metric, [f"cos{w}", f"sin{w}*({emg})"])

    def expected(p):
        u, v = float(p[0]), float(p[1])
        emgu = math.exp(-g(u))
        lam = emgu * wv(c, v) + dg(u)
        h = abs(emgu * emgu * wvv(c, v)) / (2.0 * (1.0 + lam * lam) ** 1.5)
        return Expected(h, ((abs(lam), h),), _spectrum([lam]))

    return CatalogEntry("warped2", metric, fld, expected, {"gprofile": gprofile, "wprofile": wprofile, "c": c},
                        "warped surface ds^2 = du^2 + exp(2g(u)) dv^2, field parallel along u-geodesics")


def _horospherical(n: int) -> ChartMetric:
    entries = {(0, 0): "1"}
    for i in range(1, n + 1):
        entries[(i, i)] = "exp(2*u0)"
    return ChartMetric.from_strings(entries, [(-1.0, 1.0)] * (n + 1))


def _lob_field(metric: ChartMetric, n: int, theta: float, a: float) -> UnitField:
    s, c = math.sin(theta), math.cos(theta)
    comps = [_num(c), f"{_num(s)}*cos({_num(a)}*u0)*exp(-u0)", f"{_num(s)}*sin({_num(a)}*u0)*exp(-u0)"]
    comps += ["0"] * (n - 2)

    def hint(p):
        # reference singular frame, rows e_0..e_n, in terms of X_0 = ∂_u, X_k = e^{-u} ∂_k
        u = float(p[0])
        cu, su = math.cos(a * u), math.sin(a * u)
        eu = math.exp(-u)
        E = np.zeros((n + 1, n + 1))
        E[0, :3] = [c, s * su * eu, -s * cu * eu]
        E[1, :3] = [0.0, cu * eu, su * eu]
        E[2, :3] = [s, -c * su * eu, c * cu * eu]
        for k in range(3, n + 1):
            E[k, k] = eu
        return E

    return UnitField.from_strings(metric, comps, frame_hint=hint)


def _lob_expected(n: int, theta: float, a: float):
    s, c = math.sin(theta), math.cos(theta)
    lam2 = math.sqrt(c * c + a * a * s * s)
    d = 1.0 + c * c + a * a * s * s
    h1 = abs(math.sqrt(2.0) * s * c / (n + 1) * ((1.0 - a * a) / d + (n - 2) / (1.0 + c * c)))
    h2 = abs(a * n * s / ((n + 1) * math.sqrt(d)))
    comps = ((1.0, h1), (lam2, h2)) + ((abs(c), 0.0),) * (n - 2)
    result = Expected(math.hypot(h1, h2), comps, _spectrum([1.0, lam2] + [c] * (n - 2)))
    return lambda p: result


def _lob_vf1(n: int, theta: float) -> CatalogEntry:
    metric = _horospherical(n)
    fld = _lob_field(metric, n, theta, 1.0)
    s, c = math.sin(theta), math.cos(theta)
    h1 = abs((n - 2) / (n + 1) * math.sqrt(2.0) * s * c / (1.0 + c * c))
    h2 = abs(n * math.sqrt(2.0) * s / (2.0 * (n + 1)))
    comps = ((1.0, h1), (1.0, h2)) + ((abs(c), 0.0),) * (n - 2)
    result = Expected(math.hypot(h1, h2), comps, _spectrum([1.0, 1.0] + [c] * (n - 2)))
    return CatalogEntry("lob_np1_vf1", metric, fld, lambda p: result, {"n": n, "theta": theta},
                        "Lobachevsky (n+1)-space, field cos(t) X0 + sin(t)(cos(u) X1 + sin(u) X2)")


def _lob_vf2(n: int, theta: float, a: float) -> CatalogEntry:
    metric = _horospherical(n)
    fld = _lob_field(metric, n, theta, a)
    return CatalogEntry("lob_np1_vf2", metric, fld, _lob_expected(n, theta, a), {"n": n, "theta": theta, "a": a},
                        "Lobachevsky (n+1)-space, field cos(t) X0 + sin(t)(cos(au) X1 + sin(au) X2)")


def _hyperbolic_radial() -> CatalogEntry:
    metric = ChartMetric.from_strings({(0, 0): "1", (1, 1): "sinh(u0)^2"}, [(0.2, 3.0), (-math.pi, math.pi)])
    fld = UnitField.from_strings(metric, ["1", "0"])

    def expected(p):
        lam = 1.0 / math.tanh(float(p[0]))
        return Expected(0.0, ((lam, 0.0),), _spectrum([lam]))

    return CatalogEntry("hyperbolic_radial", metric, fld, expected, {},
                        "radial field of the hyperbolic plane in geodesic polar coordinates")


def _sphere3_hopf() -> CatalogEntry:
    metric = ChartMetric.from_strings(
        {(0, 0): "1", (1, 1): "cos(u0)^2", (2, 2): "sin(u0)^2"},
        [(0.1, math.pi / 2 - 0.1), (-math.pi, math.pi), (-math.pi, math.pi)],
    )
    fld = UnitField.from_strings(metric, ["0", "1", "1"])
    result = Expected(0.0, ((1.0, 0.0), (1.0, 0.0)), _spectrum([1.0, 1.0]))
    return CatalogEntry("sphere3_hopf", metric, fld, lambda p: result, {},
                        "Hopf field on the unit 3-sphere in Hopf coordinates")


def _euclidean(n: int) -> CatalogEntry:
    N = n + 1
    metric = ChartMetric.from_strings({(i, i): "1" for i in range(N)}, [(-1.0, 1.0)] * N)
    fld = UnitField.from_strings(metric, ["1"] + ["0"] * n)
    result = Expected(0.0, ((0.0, 0.0),) * n, _spectrum([0.0] * n))
    return CatalogEntry("euclidean", metric, fld, lambda p: result, {"n": n},
                        "Euclidean (n+1)-space with a constant field")


_RECIPES: dict[str, _Recipe] = {
    r.name: r
    for r in [
        _Recipe("lobachevsky2", (ParamSpec("a", "real", 1.0, -100.0, 100.0), ParamSpec("b", "real", 0.0, -100.0, 100.0)),
                "Lobachevsky plane example with constant mean curvature a/(2 sqrt(2+a^2))", _lobachevsky2),
        _Recipe("exp2uv", (), "geodesic, not strongly normal example with |H| = exp(-uv)/(2(1+v^2)^(3/2))", _exp2uv),
        _Recipe("warped2", (ParamSpec("gprofile", "choice", "u", choices=tuple(_WARP)),
                            ParamSpec("wprofile", "choice", "const", choices=tuple(_ANGLE)),
                            ParamSpec("c", "real", 0.0, -100.0, 100.0)),
                "fields parallel along u-geodesics on warped surfaces", _warped2),
        _Recipe("lob_np1_vf1", (ParamSpec("n", "int", 3, 2, 8), ParamSpec("theta", "real", math.pi / 4, 0.0, math.pi / 2)),
                "constant mean curvature field on Lobachevsky (n+1)-space", _lob_vf1),
        _Recipe("lob_np1_vf2", (ParamSpec("n", "int", 3, 2, 8), ParamSpec("theta", "real", math.pi / 4, 0.0, math.pi / 2),
                                ParamSpec("a", "real", 2.0, -100.0, 100.0)),
                "family of constant mean curvature fields on Lobachevsky (n+1)-space", _lob_vf2),
        _Recipe("hyperbolic_radial", (), "radial field on the hyperbolic plane (minimal)", _hyperbolic_radial),
        _Recipe("sphere3_hopf", (), "Hopf field on the 3-sphere (strongly normal geodesic, minimal)", _sphere3_hopf),
        _Recipe("euclidean", (ParamSpec("n", "int", 1, 1, 8),), "constant field on Euclidean (n+1)-space (minimal)", _euclidean),
    ]
}


def names() -> list[str]:
    return sorted(_RECIPES)


def param_specs(name: str) -> tuple[ParamSpec, ...]:
    return _recipe(name).params


def _recipe(name: str) -> _Recipe:
    try:
        return _RECIPES[name]
    except KeyError:
        raise CatalogError(f"unknown catalog entry {name!r}; known: {', '.join(names())}") from None


def instantiate(name: str, params: Mapping[str, object] | None = None, **kwargs) -> CatalogEntry:
    """Build a catalog entry.

    Parameters may be numbers or text such as ``"pi/4"``; unknown or
    out-of-range parameters raise :class:`CatalogError`.
    """
    recipe = _recipe(name)
    given = dict(params or {})
    given.update(kwargs)
    known = {p.name for p in recipe.params}
    extra = sorted(set(given) - known)
    if extra:
        raise CatalogError(f"{name} has no parameter(s) {', '.join(extra)}")
    values = {p.name: p.coerce(given[p.name]) if p.name in given else p.default for p in recipe.params}
    return recipe.build(**values)


@dataclass(frozen=True)
class ListingRow:
    name: str
    params: tuple[str, ...]
    provenance: str


def listing() -> list[ListingRow]:
    return [
        ListingRow(n, tuple(p.describe() for p in _RECIPES[n].params), _RECIPES[n].provenance)
        for n in names()
    ]


def match_components(lam, expected_components, tol: float = 1e-6) -> list[int | None]:
    """Index of the computed component paired with each expected one.

    Pairs by singular value; equal values are taken in order, which relies on
    the field's reference frame inside degenerate clusters.
    """
    used: set[int] = set()
    out: list[int | None] = []
    for target, _ in expected_components:
        pick = None
        for j, value in enumerate(lam):
            if j not in used and abs(abs(value) - target) < tol:
                pick = j
                break
        if pick is not None:
            used.add(pick)
        out.append(pick)
    return out
