import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from conftest import MESSY_FIELD, MESSY_METRIC
from oracles import ambient_mean_curvature, coords
from sasakimc import catalog
from sasakimc import mean_curvature as mc_module
from sasakimc.expr import Neg
from sasakimc.framefield import DegenerateSpectrum, UnitField, frame_at, local_geometry
from sasakimc.manifold import ChartMetric, sample_points
from sasakimc.mean_curvature import (
    ConsistencyError,
    DimensionError,
    NotGeodesic,
    NotIntegrable,
    foliation_mean_curvature_at,
    frenet_curvatures,
    mean_curvature_2d_at,
    mean_curvature_at,
    mean_curvature_frenet_at,
    mean_curvature_sh_at,
    strongly_normal_check,
    trace_components_at,
    volume_density_at,
)


def _mag(case, p):
    return mean_curvature_at(catalog.instantiate(*case).field, p).magnitude


# values of |H| from the ambient Sasaki-metric computation in oracles.py
FROZEN = [
    (("messy",), (0.2, 0.4, -0.3), 0.10811924585664064),
    (("messy",), (-0.5, 0.1, 0.6), 0.2755854236297364),
    (("messy",), (0.8, -0.7, 0.0), 0.2064596533572313),
    (("exp2uv", {}), (0.3, -0.8), 0.30264597881613997),
    (("warped2", {"gprofile": "u2", "wprofile": "quadratic", "c": 0.7}), (0.4, 0.6), 0.14458169138057583),
    (("lob_np1_vf2", {"n": 3, "theta": math.pi / 3, "a": 2.0}), (0.3, 0.1, 0.2, 0.3), 0.63029075511716),
]


@pytest.mark.parametrize("case, p, expected", FROZEN, ids=lambda x: str(x)[:30])
def test_frozen_ambient_values(messy, case, p, expected):
    f = messy if case[0] == "messy" else catalog.instantiate(*case).field
    assert mean_curvature_at(f, p).magnitude == pytest.approx(expected, rel=1e-12)


def _sym(table):
    co = coords(len(table))
    names = {str(c): c for c in co}
    return [[sp.sympify(t.replace("^", "**"), locals=names) for t in row] for row in table], co


@pytest.mark.parametrize("p", [(0.1, -0.6, 0.5)])
def test_vector_matches_ambient_oracle(messy, p):
    """Full mean-curvature vector, compared in natural coordinates of TM."""
    gm, co = _sym(MESSY_METRIC)
    V = _sym([MESSY_FIELD])[0][0]
    G = sp.Matrix(gm)
    nrm = sp.sqrt(sum(V[i] * G[i, j] * V[j] for i in range(3) for j in range(3)))
    H_ref, S = ambient_mean_curvature(gm, [c / nrm for c in V], co, p)
    H = mean_curvature_at(messy, p).vector.to_natural()
    np.testing.assert_allclose(H, H_ref, atol=1e-12)


def test_vector_matches_ambient_oracle_on_hyperbolic_space():
    co = coords(4)
    u = co[0]
    th, a = 0.7, -1.5
    gm = sp.diag(1, *[sp.exp(2 * u)] * 3)
    xi = [sp.cos(th), sp.sin(th) * sp.cos(a * u) * sp.exp(-u), sp.sin(th) * sp.sin(a * u) * sp.exp(-u), 0]
    p = (-0.2, 0.5, 0.1, -0.4)
    H_ref, _ = ambient_mean_curvature(gm, xi, co, p)
    f = catalog.instantiate("lob_np1_vf2", n=3, theta=th, a=a).field
    np.testing.assert_allclose(mean_curvature_at(f, p).vector.to_natural(), H_ref, atol=1e-12)


def test_spec_examples():
    assert _mag(("lobachevsky2", {"a": 1.0}), (0.3, -0.2)) == pytest.approx(1 / (2 * math.sqrt(3)), abs=1e-15)
    assert _mag(("exp2uv", {}), (0.0, 0.0)) == pytest.approx(0.5, abs=1e-15)
    h = mean_curvature_at(catalog.instantiate("lob_np1_vf1", n=3, theta=math.pi / 4).field, (0.1, 0.2, 0.3, 0.4))
    # H_1 = √2/12, H_2 = 3/8, H_3 = 0
    np.testing.assert_allclose(np.abs(h.components), [math.sqrt(2) / 12, 3 / 8, 0.0], atol=1e-14)


@pytest.mark.parametrize("p", sample_points([(-1, 1)] * 3, 10, seed=9).tolist())
def test_magnitude_and_trace(messy, p):
    h = mean_curvature_at(messy, p)
    assert h.magnitude**2 == pytest.approx(np.sum(h.components**2), abs=1e-12)
    explicit, trace = trace_components_at(messy, p)
    np.testing.assert_allclose(explicit, trace, atol=1e-10)


def test_consistency_error(monkeypatch, messy):
    real = mc_module._trace_components
    monkeypatch.setattr(mc_module, "_trace_components", lambda loc, fr: real(loc, fr) + 1e-6)
    with pytest.raises(ConsistencyError):
        mean_curvature_at(messy, (0.1, 0.1, 0.1))


@pytest.mark.parametrize(
    "case",
    [("lob_np1_vf2", {"n": 3, "theta": 0.9, "a": 2.0}), ("exp2uv", {}), ("lob_np1_vf1", {"n": 4, "theta": 0.6})],
)
@pytest.mark.parametrize("seed", range(4))
def test_magnitude_independent_of_svd_basis(case, seed):
    f = catalog.instantiate(*case).field
    rng = np.random.default_rng(seed)
    for p in sample_points(f.host.domain, 5, seed=seed):
        ref = mean_curvature_at(f, p).magnitude
        assert mean_curvature_at(f, p, rng=rng).magnitude == pytest.approx(ref, abs=1e-8)


@given(st.floats(-0.95, 0.95), st.floats(-0.95, 0.95))
def test_reversing_field_keeps_magnitude(u, v):
    for case in [("lobachevsky2", {"a": 1.5, "b": 0.2}), ("exp2uv", {}), ("warped2", {"gprofile": "logcosh", "wprofile": "quadratic", "c": 1.3})]:
        f = catalog.instantiate(*case).field
        neg = UnitField(tuple(Neg(c) for c in f.components), f.host)
        assert mean_curvature_at(neg, (u, v)).magnitude == pytest.approx(mean_curvature_at(f, (u, v)).magnitude, abs=1e-8)


@pytest.mark.parametrize("p", [(0.0, 1.0), (0.5, -0.5), (-0.9, 0.3), (0.4, 0.0), (0.0, 0.0)])
def test_surface_routes_on_exp2uv(p):
    u, v = p
    f = catalog.instantiate("exp2uv").field
    expected = math.exp(-u * v) / (2 * (1 + v * v) ** 1.5)
    assert abs(mean_curvature_2d_at(f, p)) == pytest.approx(expected, abs=1e-7)
    assert abs(mean_curvature_frenet_at(f, p)) == pytest.approx(expected, abs=1e-7)


def test_surface_route_value_at_unit_v():
    assert abs(mean_curvature_2d_at(catalog.instantiate("exp2uv").field, (0.0, 1.0))) == pytest.approx(
        1 / (2 * 2**1.5), abs=1e-9
    )


@pytest.mark.parametrize("gprofile", ["u", "u2", "logcosh"])
@pytest.mark.parametrize("wprofile, c", [("const", 0.4), ("linear", -0.8), ("quadratic", 1.2)])
def test_warped_surfaces(gprofile, wprofile, c):
    e = catalog.instantiate("warped2", gprofile=gprofile, wprofile=wprofile, c=c)
    for p in sample_points(e.metric.domain, 5, seed=6):
        h = mean_curvature_at(e.field, p).magnitude
        assert h == pytest.approx(e.expected(p).magnitude, abs=1e-12)
        assert abs(mean_curvature_2d_at(e.field, p)) == pytest.approx(h, abs=1e-7)
        if wprofile != "quadratic":
            assert h < 1e-12


def test_sh_route_matches_on_nondegenerate_fields():
    for case in [("lob_np1_vf2", {"n": 3, "theta": 0.9, "a": 2.0}), ("lob_np1_vf2", {"n": 2, "theta": 1.2, "a": 0.5})]:
        f = catalog.instantiate(*case).field
        for p in sample_points(f.host.domain, 3, seed=1):
            sh = mean_curvature_sh_at(f, p)
            ref = mean_curvature_at(f, p)
            assert sh.magnitude == pytest.approx(ref.magnitude, abs=1e-5)
            np.testing.assert_allclose(sh.components, ref.components, atol=1e-5)


def test_sh_route_on_constant_lambda_surface():
    f = catalog.instantiate("lobachevsky2", a=2.0, b=0.5).field
    p = (0.2, 0.3)
    assert abs(mean_curvature_sh_at(f, p).magnitude - abs(mean_curvature_2d_at(f, p))) <= 1e-6


def test_sh_route_rejects_degenerate():
    with pytest.raises(DegenerateSpectrum):
        mean_curvature_sh_at(catalog.instantiate("euclidean", n=2).field, (0.0, 0.0, 0.0))


def test_surface_routes_need_two_dimensions(messy):
    with pytest.raises(DimensionError):
        mean_curvature_2d_at(messy, (0.0, 0.0, 0.0))
    with pytest.raises(DimensionError):
        mean_curvature_frenet_at(messy, (0.0, 0.0, 0.0))


def test_frenet_geodesic_field_reduces_to_corollary():
    """k = 0 for a geodesic field, so H = −½ η(κ/√(1+κ²))."""
    f = catalog.instantiate("exp2uv").field
    p = np.array([0.3, 0.4])
    k, kappa = frenet_curvatures(f, p)
    assert abs(k) < 1e-14
    loc = local_geometry(f, p)
    y = loc.to_ortho(loc.xi)
    eta = loc.from_ortho(np.array([-y[1], y[0]]))
    h = 1e-4

    def ratio(q):
        kap = frenet_curvatures(f, q)[1]
        return kap / math.sqrt(1 + kap * kap)

    d = (ratio(p + h * eta) - ratio(p - h * eta)) / (2 * h)
    assert mean_curvature_frenet_at(f, p) == pytest.approx(-0.5 * d, abs=1e-7)


def test_radial_field_on_hyperbolic_plane():
    f = catalog.instantiate("hyperbolic_radial").field
    for p in sample_points(f.host.domain, 5, seed=2):
        # κ = coth u for the circles u = const
        assert abs(frenet_curvatures(f, p)[1]) == pytest.approx(1 / math.tanh(p[0]), rel=1e-12)
        assert abs(mean_curvature_frenet_at(f, p)) < 1e-8
        assert mean_curvature_at(f, p).magnitude < 1e-12


@pytest.mark.parametrize("n", [2, 3, 5])
def test_horosphere_foliation(n):
    f = catalog.instantiate("lob_np1_vf1", n=n, theta=0.0).field
    for p in sample_points(f.host.domain, 3, seed=3):
        fol = foliation_mean_curvature_at(f, p)
        assert np.max(np.abs(fol)) < 1e-7
        assert mean_curvature_at(f, p).magnitude < 1e-12


def test_foliation_route_on_exp2uv():
    f = catalog.instantiate("exp2uv").field
    for p in sample_points(f.host.domain, 5, seed=4):
        fol = foliation_mean_curvature_at(f, p)
        assert abs(fol[0]) == pytest.approx(mean_curvature_at(f, p).magnitude, abs=1e-7)


def test_foliation_by_hyperplanes():
    f = catalog.instantiate("euclidean", n=3).field
    np.testing.assert_allclose(foliation_mean_curvature_at(f, (0.1, 0.2, 0.3, 0.4)), 0.0, atol=1e-12)


def test_foliation_preconditions():
    with pytest.raises(NotGeodesic):
        foliation_mean_curvature_at(catalog.instantiate("lobachevsky2", a=1.0).field, (0.1, 0.1))
    with pytest.raises(NotIntegrable):
        foliation_mean_curvature_at(catalog.instantiate("sphere3_hopf").field, (0.7, 0.1, 0.2))


def test_foliation_needs_geodesic_normal_of_sphere_family():
    m = ChartMetric.from_strings({(0, 0): "1", (1, 1): "sin(u0)^2"}, [(0.3, 2.8), (-3, 3)])
    f = UnitField.from_strings(m, ["cos(u1)", "sin(u1)/sin(u0)"])
    with pytest.raises(NotGeodesic):
        foliation_mean_curvature_at(f, (1.0, 0.4))


@pytest.mark.parametrize("a", [0.0, 1.0, 3.0])
def test_volume_density(a):
    assert volume_density_at(catalog.instantiate("euclidean", n=2).field, (0, 0, 0)) == 1.0
    f = catalog.instantiate("lobachevsky2", a=a).field
    assert volume_density_at(f, (0.2, 0.1)) == pytest.approx(math.sqrt(2 + a * a), rel=1e-13)
    vf1 = catalog.instantiate("lob_np1_vf1", n=3, theta=math.pi / 3).field
    assert volume_density_at(vf1, (0.1, 0.0, 0.0, 0.0)) == pytest.approx(2 * math.sqrt(1.25), rel=1e-13)


def test_volume_density_at_least_one(messy):
    for p in sample_points(messy.host.domain, 10, seed=0):
        loc = local_geometry(messy, p)
        lam = frame_at(loc).lam
        assert volume_density_at(messy, p) == pytest.approx(np.prod(np.sqrt(1 + lam**2)), rel=1e-14)
        assert volume_density_at(messy, p) >= 1.0


@pytest.mark.parametrize(
    "case, geodesic, strong",
    [
        (("sphere3_hopf", {}), True, True),
        (("euclidean", {"n": 2}), True, True),
        (("exp2uv", {}), True, False),
        (("lobachevsky2", {"a": 1.0}), False, False),
    ],
)
def test_strongly_normal_check(case, geodesic, strong):
    f = catalog.instantiate(*case).field
    for p in sample_points(f.host.domain, 5, seed=5):
        rep = strongly_normal_check(f, p)
        assert rep.is_geodesic is geodesic
        if geodesic:
            assert rep.is_strongly_normal is strong
        if rep.is_geodesic and rep.is_strongly_normal:
            assert mean_curvature_at(f, p).magnitude < 1e-7
