"""Mean curvature of ξ(M) in the unit tangent bundle.

:func:`mean_curvature_at` is the primary route: an explicit contraction of
the r-tensor and curvature in the singular frame, checked in-process against
the trace of the second fundamental form. The other routes (frame
derivatives, the surface formula, geodesic curvatures, principal
curvatures of a hyperfoliation) need numerical derivatives and serve as
independent cross-checks.

Signed components follow the normals ñ_σ = (λ_σ e_σ^H − f_σ^V)/√(1+λ_σ²).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .framefield import (
    SingularFrame,
    UnitField,
    _perp_basis,
    aligned_frame_field,
    frame_at,
    local_geometry,
    LocalGeometry,
    ZERO_LAMBDA,
)
from .manifold import GeometryError
from .sasaki import LiftedVector, frames_from_local, second_form_from_local

AGREEMENT_TOL = 1e-10
PRECONDITION_TOL = 1e-8


class ConsistencyError(RuntimeError):
    """Two in-process evaluations of the same quantity disagree."""


class DimensionError(GeometryError):
    pass


class NotGeodesic(GeometryError):
    pass


class NotIntegrable(GeometryError):
    pass


@dataclass(frozen=True)
class MeanCurvature:
    components: np.ndarray
    vector: LiftedVector
    magnitude: float
    degenerate_flag: bool
    lam: np.ndarray


def _explicit_components(loc: LocalGeometry, frame: SingularFrame) -> np.ndarray:
    """Signed components from the r/R contraction (ñ_σ orientation)."""
    N = loc.dim
    n = N - 1
    e0, es, fs, lam = frame.e[0], frame.e[1:], frame.f, frame.lam
    out = np.zeros(n)
    r00 = loc.r(e0, e0)
    raa = [loc.r(e, e) for e in es]
    for s in range(n):
        total = loc.ip(r00, fs[s])
        for a in range(n):
            term = loc.ip(raa[a], fs[s]) + lam[s] * lam[a] * loc.ip(loc.curv(es[s], es[a]), fs[a])
            total += term / (1.0 + lam[a] ** 2)
        out[s] = -total / (N * np.sqrt(1.0 + lam[s] ** 2))
    return out


def _trace_components(loc: LocalGeometry, frame: SingularFrame) -> np.ndarray:
    omega = second_form_from_local(loc, frame).omega
    weights = 1.0 / (1.0 + frame.lam_full**2)
    return np.einsum("sii,i->s", omega, weights) / loc.dim


def _assemble(loc: LocalGeometry, frame: SingularFrame, comps: np.ndarray) -> MeanCurvature:
    frames = frames_from_local(loc, frame)
    N = loc.dim
    vec = LiftedVector(np.zeros(N), np.zeros(N), frames.tangent[0].base_point)
    for h, nrm in zip(comps, frames.normal):
        vec = vec + nrm * float(h)
    return MeanCurvature(comps, vec, float(np.sqrt(np.sum(comps**2))), frame.degenerate, frame.lam)


def mean_curvature_at(f: UnitField, p, rng: np.random.Generator | None = None) -> MeanCurvature:
    """Mean-curvature vector of ξ(M) at the point over ``p``.

    Parameters
    ----------
    f : UnitField
    p : array
        Chart point inside the domain.
    rng : numpy Generator, optional
        Re-seeds the SVD basis; |H| must not depend on it.

    Raises
    ------
    ConsistencyError
        If the explicit formula and the second-form trace disagree.
    """
    loc = local_geometry(f, p)
    frame = frame_at(loc, f, rng=rng)
    comps = _explicit_components(loc, frame)
    trace = _trace_components(loc, frame)
    scale = max(1.0, float(np.max(np.abs(comps), initial=0.0)))
    if np.max(np.abs(comps - trace), initial=0.0) > AGREEMENT_TOL * scale:
        raise ConsistencyError(
            f"explicit and trace mean curvature differ by {np.max(np.abs(comps - trace)):.3g}"
        )
    return _assemble(loc, frame, comps)


def trace_components_at(f: UnitField, p) -> tuple[np.ndarray, np.ndarray]:
    """Explicit and second-form-trace components side by side."""
    loc = local_geometry(f, p)
    frame = frame_at(loc, f)
    return _explicit_components(loc, frame), _trace_components(loc, frame)


def mean_curvature_sh_at(f: UnitField, p, h: float | None = None) -> MeanCurvature:
    """Route through derivatives of the frame fields and singular values.

    Raises :class:`~sasakimc.framefield.DegenerateSpectrum` or
    :class:`~sasakimc.framefield.AlignmentFailure` where frames cannot be
    differentiated.
    """
    af = aligned_frame_field(f, p, h)
    frame = af.frame
    loc = local_geometry(f, p)
    N = loc.dim
    n = N - 1
    lam = frame.lam_full
    E, F = af.E, af.F
    # G[i, s] = E_{i|is} − F_{i|is}, with f_0 = 0
    G = np.zeros((N, N))
    for i in range(N):
        for s in range(1, N):
            G[i, s] = E[i, i, s] - (F[i, i - 1, s - 1] if i >= 1 else 0.0)
    dlam = np.zeros((N, N))
    dlam[:, 1:] = af.dlam
    out = np.zeros(n)
    for s in range(1, N):
        ls = lam[s]
        total = 0.0
        for i in range(N):
            rterm = 0.0
            if i >= 1:
                rterm = (lam[i] * ls - 1.0) * loc.ip(loc.curv(frame.e[s], frame.e[i]), frame.f[i - 1])
            total += (dlam[s, i] - (lam[i] + ls) * G[i, s] + rterm) / (1.0 + lam[i] ** 2)
        out[s - 1] = -total / (N * np.sqrt(1.0 + ls * ls))
    return _assemble(loc, frame, out)


def _directional(fun: Callable[[np.ndarray], np.ndarray], p: np.ndarray, X: np.ndarray, step: float):
    """Fourth-order central difference of ``fun`` along the line p + tX."""
    vals = [np.asarray(fun(p + t * step * X), dtype=float) for t in (2.0, 1.0, -1.0, -2.0)]
    return (-vals[0] + 8.0 * vals[1] - 8.0 * vals[2] + vals[3]) / (12.0 * step)


def _fd_step(f: UnitField, h: float | None) -> float:
    return 1e-4 * f.host.scale if h is None else h


def _require_2d(f: UnitField) -> None:
    if f.dim != 2:
        raise DimensionError(f"this route needs a 2-dimensional manifold, got dimension {f.dim}")


def _signed_singular(loc: LocalGeometry, d: np.ndarray | None) -> tuple[float, np.ndarray]:
    """Signed singular value and e_1 from w = (∇ξ)*η, oriented along ``d``."""
    eta = _rotated(loc)
    w = loc.ginv @ loc.nabla @ loc.g @ eta
    nrm = float(np.sqrt(max(loc.ip(w, w), 0.0)))
    if nrm == 0.0:
        return 0.0, np.zeros_like(w) if d is None else d
    sgn = 1.0 if d is None or loc.ip(w, d) >= 0 else -1.0
    return sgn * nrm, sgn * w / nrm


def _e1_direction(f: UnitField, loc: LocalGeometry, step: float) -> np.ndarray | None:
    """Unit e_1 at ``loc``, continued from neighbours where the singular value vanishes."""
    lam, e1 = _signed_singular(loc, None)
    if lam > 1e-6:
        return e1
    best, best_norm = None, 0.0
    for m in range(loc.dim):
        q = loc.point.copy()
        q[m] += step
        wp = local_geometry(f, q, check_domain=False)
        q[m] -= 2 * step
        wm = local_geometry(f, q, check_domain=False)
        lp, ep = _signed_singular(wp, None)
        lm, em = _signed_singular(wm, None)
        diff = lp * ep - lm * em
        nrm = float(np.sqrt(max(loc.ip(diff, diff), 0.0)))
        if nrm > best_norm:
            best, best_norm = diff / nrm, nrm
    return best if best_norm > 1e-12 else None


def mean_curvature_2d_at(f: UnitField, p, h: float | None = None) -> float:
    """Surface formula in terms of the kernel curves' curvature and e_1(λ).

    Uses f_1 = η (ξ turned by a right angle) and the signed singular value
    λ = ⟨∇_{e_1}ξ, η⟩, which stays smooth where λ changes sign.
    """
    _require_2d(f)
    step = _fd_step(f, h)
    loc = local_geometry(f, p)
    d = _e1_direction(f, loc, step)
    if d is None:
        # ∇ξ vanishes near p
        return 0.0
    lam, e1 = _signed_singular(loc, d)
    e1 = d if lam == 0.0 else e1

    def kernel(q):
        lq = local_geometry(f, q, check_domain=False)
        _, eq = _signed_singular(lq, d)
        y = lq.to_ortho(eq)
        return lq.from_ortho(np.array([-y[1], y[0]]))

    def signed(q):
        return _signed_singular(local_geometry(f, q, check_domain=False), d)[0]

    geod = 0.0
    if abs(lam) > ZERO_LAMBDA:
        e0 = kernel(loc.point)
        acc = _directional(kernel, loc.point, e0, step) + np.einsum("kij,i,j->k", loc.gamma, e0, e0)
        geod = loc.ip(acc, e1)
    d_lam = float(_directional(signed, loc.point, e1, step))
    return (-geod * lam + d_lam / (1.0 + lam * lam)) / (2.0 * np.sqrt(1.0 + lam * lam))


def _rotated(loc: LocalGeometry) -> np.ndarray:
    y = loc.to_ortho(loc.xi)
    return loc.from_ortho(np.array([-y[1], y[0]]))


def frenet_curvatures(f: UnitField, q, check_domain: bool = True) -> tuple[float, float]:
    """k = ⟨∇_ξ ξ, η⟩ and κ = −⟨∇_η ξ, η⟩ with η the +90° rotation of ξ."""
    loc = local_geometry(f, q, check_domain=check_domain)
    eta = _rotated(loc)
    k = loc.ip(loc.cov(loc.xi), eta)
    kappa = -loc.ip(loc.cov(eta), eta)
    return k, kappa


def mean_curvature_frenet_at(f: UnitField, p, h: float | None = None) -> float:
    """Surface formula in terms of geodesic curvatures of ξ- and η-curves."""
    _require_2d(f)
    step = _fd_step(f, h)
    loc = local_geometry(f, p)
    eta = _rotated(loc)

    def ratios(q):
        k, kappa = frenet_curvatures(f, q, check_domain=False)
        d = np.sqrt(1.0 + k * k + kappa * kappa)
        return np.array([k / d, kappa / d])

    along_xi = _directional(ratios, loc.point, loc.xi, step)[0]
    along_eta = _directional(ratios, loc.point, eta, step)[1]
    return 0.5 * (along_xi - along_eta)


def _shape_operator(loc: LocalGeometry) -> tuple[np.ndarray, np.ndarray, float]:
    """Principal curvatures, principal directions (rows, coordinates) and the
    size of the antisymmetric part of ∇ξ on ξ^⊥."""
    y = loc.to_ortho(loc.xi)
    Q = _perp_basis(y / np.linalg.norm(y))
    LT = loc.chol.T
    op_ortho = LT @ loc.nabla.T @ np.linalg.inv(LT)
    S = Q.T @ op_ortho @ Q
    skew = float(np.max(np.abs(S - S.T), initial=0.0)) / 2
    k, V = np.linalg.eigh(-(S + S.T) / 2)
    dirs = np.array([loc.from_ortho(Q @ V[:, a]) for a in range(len(k))])
    return k, dirs, skew


def foliation_mean_curvature_at(f: UnitField, p, h: float | None = None) -> np.ndarray:
    """Components from principal curvatures of the leaves of ξ^⊥.

    Components follow the principal-direction order (ascending curvature)
    and the leaf orientation; compare magnitudes with :func:`mean_curvature_at`.

    Raises
    ------
    NotGeodesic
        If |∇_ξ ξ| ≥ 1e-8.
    NotIntegrable
        If ∇ξ restricted to ξ^⊥ has an antisymmetric part ≥ 1e-8.
    """
    step = _fd_step(f, h)
    loc = local_geometry(f, p)
    acc = loc.cov(loc.xi)
    geo = np.sqrt(max(loc.ip(acc, acc), 0.0))
    if geo >= PRECONDITION_TOL:
        raise NotGeodesic(f"field is not geodesic at {loc.point.tolist()} (|nabla_xi xi| = {geo:.3g})")
    k, dirs, skew = _shape_operator(loc)
    if skew >= PRECONDITION_TOL:
        raise NotIntegrable(f"orthogonal distribution is not integrable at {loc.point.tolist()} ({skew:.3g})")

    def curvatures(q):
        return _shape_operator(local_geometry(f, q, check_domain=False))[0]

    n = len(k)
    N = n + 1
    dk = np.array([_directional(curvatures, loc.point, dirs[s], step) for s in range(n)])
    out = np.zeros(n)
    for s in range(n):
        total = 0.0
        for a in range(n):
            curv = loc.ip(loc.riemann.apply(loc.xi, dirs[a], dirs[a]), dirs[s])
            total += (-dk[s, a] + (1.0 - k[a] * k[s]) * curv) / (1.0 + k[a] ** 2)
        out[s] = total / (N * np.sqrt(1.0 + k[s] ** 2))
    return out


def volume_density_at(f: UnitField, p) -> float:
    """√det of the first fundamental form, Π √(1+λ_α²)."""
    loc = local_geometry(f, p)
    frame = frame_at(loc, f)
    return float(np.prod(np.sqrt(1.0 + frame.lam**2)))


@dataclass(frozen=True)
class NormalityReport:
    is_geodesic: bool
    is_strongly_normal: bool
    is_normal: bool
    geodesic_residual: float
    strong_residual: float
    normal_residual: float


def strongly_normal_check(f: UnitField, p, tol: float = PRECONDITION_TOL) -> NormalityReport:
    """Test ∇_ξ ξ = 0, and r(X,Y)ξ ∥ ξ, R(X,Y)ξ ∥ ξ for X, Y in an orthonormal basis of ξ^⊥."""
    loc = local_geometry(f, p)
    acc = loc.cov(loc.xi)
    geo = float(np.sqrt(max(loc.ip(acc, acc), 0.0)))
    y = loc.to_ortho(loc.xi)
    Q = _perp_basis(y / np.linalg.norm(y))
    basis = [loc.from_ortho(Q[:, a]) for a in range(Q.shape[1])]

    def off_xi(v):
        w = v - loc.ip(v, loc.xi) * loc.xi
        return float(np.sqrt(max(loc.ip(w, w), 0.0)))

    strong = 0.0
    normal = 0.0
    for X in basis:
        for Y in basis:
            strong = max(strong, off_xi(loc.r(X, Y)))
            normal = max(normal, off_xi(loc.curv(X, Y)))
    return NormalityReport(geo < tol, strong < tol, normal < tol, geo, strong, normal)
