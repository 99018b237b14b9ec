"""Unit vector fields, the operator ∇ξ and its singular frame.

Conventions
-----------
* ``op_coords[j, k] = ∇_j ξ^k``, so the coordinate matrix of X ↦ ∇_X ξ is
  ``op_coords.T``.
* Orthonormal coordinates are ``y = Lᵀ x`` where ``g = L Lᵀ``; Euclidean
  products of ``y`` equal g-products of ``x``.
* ``r3[i, j, k]`` is component k of r(∂_i, ∂_j)ξ = ∇_i∇_jξ − ∇_{∇_i ∂_j}ξ.
* Singular frames hold ``e`` with rows e_0..e_n and ``f`` with rows
  f_1..f_n, so ``f[a]`` pairs with ``e[a + 1]`` and ``lam[a]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import solve_triangular
from scipy.optimize import linear_sum_assignment
from scipy.stats import special_ortho_group

from .expr import BinOp, Call, CompiledExprs, Expr, parse
from .manifold import (
    ChartMetric,
    GeometryError,
    RiemannAtPoint,
    cholesky,
    connection_from_jets,
    riemann_from_connection,
    sample_points,
)

UNIT_TOL = 1e-10
ZERO_LAMBDA = 1e-9
DEGENERATE_GAP = 1e-6
SH_MIN_GAP = 1e-3
MIN_OVERLAP = 0.9


class NotUnitError(GeometryError):
    pass


class DegenerateSpectrum(GeometryError):
    pass


class AlignmentFailure(GeometryError):
    pass


def _normalized(components: Sequence[Expr], metric: ChartMetric) -> tuple[Expr, ...]:
    terms = None
    n = metric.dim
    for i in range(n):
        for j in range(n):
            t = BinOp("*", metric.g[i][j], BinOp("*", components[i], components[j]))
            terms = t if terms is None else BinOp("+", terms, t)
    norm = Call("sqrt", terms)
    return tuple(BinOp("/", c, norm) for c in components)


@dataclass(frozen=True)
class UnitField:
    """A unit vector field ξ given by its chart components.

    ``frame_hint`` optionally maps a point to a reference e-frame (rows
    e_0..e_n in coordinates). It is used only to label vectors inside
    degenerate singular-value clusters.
    """

    components: tuple[Expr, ...]
    host: ChartMetric
    frame_hint: Callable[[np.ndarray], np.ndarray] | None = field(default=None, compare=False)
    _compiled: CompiledExprs = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if len(self.components) != self.host.dim:
            raise GeometryError(
                f"field has {len(self.components)} components, manifold has dimension {self.host.dim}"
            )
        object.__setattr__(self, "_compiled", CompiledExprs(self.components, self.host.dim))

    @classmethod
    def from_strings(
        cls,
        metric: ChartMetric,
        components: Sequence[str],
        normalize: bool = False,
        frame_hint=None,
    ) -> "UnitField":
        comps = tuple(parse(str(c), metric.dim) for c in components)
        if normalize:
            comps = _normalized(comps, metric)
        return cls(comps, metric, frame_hint)

    @property
    def dim(self) -> int:
        return self.host.dim

    def jets(self, p) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """ξ, ``dxi[i, k] = ∂_i ξ^k`` and ``ddxi[i, j, k] = ∂_i∂_j ξ^k``."""
        val, grad, hess = self._compiled.jets(p)
        return val, grad.T.copy(), hess.transpose(1, 2, 0).copy()

    def norm_defect(self, p) -> float:
        g = self.host.jets(p)[0]
        xi = self._compiled.values(p)
        return abs(float(xi @ g @ xi) - 1.0)

    def check_unit(self, count: int = 20, seed: int = 0) -> float:
        """Largest |g(ξ, ξ) − 1| over sampled domain points; raises above tolerance."""
        worst = max(self.norm_defect(p) for p in sample_points(self.host.domain, count, seed))
        if worst > UNIT_TOL:
            raise NotUnitError(f"field is not unit length: |g(xi, xi) - 1| reaches {worst:.3g}")
        return worst


@dataclass(frozen=True)
class LocalGeometry:
    """Every pointwise quantity the formulas need, computed once."""

    point: np.ndarray
    g: np.ndarray
    chol: np.ndarray
    ginv: np.ndarray
    gamma: np.ndarray
    dgamma: np.ndarray
    riemann: RiemannAtPoint
    xi: np.ndarray
    nabla: np.ndarray
    r3: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.point)

    def ip(self, a, b) -> float:
        return float(a @ self.g @ b)

    def cov(self, X) -> np.ndarray:
        """∇_X ξ."""
        return X @ self.nabla

    def r(self, X, Y) -> np.ndarray:
        """r(X, Y)ξ."""
        return np.einsum("i,j,ijk->k", X, Y, self.r3)

    def curv(self, X, Y) -> np.ndarray:
        """R(X, Y)ξ from the curvature tensor."""
        return self.riemann.apply(X, Y, self.xi)

    def to_ortho(self, x) -> np.ndarray:
        return self.chol.T @ x

    def from_ortho(self, y) -> np.ndarray:
        return solve_triangular(self.chol.T, y, lower=False)


def local_geometry(f: UnitField, p, check_domain: bool = True) -> LocalGeometry:
    m = f.host
    if check_domain:
        p = m.check_point(p)
    else:
        p = np.asarray(p, dtype=float).ravel()
    g, dg, ddg = m.jets(p)
    L = cholesky(g)
    ginv, gamma, dgamma = connection_from_jets(g, dg, ddg)
    xi, dxi, ddxi = f.jets(p)
    defect = abs(float(xi @ g @ xi) - 1.0)
    if defect > UNIT_TOL:
        raise NotUnitError(f"field is not unit length at {p.tolist()}: |g(xi, xi) - 1| = {defect:.3g}")
    nabla = dxi + np.einsum("kjm,m->jk", gamma, xi)
    d_nabla = ddxi + np.einsum("ikjm,m->ijk", dgamma, xi) + np.einsum("kjm,im->ijk", gamma, dxi)
    r3 = (
        d_nabla
        + np.einsum("kim,jm->ijk", gamma, nabla)
        - np.einsum("mij,mk->ijk", gamma, nabla)
    )
    riemann = RiemannAtPoint(riemann_from_connection(gamma, dgamma))
    return LocalGeometry(p, g, L, ginv, gamma, dgamma, riemann, xi, nabla, r3)


@dataclass(frozen=True)
class NablaXiAtPoint:
    op_coords: np.ndarray
    op_ortho: np.ndarray
    point: np.ndarray
    metric: np.ndarray
    chol: np.ndarray

    def apply(self, X) -> np.ndarray:
        """∇_X ξ in coordinates."""
        return np.asarray(X) @ self.op_coords


def _nabla_from_local(loc: LocalGeometry) -> NablaXiAtPoint:
    LT = loc.chol.T
    A = loc.nabla.T
    op_ortho = LT @ solve_triangular(LT, A.T, lower=False, trans="T").T
    return NablaXiAtPoint(loc.nabla, op_ortho, loc.point, loc.g, loc.chol)


def nabla_xi_at(f: UnitField, p) -> NablaXiAtPoint:
    return _nabla_from_local(local_geometry(f, p))


def adjoint_at(nx: NablaXiAtPoint) -> np.ndarray:
    """Coordinate matrix of (∇ξ)*, so ``adjoint_at(nx) @ X`` is (∇ξ)*X."""
    ginv = np.linalg.inv(nx.metric)
    return ginv @ nx.op_coords @ nx.metric


@dataclass(frozen=True)
class SingularFrame:
    """Singular frame of ∇ξ at one point.

    ``e`` has rows e_0..e_n, ``f`` rows f_1..f_n and ``lam`` the values
    λ_1 ≥ … ≥ λ_n ≥ 0, all in chart coordinates; the ``*_ortho`` arrays are
    the same vectors in orthonormal coordinates.
    """

    e: np.ndarray
    f: np.ndarray
    lam: np.ndarray
    degenerate: bool
    e_ortho: np.ndarray
    f_ortho: np.ndarray

    @property
    def n(self) -> int:
        return len(self.lam)

    @property
    def lam_full(self) -> np.ndarray:
        """λ_0 = 0 followed by λ_1..λ_n."""
        return np.concatenate([[0.0], self.lam])

    def min_gap(self) -> float:
        vals = np.concatenate([self.lam, [0.0]])
        return float(np.min(np.abs(np.diff(vals))))


def _first_sign(v: np.ndarray) -> float:
    for c in v:
        if abs(c) > 1e-12:
            return 1.0 if c > 0 else -1.0
    return 1.0


def _perp_basis(xo: np.ndarray) -> np.ndarray:
    N = len(xo)
    Q, _ = np.linalg.qr(np.column_stack([xo, np.eye(N)]))
    return Q[:, 1:N]


def _clusters(values: np.ndarray, tol: float) -> list[list[int]]:
    """Groups of indices whose values chain together within ``tol``."""
    order = np.argsort(-values, kind="stable")
    groups: list[list[int]] = [[int(order[0])]]
    for a, b in zip(order[:-1], order[1:]):
        if abs(values[a] - values[b]) < tol:
            groups[-1].append(int(b))
        else:
            groups.append([int(b)])
    return groups


def singular_frame_at(
    nx: NablaXiAtPoint,
    xi_at_p,
    rng: np.random.Generator | None = None,
    reference: np.ndarray | None = None,
) -> SingularFrame:
    """Singular frame of ∇ξ restricted to the target ξ^⊥.

    Parameters
    ----------
    nx : NablaXiAtPoint
    xi_at_p : array
        ξ at the same point.
    rng : numpy Generator, optional
        Randomly pre-rotates the input basis before the SVD. Only the choice
        of vectors inside degenerate clusters changes.
    reference : array, optional
        Rows e_0..e_n of a reference frame. Vectors in each degenerate
        cluster are rotated onto it and every e is sign-matched to it.
    """
    LT = nx.chol.T
    N = LT.shape[0]
    n = N - 1
    xo = LT @ np.asarray(xi_at_p, dtype=float)
    xo = xo / np.linalg.norm(xo)
    Q = _perp_basis(xo)
    B = Q.T @ nx.op_ortho
    if rng is not None:
        P = special_ortho_group.rvs(N, random_state=rng) if N > 1 else np.eye(1)
        U, s, Vt = np.linalg.svd(B @ P)
        Vt = Vt @ P.T
    else:
        U, s, Vt = np.linalg.svd(B)
    lam = s[:n]
    # rows e_1..e_n then e_0 as the last right singular vector
    eo = np.vstack([Vt[n], Vt[:n]])
    lam_full = np.concatenate([[0.0], lam])

    if reference is not None:
        ref = np.array([LT @ r for r in np.asarray(reference, dtype=float)])
        ref /= np.linalg.norm(ref, axis=1, keepdims=True)
        for group in _clusters(lam_full, DEGENERATE_GAP):
            if len(group) > 1:
                E = eo[group].T
                R = ref[group].T
                W, _, Zt = np.linalg.svd(E.T @ R)
                eo[group] = (E @ (W @ Zt)).T
        for i in range(N):
            if eo[i] @ ref[i] < 0:
                eo[i] = -eo[i]
    else:
        for i in range(N):
            eo[i] *= _first_sign(eo[i])

    fq = np.zeros((n, n))
    done = []
    for a in range(n):
        if lam[a] > ZERO_LAMBDA:
            fq[a] = B @ eo[a + 1] / lam[a]
            done.append(a)
    pending = [a for a in range(n) if a not in done]
    if pending:
        basis = [fq[a] for a in done]
        candidates = [U[:, a] for a in pending] + list(np.eye(n))
        for a in pending:
            while candidates:
                c = candidates.pop(0)
                for b in basis:
                    c = c - (c @ b) * b
                nrm = np.linalg.norm(c)
                if nrm > 1e-6:
                    c = c / nrm
                    fq[a] = c * _first_sign(Q @ c)
                    basis.append(fq[a])
                    break
    fo = (Q @ fq.T).T if n else np.zeros((0, N))
    e = solve_triangular(LT, eo.T, lower=False).T
    f = solve_triangular(LT, fo.T, lower=False).T if n else fo
    gaps = np.abs(np.diff(np.concatenate([lam, [0.0]])))
    degenerate = bool(n == 0 or np.min(gaps) < DEGENERATE_GAP)
    return SingularFrame(e, f, lam.copy(), degenerate, eo, fo)


def frame_at(loc: LocalGeometry, f: UnitField | None = None, rng=None) -> SingularFrame:
    """Singular frame from precomputed local geometry, honouring ``f.frame_hint``."""
    nx = _nabla_from_local(loc)
    reference = None
    if f is not None and f.frame_hint is not None:
        reference = f.frame_hint(loc.point)
    return singular_frame_at(nx, loc.xi, rng=rng, reference=reference)


@dataclass(frozen=True)
class RTensorAtPoint:
    r3: np.ndarray

    def apply(self, X, Y) -> np.ndarray:
        """r(X, Y)ξ."""
        return np.einsum("i,j,ijk->k", X, Y, self.r3)


def r_tensor_at(f: UnitField, p) -> RTensorAtPoint:
    return RTensorAtPoint(local_geometry(f, p).r3)


@dataclass(frozen=True)
class AlignedFrames:
    """Singular frame at a point with first derivatives of the frame fields.

    ``E[i, j, k] = ⟨∇_{e_i} e_j, e_k⟩`` (i, j, k = 0..n),
    ``F[i, a, b] = ⟨∇_{e_i} f_a, f_b⟩`` (a, b index f_1..f_n) and
    ``dlam[i, a] = e_i(λ_a)``.
    """

    frame: SingularFrame
    E: np.ndarray
    F: np.ndarray
    dlam: np.ndarray


def _check_gap(frame: SingularFrame, where) -> None:
    if frame.n == 0 or frame.min_gap() < SH_MIN_GAP:
        raise DegenerateSpectrum(
            f"singular values too close at {np.asarray(where).tolist()} "
            f"(min gap {frame.min_gap() if frame.n else 0.0:.3g} < {SH_MIN_GAP})"
        )


def _align(center: SingularFrame, other: SingularFrame, g: np.ndarray):
    """Permute and sign-flip ``other`` so its e-vectors track ``center``."""
    N = center.e.shape[0]
    overlap = center.e @ g @ other.e.T
    rows, cols = linear_sum_assignment(-np.abs(overlap))
    perm = cols[np.argsort(rows)]
    if perm[0] != 0:
        raise AlignmentFailure("kernel direction swapped with a singular direction")
    best = np.abs(overlap[np.arange(N), perm])
    if best.min() < MIN_OVERLAP:
        raise AlignmentFailure(f"frame overlap {best.min():.3f} below {MIN_OVERLAP}")
    signs = np.sign(overlap[np.arange(N), perm])
    e = other.e[perm] * signs[:, None]
    fperm = perm[1:] - 1
    f = other.f[fperm] * signs[1:, None]
    lam = other.lam[fperm]
    return e, f, lam


def aligned_frame_field(f: UnitField, center, h: float | None = None) -> AlignedFrames:
    """Singular frame at ``center`` plus central-difference frame derivatives.

    Parameters
    ----------
    f : UnitField
    center : array
    h : float, optional
        Coordinate step; defaults to ``1e-4`` times the smallest domain edge.

    Raises
    ------
    DegenerateSpectrum
        If any two of λ_1..λ_n, 0 are closer than 1e-3 at the centre or at a
        stencil point.
    AlignmentFailure
        If a stencil frame cannot be matched to the centre frame.
    """
    if h is None:
        h = 1e-4 * f.host.scale
    loc = local_geometry(f, center)
    frame = frame_at(loc, f)
    _check_gap(frame, loc.point)
    N = loc.dim
    n = N - 1
    de = np.zeros((N, N, N))  # de[m, j] = ∂_m e_j
    df = np.zeros((N, n, N))
    dl = np.zeros((N, n))
    for m in range(N):
        side = []
        for sgn in (1.0, -1.0):
            q = loc.point.copy()
            q[m] += sgn * h
            other = frame_at(local_geometry(f, q, check_domain=False), f)
            _check_gap(other, q)
            side.append(_align(frame, other, loc.g))
        (ep, fp, lp), (em, fm, lm) = side
        de[m] = (ep - em) / (2 * h)
        df[m] = (fp - fm) / (2 * h)
        dl[m] = (lp - lm) / (2 * h)
    G = loc.gamma
    # (∇_{e_i} e_j)^k = e_i^m (∂_m e_j^k + Γ^k_{ml} e_j^l)
    cov_e = np.einsum("im,mjk->ijk", frame.e, de) + np.einsum("im,kml,jl->ijk", frame.e, G, frame.e)
    cov_f = np.einsum("im,mjk->ijk", frame.e, df) + np.einsum("im,kml,jl->ijk", frame.e, G, frame.f)
    E = np.einsum("ijk,kl,ml->ijm", cov_e, loc.g, frame.e)
    F = np.einsum("ijk,kl,ml->ijm", cov_f, loc.g, frame.f)
    E = (E - E.transpose(0, 2, 1)) / 2
    F = (F - F.transpose(0, 2, 1)) / 2
    dlam = frame.e @ dl
    return AlignedFrames(frame, E, F, dlam)
