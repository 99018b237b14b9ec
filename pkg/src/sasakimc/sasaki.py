"""Sasaki-metric structure on the unit tangent bundle along the image ξ(M).

A tangent vector of TM at (p, ξ_p) is stored by its two parts: the projection
π_* (horizontal part) and the connection map K (vertical part). In natural
coordinates (x^i, x^{n+i}) these are

    π_* X̃ = X̃^i,        K X̃ = X̃^{n+i} + Γ^i_jk ξ^j X̃^k,

and the Sasaki product is ⟨π_*a, π_*b⟩ + ⟨Ka, Kb⟩.

Normals of ξ(M) use ñ_σ = (λ_σ e_σ^H − f_σ^V)/√(1+λ_σ²); signed H_σ and the
second-form components are reported for that orientation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .framefield import LocalGeometry, SingularFrame, UnitField, frame_at, local_geometry
from .manifold import GeometryError


class BasePointMismatch(GeometryError):
    pass


@dataclass(frozen=True)
class BasePoint:
    """A point (p, ξ_p) of T₁M with the metric data needed for lifts."""

    point: np.ndarray
    xi: np.ndarray
    g: np.ndarray
    gamma: np.ndarray

    @classmethod
    def from_local(cls, loc: LocalGeometry) -> "BasePoint":
        return cls(loc.point, loc.xi, loc.g, loc.gamma)

    def same_as(self, other: "BasePoint", tol: float = 1e-14) -> bool:
        return self is other or (
            np.allclose(self.point, other.point, rtol=0, atol=tol)
            and np.allclose(self.xi, other.xi, rtol=0, atol=tol)
        )


@dataclass(frozen=True)
class LiftedVector:
    horizontal_part: np.ndarray
    vertical_part: np.ndarray
    base_point: BasePoint

    def __add__(self, other: "LiftedVector") -> "LiftedVector":
        _require_same(self, other)
        return LiftedVector(
            self.horizontal_part + other.horizontal_part,
            self.vertical_part + other.vertical_part,
            self.base_point,
        )

    def __sub__(self, other: "LiftedVector") -> "LiftedVector":
        return self + other * -1.0

    def __mul__(self, c: float) -> "LiftedVector":
        return LiftedVector(c * self.horizontal_part, c * self.vertical_part, self.base_point)

    __rmul__ = __mul__

    def __truediv__(self, c: float) -> "LiftedVector":
        return self * (1.0 / c)

    def to_natural(self) -> np.ndarray:
        """Natural coordinates (X̃^i, X̃^{n+i})."""
        b = self.base_point
        h = self.horizontal_part
        corr = np.einsum("ijk,j,k->i", b.gamma, b.xi, h)
        return np.concatenate([h, self.vertical_part - corr])

    @classmethod
    def from_natural(cls, coords, base: BasePoint) -> "LiftedVector":
        coords = np.asarray(coords, dtype=float)
        N = len(base.point)
        h = coords[:N]
        v = coords[N:] + np.einsum("ijk,j,k->i", base.gamma, base.xi, h)
        return cls(h, v, base)


def horizontal_lift(X, base: BasePoint) -> LiftedVector:
    X = np.asarray(X, dtype=float)
    return LiftedVector(X, np.zeros_like(X), base)


def vertical_lift(X, base: BasePoint) -> LiftedVector:
    X = np.asarray(X, dtype=float)
    return LiftedVector(np.zeros_like(X), X, base)


def tangential_lift(X, base: BasePoint) -> LiftedVector:
    """X^t = X^V − ⟨X, ξ⟩ ξ^V."""
    X = np.asarray(X, dtype=float)
    v = X - float(X @ base.g @ base.xi) * base.xi
    return LiftedVector(np.zeros_like(X), v, base)


def _require_same(a: LiftedVector, b: LiftedVector) -> None:
    if not a.base_point.same_as(b.base_point):
        raise BasePointMismatch("lifted vectors live over different base points")


def sasaki_inner(a: LiftedVector, b: LiftedVector) -> float:
    _require_same(a, b)
    g = a.base_point.g
    return float(a.horizontal_part @ g @ b.horizontal_part + a.vertical_part @ g @ b.vertical_part)


@dataclass(frozen=True)
class SubmanifoldFrames:
    """Tangent frame ẽ_i = e_i^H + (∇_{e_i}ξ)^V and unit normals ñ_σ of ξ(M)."""

    tangent: tuple[LiftedVector, ...]
    normal: tuple[LiftedVector, ...]
    frame: SingularFrame

    def first_form(self) -> np.ndarray:
        return np.array([[sasaki_inner(a, b) for b in self.tangent] for a in self.tangent])

    def first_form_inverse(self) -> np.ndarray:
        return np.diag(1.0 / (1.0 + self.frame.lam_full**2))


def frames_from_local(loc: LocalGeometry, frame: SingularFrame) -> SubmanifoldFrames:
    base = BasePoint.from_local(loc)
    tangent = tuple(
        LiftedVector(e, loc.cov(e), base) for e in frame.e
    )
    normal = tuple(
        LiftedVector(lam * e, -fv, base) / np.sqrt(1.0 + lam * lam)
        for lam, e, fv in zip(frame.lam, frame.e[1:], frame.f)
    )
    return SubmanifoldFrames(tangent, normal, frame)


def submanifold_frames_at(f: UnitField, p) -> SubmanifoldFrames:
    loc = local_geometry(f, p)
    return frames_from_local(loc, frame_at(loc, f))


@dataclass(frozen=True)
class SecondForm:
    """``omega[s, i, k]`` = Ω_{σ|ik} for normal ñ_{s+1} and tangents ẽ_i, ẽ_k."""

    omega: np.ndarray


def second_form_from_local(loc: LocalGeometry, frame: SingularFrame) -> SecondForm:
    """Reduced component formulas in the singular frame."""
    e = frame.e
    fv = frame.f
    lam = frame.lam_full
    N = loc.dim
    n = N - 1
    # rf[i, k, s] = ⟨r(e_i, e_k)ξ, f_s⟩
    r_e = np.einsum("ai,bj,ijk->abk", e, e, loc.r3)
    rf = np.einsum("abk,kl,sl->abs", r_e, loc.g, fv)
    sym = rf + rf.transpose(1, 0, 2)
    # cf[s, k, a] = ⟨R(e_s, e_k)ξ, f_a⟩ for s = 1..n (index into e), a = 1..n
    Rxi = np.einsum("lkij,k->lij", loc.riemann.r4, loc.xi)
    curv = np.einsum("lij,si,kj->skl", Rxi, e[1:], e)
    cf = np.einsum("skl,lm,am->ska", curv, loc.g, fv)
    omega = np.zeros((n, N, N))
    for s in range(n):
        ls = lam[s + 1]
        scale = -1.0 / (2.0 * np.sqrt(1.0 + ls * ls))
        for i in range(N):
            for k in range(i, N):
                val = sym[i, k, s]
                if i >= 1:
                    val += lam[i] * ls * cf[s, k, i - 1]
                if k >= 1:
                    val += lam[k] * ls * cf[s, i, k - 1]
                omega[s, i, k] = omega[s, k, i] = scale * val
    return SecondForm(omega)


def second_form_at(f: UnitField, p) -> SecondForm:
    loc = local_geometry(f, p)
    return second_form_from_local(loc, frame_at(loc, f))


def second_form_unreduced_from_local(loc: LocalGeometry, frame: SingularFrame) -> SecondForm:
    """Direct formula −½⟨r(X,Y)ξ + r(Y,X)ξ − ∇_{R(ξ,∇_Xξ)Y + R(ξ,∇_Yξ)X}ξ, f_σ⟩/√(1+λ_σ²)."""
    N = loc.dim
    n = N - 1
    omega = np.zeros((n, N, N))
    for i in range(N):
        X = frame.e[i]
        for k in range(N):
            Y = frame.e[k]
            Z = loc.riemann.apply(loc.xi, loc.cov(X), Y) + loc.riemann.apply(loc.xi, loc.cov(Y), X)
            vec = loc.r(X, Y) + loc.r(Y, X) - loc.cov(Z)
            for s in range(n):
                ls = frame.lam[s]
                omega[s, i, k] = -0.5 * loc.ip(vec, frame.f[s]) / np.sqrt(1.0 + ls * ls)
    return SecondForm(omega)


def second_form_unreduced_at(f: UnitField, p) -> SecondForm:
    loc = local_geometry(f, p)
    return second_form_unreduced_from_local(loc, frame_at(loc, f))
