"""Riemannian metrics given in a single coordinate chart.

Index conventions used throughout the package:

* ``gamma[k, i, j]``        = Γ^k_ij
* ``dgamma[l, k, i, j]``    = ∂_l Γ^k_ij
* ``r4[l, k, i, j]``        = R^l_kij, where R(∂_i, ∂_j)∂_k = R^l_kij ∂_l and
  R(X, Y)Z = ∇_X∇_Y Z − ∇_Y∇_X Z − ∇_[X,Y] Z.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy.stats import qmc

from .expr import CompiledExprs, Expr, parse


class GeometryError(ValueError):
    """A point or object is outside what the geometry can handle."""


class OutsideDomainError(GeometryError):
    pass


class NotPositiveDefiniteError(GeometryError):
    pass


@dataclass(frozen=True)
class ChartMetric:
    """Metric tensor g_ij as expressions in the chart coordinates ``u0..u<dim-1>``.

    Only the upper triangle is evaluated; :meth:`check_symmetry` compares the
    stored lower entries against it.
    """

    dim: int
    domain: tuple[tuple[float, float], ...]
    g: tuple[tuple[Expr, ...], ...]
    _compiled: CompiledExprs = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.dim < 2:
            raise GeometryError("a chart needs at least 2 coordinates")
        if len(self.domain) != self.dim or len(self.g) != self.dim:
            raise GeometryError("domain and metric table must match the dimension")
        for lo, hi in self.domain:
            if not lo < hi:
                raise GeometryError(f"empty domain interval [{lo}, {hi}]")
        upper = [self.g[i][j] for i in range(self.dim) for j in range(i, self.dim)]
        object.__setattr__(self, "_compiled", CompiledExprs(upper, self.dim))

    @classmethod
    def from_strings(
        cls,
        entries: Sequence[Sequence[str]] | Mapping[tuple[int, int], str],
        domain: Sequence[tuple[float, float]],
    ) -> "ChartMetric":
        """Build from expression text.

        ``entries`` is either a full square table or a mapping ``(i, j) -> text``
        where missing entries default to ``0`` and a single off-diagonal entry
        is mirrored.
        """
        dim = len(domain)
        if isinstance(entries, Mapping):
            table = [["0"] * dim for _ in range(dim)]
            for (i, j), text in entries.items():
                table[i][j] = text
                if (j, i) not in entries:
                    table[j][i] = text
        else:
            table = [list(row) for row in entries]
        g = tuple(tuple(parse(str(t), dim) for t in row) for row in table)
        return cls(dim, tuple((float(lo), float(hi)) for lo, hi in domain), g)

    @property
    def center(self) -> np.ndarray:
        return np.array([(lo + hi) / 2 for lo, hi in self.domain])

    @property
    def scale(self) -> float:
        """Smallest edge of the domain box; sets finite-difference steps."""
        return min(hi - lo for lo, hi in self.domain)

    def contains(self, p, slack: float = 0.0) -> bool:
        p = np.asarray(p, dtype=float)
        return all(lo - slack <= x <= hi + slack for x, (lo, hi) in zip(p, self.domain))

    def check_point(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float).ravel()
        if p.shape != (self.dim,):
            raise GeometryError(f"expected {self.dim} coordinates, got {p.shape[0]}")
        if not self.contains(p, slack=1e-12 * max(1.0, float(np.max(np.abs(p))))):
            raise OutsideDomainError(f"point {p.tolist()} outside the chart domain {list(self.domain)}")
        return p

    def jets(self, p) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """g, ∂g and ∂∂g at ``p`` with shapes (n, n), (n, n, n), (n, n, n, n).

        ``dg[l, i, j] = ∂_l g_ij`` and ``ddg[l, m, i, j] = ∂_l ∂_m g_ij``.
        """
        n = self.dim
        val, grad, hess = self._compiled.jets(p)
        g = np.empty((n, n))
        dg = np.empty((n, n, n))
        ddg = np.empty((n, n, n, n))
        k = 0
        for i in range(n):
            for j in range(i, n):
                g[i, j] = g[j, i] = val[k]
                dg[:, i, j] = dg[:, j, i] = grad[k]
                ddg[:, :, i, j] = ddg[:, :, j, i] = hess[k]
                k += 1
        return g, dg, ddg

    def check_symmetry(self, points) -> float:
        """Largest |g_ij − g_ji| over ``points`` for the stored lower triangle."""
        lower = [self.g[j][i] for i in range(self.dim) for j in range(i, self.dim)]
        comp = CompiledExprs(lower, self.dim)
        worst = 0.0
        for p in points:
            worst = max(worst, float(np.max(np.abs(comp.values(p) - self._compiled.values(p)))))
        return worst


def cholesky(g: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.cholesky(g)
    except np.linalg.LinAlgError:
        raise NotPositiveDefiniteError("metric is not positive definite at this point") from None


def metric_at(m: ChartMetric, p) -> tuple[np.ndarray, np.ndarray]:
    """Metric matrix at ``p`` and its lower Cholesky factor L (L Lᵀ = g)."""
    p = m.check_point(p)
    g = m.jets(p)[0]
    return g, cholesky(g)


@dataclass(frozen=True)
class ChristoffelAtPoint:
    gamma: np.ndarray
    dgamma: np.ndarray


@dataclass(frozen=True)
class RiemannAtPoint:
    r4: np.ndarray

    def apply(self, X, Y, Z) -> np.ndarray:
        """Coordinates of R(X, Y)Z."""
        return np.einsum("lkij,i,j,k->l", self.r4, X, Y, Z)

    def lowered(self, g: np.ndarray) -> np.ndarray:
        """R_lkij = g_lm R^m_kij."""
        return np.einsum("lm,mkij->lkij", g, self.r4)

    def sectional(self, g: np.ndarray, X, Y) -> float:
        num = float(np.einsum("l,lm,m->", self.apply(X, Y, Y), g, X))
        den = float((X @ g @ X) * (Y @ g @ Y) - (X @ g @ Y) ** 2)
        return num / den


def connection_from_jets(g, dg, ddg) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Inverse metric, Γ and ∂Γ from metric jets, symmetric in the lower pair."""
    ginv = np.linalg.inv(g)
    ginv = (ginv + ginv.T) / 2
    # first kind: Γ_lij = ½(∂_i g_jl + ∂_j g_il − ∂_l g_ij)
    first = 0.5 * (np.einsum("ijl->lij", dg) + np.einsum("jil->lij", dg) - dg)
    d_first = 0.5 * (
        np.einsum("mijl->mlij", ddg) + np.einsum("mjil->mlij", ddg) - ddg
    )
    gamma = np.einsum("kl,lij->kij", ginv, first)
    dginv = -np.einsum("ka,mab,bl->mkl", ginv, dg, ginv)
    dgamma = np.einsum("mkl,lij->mkij", dginv, first) + np.einsum("kl,mlij->mkij", ginv, d_first)
    gamma = (gamma + gamma.transpose(0, 2, 1)) / 2
    dgamma = (dgamma + dgamma.transpose(0, 1, 3, 2)) / 2
    return ginv, gamma, dgamma


def riemann_from_connection(gamma: np.ndarray, dgamma: np.ndarray) -> np.ndarray:
    """R^l_kij = ∂_iΓ^l_jk − ∂_jΓ^l_ik + Γ^l_im Γ^m_jk − Γ^l_jm Γ^m_ik."""
    t1 = np.einsum("iljk->lkij", dgamma)
    t2 = np.einsum("jlik->lkij", dgamma)
    t3 = np.einsum("lim,mjk->lkij", gamma, gamma)
    t4 = np.einsum("ljm,mik->lkij", gamma, gamma)
    return (t1 - t2) + (t3 - t4)


def christoffel_at(m: ChartMetric, p) -> ChristoffelAtPoint:
    p = m.check_point(p)
    g, dg, ddg = m.jets(p)
    cholesky(g)
    _, gamma, dgamma = connection_from_jets(g, dg, ddg)
    return ChristoffelAtPoint(gamma, dgamma)


def riemann_at(m: ChartMetric, p) -> RiemannAtPoint:
    ch = christoffel_at(m, p)
    return RiemannAtPoint(riemann_from_connection(ch.gamma, ch.dgamma))


def sample_points(domain: Sequence[tuple[float, float]], count: int = 20, seed: int = 0) -> np.ndarray:
    """Deterministic quasi-random points (scrambled Halton) inside a box."""
    lo = np.array([a for a, _ in domain], dtype=float)
    hi = np.array([b for _, b in domain], dtype=float)
    unit = qmc.Halton(d=len(domain), scramble=True, seed=seed).random(count)
    return lo + unit * (hi - lo)
