"""Quadrature rules on the reference triangle.

Weights are normalized to sum to one, so an element integral is
``area * sum(w_q * f(x_q))``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi, roots_legendre


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    points: np.ndarray  # (nq, 3) barycentric coordinates
    weights: np.ndarray  # (nq,)
    degree: int
    name: str = ""

    def __len__(self):
        return len(self.weights)

    def physical_points(self, corners: np.ndarray) -> np.ndarray:
        """Map to physical space; ``corners`` is ``(M, 3, 2)``, result ``(M, nq, 2)``."""
        return np.einsum("qk,mkd->mqd", self.points, corners)


def _perm3(a, b, c):
    return [(a, b, c), (b, c, a), (c, a, b)]


@lru_cache(maxsize=None)
def strang_fix_6() -> QuadratureRule:
    """Six-point rule of degree 4."""
    a, wa = 0.445948490915965, 0.223381589678011
    b, wb = 0.091576213509771, 0.109951743655322
    pts = _perm3(a, a, 1 - 2 * a) + _perm3(b, b, 1 - 2 * b)
    w = [wa] * 3 + [wb] * 3
    return QuadratureRule(np.array(pts), np.array(w), 4, "strang-fix-6")


@lru_cache(maxsize=None)
def collapsed_gauss(n: int) -> QuadratureRule:
    """Gauss-Jacobi x Gauss-Legendre rule on the collapsed square, degree ``2n - 1``."""
    xj, wj = roots_jacobi(n, 1.0, 0.0)
    u = 0.5 * (1.0 + xj)
    wu = 0.25 * wj
    xl, wl = roots_legendre(n)
    v = 0.5 * (1.0 + xl)
    wv = 0.5 * wl
    U, V = np.meshgrid(u, v, indexing="ij")
    W = np.outer(wu, wv)
    x = U.ravel()
    y = ((1.0 - U) * V).ravel()
    pts = np.column_stack([1.0 - x - y, x, y])
    w = W.ravel()
    return QuadratureRule(pts, w / w.sum(), 2 * n - 1, f"collapsed-gauss-{n}")


@lru_cache(maxsize=None)
def midpoint_rule() -> QuadratureRule:
    """Edge-midpoint rule, degree 2."""
    pts = np.array([[0.0, 0.5, 0.5], [0.5, 0.0, 0.5], [0.5, 0.5, 0.0]])
    return QuadratureRule(pts, np.full(3, 1.0 / 3.0), 2, "edge-midpoint")


def rule_of_degree(degree: int) -> QuadratureRule:
    """Cheapest available rule exact to at least ``degree``."""
    if degree <= 2:
        return midpoint_rule()
    if degree <= 4:
        return strang_fix_6()
    return collapsed_gauss((degree + 2) // 2)


def assembly_rule() -> QuadratureRule:
    return strang_fix_6()


def err_rule() -> QuadratureRule:
    """Rule used to re-integrate the mass term of the Err functional.

    It is deliberately cheaper than the assembly rule so that Err measures
    the quadrature defect of the mass term, which shrinks by about 16 per
    uniform refinement.
    """
    return midpoint_rule()
