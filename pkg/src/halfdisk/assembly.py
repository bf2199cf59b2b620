"""Stiffness and weighted mass matrices for P1 elements.

Two element families share the same triangles:

* ``conforming``: Courant P1, one DOF per vertex, basis = barycentric ``lambda_i``;
* ``nonconforming``: Crouzeix-Raviart, one DOF per edge midpoint, basis on a
  triangle ``1 - 2*lambda_k`` for the edge opposite vertex ``k``.

Matrices are returned as ``scipy.sparse.csr_matrix`` over all DOFs; Dirichlet
DOFs are removed afterwards by :func:`eliminate_dirichlet`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .errors import ConfigurationError, MeshIntegrityError
from .geometry import weight_xy
from .mesh import TriMesh
from .quadrature import QuadratureRule, assembly_rule, err_rule

DEGENERATE_AREA = 1e-14


@dataclass(frozen=True)
class ElementFamily:
    kind: str

    def __post_init__(self):
        if self.kind not in ("conforming", "nonconforming"):
            raise ConfigurationError(f"unknown element family {self.kind!r}")

    @property
    def dof_location(self) -> str:
        return "vertices" if self.kind == "conforming" else "edge midpoints"

    @property
    def default_shift(self) -> float:
        return 2.6 if self.kind == "conforming" else 2.2

    def n_dofs(self, m: TriMesh) -> int:
        return m.n_vertices if self.kind == "conforming" else m.n_edges

    def local_dofs(self, m: TriMesh) -> np.ndarray:
        """``(M, 3)`` global DOF indices, column ``k`` tied to local vertex ``k``."""
        return m.triangles if self.kind == "conforming" else m.triangle_edges

    def basis(self, bary: np.ndarray) -> np.ndarray:
        """Basis values at barycentric points, shape ``(nq, 3)``."""
        return bary if self.kind == "conforming" else 1.0 - 2.0 * bary

    def gradients(self, m: TriMesh) -> tuple[np.ndarray, np.ndarray]:
        """Per-element basis gradients ``(M, 3, 2)`` and areas ``(M,)``."""
        grad, area = barycentric_gradients(m)
        return (grad if self.kind == "conforming" else -2.0 * grad), area


CONFORMING = ElementFamily("conforming")
NONCONFORMING = ElementFamily("nonconforming")


def element_family(kind) -> ElementFamily:
    if isinstance(kind, ElementFamily):
        return kind
    return ElementFamily(str(kind))


def barycentric_gradients(m: TriMesh):
    p = m.vertices[m.triangles]
    area = m.signed_areas()
    if np.any(area < DEGENERATE_AREA):
        raise MeshIntegrityError(f"degenerate triangle (min area {area.min():.3e})")
    # grad lambda_k = rot90(p_{k+2} - p_{k+1}) / (2 area)
    e = np.stack([p[:, 2] - p[:, 1], p[:, 0] - p[:, 2], p[:, 1] - p[:, 0]], axis=1)
    grad = np.stack([-e[..., 1], e[..., 0]], axis=-1) / (2.0 * area)[:, None, None]
    return grad, area


def _scatter(local: np.ndarray, dofs: np.ndarray, n: int) -> sparse.csr_matrix:
    rows = np.repeat(dofs, 3, axis=1).ravel()
    cols = np.tile(dofs, (1, 3)).ravel()
    mat = sparse.coo_matrix((local.ravel(), (rows, cols)), shape=(n, n)).tocsr()
    mat.sum_duplicates()
    return mat


def element_stiffness(m: TriMesh, fam: ElementFamily) -> np.ndarray:
    grad, area = fam.gradients(m)
    return area[:, None, None] * np.einsum("mid,mjd->mij", grad, grad)


def element_mass(m: TriMesh, fam: ElementFamily, q: QuadratureRule, weight=weight_xy) -> np.ndarray:
    area = m.signed_areas()
    if np.any(area < DEGENERATE_AREA):
        raise MeshIntegrityError(f"degenerate triangle (min area {area.min():.3e})")
    xq = q.physical_points(m.vertices[m.triangles])
    wq = weight(xq[..., 0], xq[..., 1]) * q.weights[None, :]
    phi = fam.basis(q.points)
    return area[:, None, None] * np.einsum("mq,qi,qj->mij", wq, phi, phi)


def assemble_stiffness(m: TriMesh, fam: ElementFamily = CONFORMING) -> sparse.csr_matrix:
    """Global Dirichlet-energy matrix over all DOFs."""
    fam = element_family(fam)
    return _scatter(element_stiffness(m, fam), fam.local_dofs(m), fam.n_dofs(m))


def assemble_mass(m: TriMesh, fam: ElementFamily = CONFORMING, q: QuadratureRule | None = None,
                  weight=weight_xy) -> sparse.csr_matrix:
    """Global mass matrix with density ``weight(x, y)`` (default ``4/(1+r^2)^2``)."""
    fam = element_family(fam)
    q = assembly_rule() if q is None else q
    if q.degree < 4 and weight is weight_xy:
        raise ConfigurationError("weighted mass needs a quadrature of degree >= 4")
    return _scatter(element_mass(m, fam, q, weight), fam.local_dofs(m), fam.n_dofs(m))


@dataclass(frozen=True)
class DofMap:
    n_full: int
    free: np.ndarray
    dirichlet: np.ndarray

    @property
    def n_free(self) -> int:
        return len(self.free)

    def expand(self, v: np.ndarray) -> np.ndarray:
        """Full-length vector(s) with zeros on constrained DOFs."""
        v = np.asarray(v)
        out = np.zeros((self.n_full,) + v.shape[1:], dtype=v.dtype)
        out[self.free] = v
        return out

    def restrict(self, v: np.ndarray) -> np.ndarray:
        return np.asarray(v)[self.free]


def eliminate_dirichlet(A, B, dirichlet_dofs):
    """Remove constrained rows and columns; returns ``(A_f, B_f, dofmap)``."""
    n = A.shape[0]
    dirichlet = np.unique(np.asarray(dirichlet_dofs, dtype=np.int64))
    free = np.setdiff1d(np.arange(n, dtype=np.int64), dirichlet)
    if len(free) == 0:
        raise ConfigurationError("no free degrees of freedom remain")
    A = sparse.csr_matrix(A)
    B = sparse.csr_matrix(B)
    if len(dirichlet) == 0:
        return A, B, DofMap(n, free, dirichlet)
    A_f = A[free][:, free].tocsr()
    B_f = B[free][:, free].tocsr()
    return A_f, B_f, DofMap(n, free, dirichlet)


def fe_values(m: TriMesh, fam: ElementFamily, v: np.ndarray, q: QuadratureRule):
    """Values of the FE function at quadrature points, ``(M, nq)``."""
    coeff = np.asarray(v)[fam.local_dofs(m)]
    return coeff @ fam.basis(q.points).T


def err_functional(A, B, lam: float, v: np.ndarray, m: TriMesh, fam: ElementFamily = CONFORMING,
                   q: QuadratureRule | None = None, weight=weight_xy) -> float:
    """Re-integrated residual ``int |grad u|^2 - lam * w * u^2``.

    ``v`` is the full-length coefficient vector; it is rescaled so that
    ``v^T B v = 1`` (``B`` being the assembled mass matrix).  The gradient
    term is exact for P1; the weighted term is re-integrated with ``q`` (the
    degree-2 edge-midpoint rule by default, against the degree-4 rule used
    to build ``B``).  The result therefore measures the mass-quadrature
    defect rather than vanishing identically as ``v^T A v - lam v^T B v``
    would.
    """
    fam = element_family(fam)
    q = err_rule() if q is None else q
    v = np.asarray(v, dtype=float)
    v = v / np.sqrt(v @ (B @ v))
    grad, area = fam.gradients(m)
    gu = np.einsum("mi,mid->md", v[fam.local_dofs(m)], grad)
    energy = float(np.sum(area * np.einsum("md,md->m", gu, gu)))
    xq = q.physical_points(m.vertices[m.triangles])
    u = fe_values(m, fam, v, q)
    mass = float(np.sum(area * ((weight(xq[..., 0], xq[..., 1]) * u * u) @ q.weights)))
    return energy - lam * mass


def write_coo(mat, path) -> None:
    """Dump a sparse matrix as ``i j value`` lines with 17 significant digits."""
    coo = sparse.coo_matrix(mat)
    order = np.lexsort((coo.col, coo.row))
    with open(path, "w") as fh:
        fh.write(f"{coo.shape[0]} {coo.shape[1]} {coo.nnz}\n")
        for k in order:
            fh.write(f"{coo.row[k]} {coo.col[k]} {coo.data[k]:.16e}\n")


def read_coo(path) -> sparse.csr_matrix:
    with open(path) as fh:
        n, mcols, _ = (int(x) for x in fh.readline().split())
        data = np.loadtxt(fh, ndmin=2)
    if data.size == 0:
        return sparse.csr_matrix((n, mcols))
    return sparse.coo_matrix((data[:, 2], (data[:, 0].astype(int), data[:, 1].astype(int))),
                             shape=(n, mcols)).tocsr()
