"""Shift-invert Lanczos for the symmetric-definite pencil ``A v = lam B v``.

ARPACK (through ``scipy.sparse.linalg.eigsh``) runs in shift-invert mode on
``(A - sigma B)^{-1} B`` with a single SuperLU factorization per call.  The
start vector is fixed, so results are reproducible run to run.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy import sparse
from scipy.sparse import linalg as spla

from .errors import ConfigurationError, ConvergenceError, ShiftCollisionError

log = logging.getLogger(__name__)

DENSE_LIMIT = 24


@dataclass(frozen=True)
class SolverConfig:
    shift: float = 2.6
    num_eigenpairs: int = 5
    tolerance: float = 1e-12
    max_iterations: int = 5000
    restart_dimension: int | None = None

    def __post_init__(self):
        if self.num_eigenpairs < 1:
            raise ConfigurationError("num_eigenpairs must be >= 1")
        if self.tolerance < 1e-14:
            raise ConfigurationError("tolerance below 1e-14 is not attainable in double precision")
        if self.restart_dimension is not None and self.restart_dimension <= self.num_eigenpairs:
            raise ConfigurationError("restart_dimension must exceed num_eigenpairs")
        if self.max_iterations < 1:
            raise ConfigurationError("max_iterations must be >= 1")


@dataclass
class EigenResult:
    eigenvalue: float
    eigenvector: np.ndarray
    residual: float
    iterations: int
    shift: float


def backward_error(A, B, lam: float, v: np.ndarray) -> float:
    """Normwise backward error ``|A v - lam B v| / ((|A| + |lam| |B|) |v|)``."""
    r = A @ v - lam * (B @ v)
    scale = (spla.norm(A, 1) + abs(lam) * spla.norm(B, 1)) * np.linalg.norm(v)
    return float(np.linalg.norm(r) / scale)


def _start_vector(B) -> np.ndarray:
    v0 = np.ones(B.shape[0])
    return v0 / np.sqrt(v0 @ (B @ v0))


def _factorize(A, B, sigma: float):
    C = sparse.csc_matrix(A - sigma * B)
    try:
        lu = spla.splu(C)
    except RuntimeError as exc:
        raise ShiftCollisionError(sigma, suggestion=sigma * (1 + 1e-3) + 1e-3) from exc
    diag = np.abs(lu.U.diagonal())
    if diag.min() <= 1e-14 * max(diag.max(), 1.0):
        raise ShiftCollisionError(sigma, suggestion=sigma * (1 + 1e-3) + 1e-3)
    return lu


def _dense_solve(A, B, cfg: SolverConfig):
    Ad = A.toarray() if sparse.issparse(A) else np.asarray(A, dtype=float)
    Bd = B.toarray() if sparse.issparse(B) else np.asarray(B, dtype=float)
    w, V = scipy.linalg.eigh(Ad, Bd)
    order = np.argsort(np.abs(w - cfg.shift), kind="stable")[: cfg.num_eigenpairs]
    return w[order], V[:, order], 0


def shift_invert_solve(A, B, cfg: SolverConfig = SolverConfig()) -> list[EigenResult]:
    """The ``k`` eigenpairs nearest ``cfg.shift``, sorted by eigenvalue.

    Eigenvectors are B-normalized and sign-fixed so their largest-magnitude
    entry is positive.  ``iterations`` counts Krylov expansion steps
    (applications of the shift-invert operator).
    """
    A = sparse.csr_matrix(A)
    B = sparse.csr_matrix(B)
    n = A.shape[0]
    k = min(cfg.num_eigenpairs, n)
    sigma = cfg.shift
    lu = _factorize(A, B, sigma)

    if n <= max(DENSE_LIMIT, k + 2):
        lam, V, steps = _dense_solve(A, B, SolverConfig(sigma, k, cfg.tolerance, cfg.max_iterations))
    else:
        counter = [0]

        def opinv(x):
            counter[0] += 1
            return lu.solve(np.asarray(x, dtype=float).ravel())

        op = spla.LinearOperator((n, n), matvec=opinv, dtype=float)
        ncv = cfg.restart_dimension or max(2 * k + 1, 20)
        ncv = min(ncv, n)
        try:
            lam, V = spla.eigsh(A, k=k, M=B, sigma=sigma, which="LM", OPinv=op,
                                v0=_start_vector(B), ncv=ncv, tol=cfg.tolerance,
                                maxiter=cfg.max_iterations)
        except spla.ArpackNoConvergence as exc:
            best = np.inf
            for lam_i, v_i in zip(exc.eigenvalues, exc.eigenvectors.T):
                best = min(best, backward_error(A, B, lam_i, v_i))
            raise ConvergenceError("shift-invert Lanczos did not converge", best) from exc
        steps = counter[0]

    order = np.argsort(lam, kind="stable")
    results = []
    for i in order:
        v = np.asarray(V[:, i], dtype=float)
        v = v / np.sqrt(v @ (B @ v))
        if v[np.argmax(np.abs(v))] < 0:
            v = -v
        res = backward_error(A, B, float(lam[i]), v)
        results.append(EigenResult(float(lam[i]), v, res, int(steps), sigma))
    worst = max(r.residual for r in results)
    if worst > cfg.tolerance:
        raise ConvergenceError(f"residual {worst:.3e} above tolerance {cfg.tolerance:.1e}", worst)
    return results


def inertia_check(A, B, sigma: float) -> int:
    """Number of eigenvalues of ``(A, B)`` strictly below ``sigma``.

    Sylvester's law of inertia applied to ``A - sigma B = L D L^T``; the
    factorization is SuperLU restricted to symmetric diagonal pivoting, so
    ``D`` is the diagonal of ``U``.  Falls back to a dense LDL^T if SuperLU
    had to pivot off the diagonal.
    """
    C = sparse.csc_matrix(sparse.csr_matrix(A) - sigma * sparse.csr_matrix(B))
    n = C.shape[0]
    try:
        lu = spla.splu(C, permc_spec="MMD_AT_PLUS_A", diag_pivot_thresh=0.0,
                       options=dict(SymmetricMode=True))
    except RuntimeError as exc:
        raise ShiftCollisionError(sigma, suggestion=sigma * (1 + 1e-3) + 1e-3) from exc
    d = lu.U.diagonal()
    scale = np.abs(d).max() if n else 1.0
    if np.array_equal(lu.perm_r, lu.perm_c) and np.abs(d).min() > 1e-14 * scale:
        return int(np.count_nonzero(d < 0))
    log.debug("SuperLU pivoted off-diagonal; using dense LDL^T for inertia")
    if n > 6000:
        raise ShiftCollisionError(sigma, suggestion=sigma * (1 + 1e-3) + 1e-3)
    _, D, _ = scipy.linalg.ldl(C.toarray())
    ev = np.linalg.eigvalsh(D)
    if np.abs(ev).min() <= 1e-14 * np.abs(ev).max():
        raise ShiftCollisionError(sigma, suggestion=sigma * (1 + 1e-3) + 1e-3)
    return int(np.count_nonzero(ev < 0))
