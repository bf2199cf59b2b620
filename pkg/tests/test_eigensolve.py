import math

import numpy as np
import pytest
import scipy.linalg
from scipy import sparse

from halfdisk.assembly import CONFORMING, NONCONFORMING, assemble_mass, assemble_stiffness, eliminate_dirichlet
from halfdisk.eigensolve import SolverConfig, backward_error, inertia_check, shift_invert_solve
from halfdisk.errors import ConfigurationError, ConvergenceError, ShiftCollisionError
from halfdisk.geometry import ARC, LOWER, UPPER, BoundaryPartition, Segment
from halfdisk.mesh import boundary_dof_masks
from halfdisk.study import solve_mesh


def chain(n):
    return sparse.diags([-np.ones(n - 1), 2 * np.ones(n), -np.ones(n - 1)], [-1, 0, 1], format="csr")


def reduced(m, fam=CONFORMING):
    A, B = assemble_stiffness(m, fam), assemble_mass(m, fam)
    d, _ = boundary_dof_masks(m, fam.kind)
    return eliminate_dirichlet(A, B, d)[:2]


@pytest.mark.parametrize("n", [10, 120])
def test_chain_closed_form(n):
    A, B = chain(n), sparse.identity(n, format="csr")
    res = shift_invert_solve(A, B, SolverConfig(shift=0.05, num_eigenpairs=3))
    spectrum = 4 * np.sin(np.arange(1, n + 1) * math.pi / (2 * (n + 1))) ** 2
    expected = np.sort(spectrum[np.argsort(np.abs(spectrum - 0.05))[:3]])
    assert sorted(r.eigenvalue for r in res) == pytest.approx(expected, abs=1e-10)
    if n == 10:
        assert res[0].eigenvalue == pytest.approx(4 * math.sin(math.pi / 22) ** 2, abs=1e-12)


def test_diagonal_nearest_shift():
    A, B = sparse.diags(np.arange(1.0, 6.0)), sparse.identity(5)
    res = shift_invert_solve(A, B, SolverConfig(shift=2.2, num_eigenpairs=2))
    assert [r.eigenvalue for r in res] == pytest.approx([2.0, 3.0], abs=1e-12)


def test_large_diagonal_through_krylov():
    d = np.linspace(1.0, 50.0, 200)
    A, B = sparse.diags(d, format="csr"), sparse.identity(200, format="csr")
    res = shift_invert_solve(A, B, SolverConfig(shift=0.0, num_eigenpairs=3))
    assert [r.eigenvalue for r in res] == pytest.approx(d[:3], abs=1e-10)
    assert res[0].iterations > 0


def test_canonical_level2(mesh2):
    A, B = reduced(mesh2)
    res = shift_invert_solve(A, B, SolverConfig(shift=2.6))
    first = res[0]
    assert 2.29 <= first.eigenvalue <= 2.36
    assert first.residual <= 1e-12
    assert 1 <= first.iterations <= 200
    assert first.eigenvector @ (B @ first.eigenvector) == pytest.approx(1.0, abs=1e-12)


def test_b_orthogonality(mesh0):
    A, B = reduced(mesh0)
    res = shift_invert_solve(A, B, SolverConfig(shift=2.6, num_eigenpairs=5))
    V = np.column_stack([r.eigenvector for r in res])
    G = V.T @ (B @ V)
    assert np.max(np.abs(G - np.eye(len(res)))) <= 1e-8


@pytest.mark.parametrize("fam", [CONFORMING, NONCONFORMING])
def test_dense_oracle(mesh0, fam):
    A, B = reduced(mesh0, fam)
    assert A.shape[0] <= 400
    res = shift_invert_solve(A, B, SolverConfig(shift=fam.default_shift, num_eigenpairs=5))
    dense = scipy.linalg.eigh(A.toarray(), B.toarray(), eigvals_only=True)
    for r in res:
        nearest = dense[np.argmin(np.abs(dense - r.eigenvalue))]
        assert r.eigenvalue == pytest.approx(nearest, rel=1e-10)


def test_shift_and_restart_invariance(mesh0):
    A, B = reduced(mesh0)
    base = shift_invert_solve(A, B, SolverConfig(shift=2.6))[0].eigenvalue
    for shift in (2.0, 2.2):
        lam = shift_invert_solve(A, B, SolverConfig(shift=shift))[0].eigenvalue
        assert lam == pytest.approx(base, rel=1e-11)
    lam = shift_invert_solve(A, B, SolverConfig(shift=2.6, restart_dimension=40))[0].eigenvalue
    assert lam == pytest.approx(base, rel=1e-11)


def test_deterministic(mesh0):
    A, B = reduced(mesh0)
    a = shift_invert_solve(A, B)
    b = shift_invert_solve(A, B)
    assert [r.eigenvalue for r in a] == [r.eigenvalue for r in b]
    assert np.array_equal(a[0].eigenvector, b[0].eigenvector)


def test_inertia_examples():
    A, B = sparse.diags([1.0, 2.0, 3.0]), sparse.identity(3)
    assert inertia_check(A, B, 2.5) == 2
    assert inertia_check(A, B, 0.5) == 0
    with pytest.raises(ShiftCollisionError):
        inertia_check(A, B, 2.0)


def test_inertia_canonical(mesh0):
    A, B = reduced(mesh0)
    res = shift_invert_solve(A, B, SolverConfig(shift=2.6))
    below = sum(r.eigenvalue < 2.6 for r in res)
    assert inertia_check(A, B, 2.6) == below
    assert inertia_check(A, B, 0.01) == 0


def test_inertia_matches_dense(mesh0):
    A, B = reduced(mesh0, NONCONFORMING)
    dense = scipy.linalg.eigh(A.toarray(), B.toarray(), eigvals_only=True)
    for sigma in (1.0, 5.0, 20.0):
        assert inertia_check(A, B, sigma) == int(np.sum(dense < sigma))


def test_shift_collision():
    A, B = sparse.diags(np.arange(1.0, 40.0), format="csr"), sparse.identity(39, format="csr")
    with pytest.raises(ShiftCollisionError) as info:
        shift_invert_solve(A, B, SolverConfig(shift=3.0))
    assert info.value.suggestion is not None and info.value.suggestion != 3.0


def test_non_convergence(mesh2):
    A, B = reduced(mesh2)
    with pytest.raises(ConvergenceError) as info:
        shift_invert_solve(A, B, SolverConfig(shift=2.6, max_iterations=1, restart_dimension=6))
    assert info.value.best_residual >= 0 or math.isnan(info.value.best_residual)


@pytest.mark.parametrize("kw", [dict(num_eigenpairs=0), dict(tolerance=1e-16),
                                dict(num_eigenpairs=5, restart_dimension=5), dict(max_iterations=0)])
def test_config_validation(kw):
    with pytest.raises(ConfigurationError):
        SolverConfig(**kw)


def test_backward_error_zero_for_exact():
    A, B = sparse.diags([1.0, 2.0]), sparse.identity(2)
    assert backward_error(A, B, 1.0, np.array([1.0, 0.0])) == 0.0


def test_dirichlet_domination(mesh0):
    """Enlarging the Dirichlet set on the same mesh never lowers lambda_1."""
    lower = BoundaryPartition((Segment(LOWER, 0, 1),), (Segment(ARC, 0, math.pi), Segment(UPPER, 0, 1)))
    full_arc = BoundaryPartition((Segment(LOWER, 0, 1), Segment(ARC, 0, math.pi)), (Segment(UPPER, 0, 1),))
    chain_ = [lower, mesh0.meta["partition"], full_arc, BoundaryPartition.uniform("D")]
    lams = [solve_mesh(mesh0.with_tags(bp), CONFORMING, SolverConfig(shift=0.0)).first.eigenvalue
            for bp in chain_]
    assert all(a <= b for a, b in zip(lams, lams[1:]))
