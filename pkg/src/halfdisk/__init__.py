"""Finite-element eigenvalues of a weighted mixed Dirichlet-Neumann problem on the half-disk.

The problem is ``-Laplace v = lambda * 4 / (1 + r^2)^2 * v`` on the upper unit
half-disk, Dirichlet on the lower diameter and on the arc window
``|psi - pi/2| < t``, Neumann elsewhere (or the swapped assignment).
"""

__version__ = "0.1.0"

from .assembly import CONFORMING, NONCONFORMING, ElementFamily
from .eigensolve import EigenResult, SolverConfig, inertia_check, shift_invert_solve
from .geometry import BoundaryPartition, make_partition, weight_at
from .mesh import GradingSpec, TriMesh, generate_initial, refine
from .study import extrapolate, find_critical_t, run_convergence, solve_mesh, sweep_t

__all__ = [
    "BoundaryPartition",
    "CONFORMING",
    "EigenResult",
    "ElementFamily",
    "GradingSpec",
    "NONCONFORMING",
    "SolverConfig",
    "TriMesh",
    "extrapolate",
    "find_critical_t",
    "generate_initial",
    "inertia_check",
    "make_partition",
    "refine",
    "run_convergence",
    "shift_invert_solve",
    "solve_mesh",
    "sweep_t",
    "weight_at",
]
