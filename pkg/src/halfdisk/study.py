"""Convergence studies, extrapolation, the ``t`` sweep and report writers.

Every driver here is deterministic: meshes are generated without
randomness, the eigensolver uses a fixed start vector, and independent
sub-problems (sweep points) are keyed by their parameters so the result
does not depend on execution order.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .assembly import (
    CONFORMING,
    ElementFamily,
    assemble_mass,
    assemble_stiffness,
    eliminate_dirichlet,
    element_family,
    err_functional,
)
from .eigensolve import EigenResult, SolverConfig, inertia_check, shift_invert_solve
from .errors import BracketError, ConfigurationError, HalfDiskError
from .geometry import DIRICHLET, BoundaryPartition, make_partition
from .mesh import GradingSpec, TriMesh, boundary_dof_masks, generate_initial

log = logging.getLogger(__name__)

CANONICAL_T = math.pi / 4
DEFAULT_ERR_STOP = 5e-10
MEMORY_CAP_LEVELS = 5
SWEEP_SHIFT = 0.0


@dataclass
class ConvergenceRecord:
    level: int
    eigenvalue: float
    err: float
    n_dofs: int
    triangles: int
    iterations: int
    wall_time: float = field(default=0.0, compare=False)


@dataclass
class SweepRecord:
    t: float
    eigenvalue_dirichlet_window: float
    eigenvalue_swapped: float
    level: int
    error: str = ""

    @property
    def lambda1(self) -> float:
        """Smaller of the two first eigenvalues."""
        return min(self.eigenvalue_dirichlet_window, self.eigenvalue_swapped)


@dataclass
class SolveOutcome:
    """Eigenpairs on one mesh together with what is needed to post-process them."""

    mesh: TriMesh
    family: ElementFamily
    results: list[EigenResult]
    dirichlet: np.ndarray
    free: np.ndarray
    A: object
    B: object

    @property
    def first(self) -> EigenResult:
        return self.results[0]

    @property
    def n_dofs(self) -> int:
        return len(self.free)

    def full_vector(self, i: int = 0) -> np.ndarray:
        v = np.zeros(self.A.shape[0])
        v[self.free] = self.results[i].eigenvector
        return v

    def err(self, i: int = 0) -> float:
        r = self.results[i]
        return err_functional(self.A, self.B, r.eigenvalue, self.full_vector(i), self.mesh, self.family)

    def certify(self) -> bool:
        """Inertia check that ``results[0]`` is the lowest eigenvalue of the pencil."""
        lam = [r.eigenvalue for r in self.results]
        A_f = self.A[self.free][:, self.free]
        B_f = self.B[self.free][:, self.free]
        sigma = 0.5 * (lam[0] + lam[1]) if len(lam) > 1 else lam[0] * (1 + 1e-6) + 1e-9
        return inertia_check(A_f, B_f, sigma) == 1


def solve_mesh(m: TriMesh, fam=CONFORMING, cfg: SolverConfig | None = None) -> SolveOutcome:
    """Assemble, eliminate Dirichlet DOFs and solve on a tagged mesh."""
    fam = element_family(fam)
    cfg = SolverConfig(shift=fam.default_shift) if cfg is None else cfg
    A = assemble_stiffness(m, fam)
    B = assemble_mass(m, fam)
    dirichlet, free = boundary_dof_masks(m, fam.kind)
    A_f, B_f, dofmap = eliminate_dirichlet(A, B, dirichlet)
    k = min(cfg.num_eigenpairs, dofmap.n_free)
    if k != cfg.num_eigenpairs:
        cfg = SolverConfig(cfg.shift, k, cfg.tolerance, cfg.max_iterations)
    results = shift_invert_solve(A_f, B_f, cfg)
    return SolveOutcome(m, fam, results, dofmap.dirichlet, dofmap.free, A, B)


def initial_mesh(bp: BoundaryPartition, grading: GradingSpec | None = None,
                 target_triangles: int = 288, symmetric: bool = False) -> TriMesh:
    return generate_initial(bp, target_triangles, grading, symmetric=symmetric)


def run_convergence(fam=CONFORMING, bp: BoundaryPartition | None = None, max_levels: int = 5,
                    err_stop: float = DEFAULT_ERR_STOP, grading: GradingSpec | None = None,
                    target_triangles: int = 288, symmetric: bool = False,
                    solver: SolverConfig | None = None,
                    memory_cap: int = MEMORY_CAP_LEVELS) -> list[ConvergenceRecord]:
    """Solve on successive uniform refinements of the initial graded mesh.

    Stops after the first level with ``|Err| < err_stop`` or after
    ``max_levels`` levels.  Solver errors are re-raised with the level
    prepended to the message and stored as ``exc.level``.
    """
    fam = element_family(fam)
    if max_levels < 1:
        raise ConfigurationError("max_levels must be >= 1")
    if max_levels > memory_cap:
        raise ConfigurationError(f"max_levels={max_levels} exceeds the memory cap of {memory_cap} levels")
    bp = make_partition(CANONICAL_T) if bp is None else bp
    m = initial_mesh(bp, grading, target_triangles, symmetric)
    records = []
    for level in range(max_levels):
        if level:
            m = m.refine()
        start = time.perf_counter()
        try:
            out = solve_mesh(m, fam, solver)
        except HalfDiskError as exc:
            exc.level = level
            exc.args = (f"level {level}: {exc}",)
            raise
        err = out.err()
        rec = ConvergenceRecord(level, out.first.eigenvalue, err, out.n_dofs, m.n_triangles,
                                out.first.iterations, time.perf_counter() - start)
        log.info("%s level %d: lambda=%.11f err=%.3e dofs=%d", fam.kind, level, rec.eigenvalue, err, rec.n_dofs)
        records.append(rec)
        if abs(err) < err_stop:
            break
    return records


@dataclass(frozen=True)
class Extrapolation:
    limit: float | None
    rate: float
    ratio: float


def extrapolate(records) -> Extrapolation:
    """Richardson extrapolation through the last three values.

    With ``d1 = l1 - l2`` and ``d2 = l2 - l3`` the contraction is ``q = d1/d2``,
    the observed rate ``p = log2 q`` (mesh size halves per level) and the
    limit ``l3 - d2 / (q - 1)``.  If the tail is not monotone and contracting
    (``q <= 1``) the limit is declined and returned as ``None``.
    """
    vals = [r.eigenvalue if isinstance(r, ConvergenceRecord) else float(r) for r in records]
    if len(vals) < 3:
        raise ConfigurationError("extrapolation needs at least three levels")
    l1, l2, l3 = vals[-3:]
    d1, d2 = l1 - l2, l2 - l3
    if d2 == 0.0:
        if d1 == 0.0:
            return Extrapolation(l3, math.inf, math.inf)
        return Extrapolation(None, math.nan, math.nan)
    q = d1 / d2
    rate = math.log2(q) if q > 0 else math.nan
    if q <= 1.0:
        return Extrapolation(None, rate, q)
    return Extrapolation(l3 - d2 / (q - 1.0), rate, q)


# ---------------------------------------------------------------------------
# t sweep


def _both_problems(t: float, level: int, fam, grading, target_triangles, k):
    fam = element_family(fam)
    bp = make_partition(t)
    m = initial_mesh(bp, grading, target_triangles).refined(level)
    cfg = SolverConfig(shift=SWEEP_SHIFT, num_eigenpairs=k)
    a = solve_mesh(m, fam, cfg).first.eigenvalue
    b = solve_mesh(m.with_tags(bp.swap()), fam, cfg).first.eigenvalue
    return a, b


def _sweep_point(args) -> SweepRecord:
    t, level, fam, grading, target, k = args
    try:
        a, b = _both_problems(t, level, fam, grading, target, k)
        return SweepRecord(t, a, b, level)
    except HalfDiskError as exc:
        return SweepRecord(t, math.nan, math.nan, level, error=f"{type(exc).__name__}: {exc}")


def sweep_t(t_values, level: int = 3, fam=CONFORMING, grading: GradingSpec | None = None,
            target_triangles: int = 288, jobs: int = 1, num_eigenpairs: int = 2) -> list[SweepRecord]:
    """First eigenvalue of the window problem and its swap at each ``t``.

    A fresh mesh is generated for every ``t`` so the junctions are vertices.
    Failures at individual points are recorded in ``SweepRecord.error``
    and the sweep continues.  Records come back sorted by ``t``.
    """
    ts = [float(t) for t in t_values]
    for t in ts:
        if not (0.0 < t < 0.5 * math.pi):
            raise ConfigurationError(f"sweep value t={t} outside (0, pi/2)")
    fam = element_family(fam)
    tasks = [(t, level, fam, grading, target_triangles, num_eigenpairs) for t in ts]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            out = list(pool.map(_sweep_point, tasks))
    else:
        out = [_sweep_point(task) for task in tasks]
    return sorted(out, key=lambda r: r.t)


def lambda1(t: float, level: int = 3, fam=CONFORMING, grading: GradingSpec | None = None,
            target_triangles: int = 288) -> float:
    """``min`` of the two first eigenvalues at ``t``."""
    a, b = _both_problems(t, level, fam, grading, target_triangles, 2)
    return min(a, b)


@dataclass(frozen=True)
class CriticalT:
    t: float
    eigenvalue: float
    t_lo: float
    t_hi: float
    eigenvalue_lo: float
    eigenvalue_hi: float
    evaluations: int


def find_critical_t(target: float = 2.0, bracket=(0.05, CANONICAL_T), level: int = 3,
                    tol_t: float = 1e-3, fam=CONFORMING, grading: GradingSpec | None = None,
                    target_triangles: int = 288) -> CriticalT:
    """Bisection for ``Lambda_1(t) = target`` inside ``bracket``.

    Raises :class:`BracketError` if ``Lambda_1 - target`` has the same sign
    at both ends.  The returned ``t`` is the midpoint of the final bracket
    (width below ``tol_t``), with the eigenvalue evaluated there.
    """
    lo, hi = float(bracket[0]), float(bracket[1])
    if not (0.0 < lo < hi < 0.5 * math.pi):
        raise ConfigurationError("bracket must satisfy 0 < t_lo < t_hi < pi/2")
    if tol_t <= 0:
        raise ConfigurationError("tol_t must be positive")

    def f(t):
        return lambda1(t, level, fam, grading, target_triangles)

    f_lo, f_hi = f(lo), f(hi)
    n = 2
    if (f_lo - target) * (f_hi - target) > 0:
        raise BracketError(
            f"Lambda_1 - {target} does not change sign on [{lo}, {hi}] "
            f"(values {f_lo:.6f}, {f_hi:.6f})")
    while hi - lo > tol_t:
        mid = 0.5 * (lo + hi)
        f_mid = f(mid)
        n += 1
        if (f_mid - target) * (f_lo - target) <= 0:
            hi, f_hi = mid, f_mid
        else:
            lo, f_lo = mid, f_mid
    mid = 0.5 * (lo + hi)
    return CriticalT(mid, f(mid), lo, hi, f_lo, f_hi, n + 1)


# ---------------------------------------------------------------------------
# swap isospectrality


@dataclass(frozen=True)
class SwapRow:
    index: int
    level: int
    eigenvalue: float
    eigenvalue_swapped: float

    @property
    def gap(self) -> float:
        return abs(self.eigenvalue - self.eigenvalue_swapped)


def swap_isospectrality_report(level: int = 4, n_eigs: int = 1, fam=CONFORMING,
                               grading: GradingSpec | None = None,
                               target_triangles: int = 288) -> list[SwapRow]:
    """Lowest ``n_eigs`` eigenvalues of the canonical problem and its swap.

    Both problems are solved on the same mirror-symmetric mesh at levels
    ``level - 1`` and ``level``; one row per eigenvalue index and level.
    """
    if not (1 <= n_eigs <= 10):
        raise ConfigurationError("n_eigs must lie in 1..10")
    if level < 1:
        raise ConfigurationError("level must be >= 1 to compare two levels")
    fam = element_family(fam)
    bp = make_partition(CANONICAL_T)
    m = initial_mesh(bp, grading, target_triangles, symmetric=True).refined(level - 1)
    cfg = SolverConfig(shift=SWEEP_SHIFT, num_eigenpairs=max(n_eigs, 2))
    rows = []
    for lev in (level - 1, level):
        if lev == level:
            m = m.refine()
        a = solve_mesh(m, fam, cfg).results
        b = solve_mesh(m.with_tags(bp.swap()), fam, cfg).results
        for i in range(n_eigs):
            rows.append(SwapRow(i + 1, lev, a[i].eigenvalue, b[i].eigenvalue))
    return rows


# ---------------------------------------------------------------------------
# contour export


def vertex_values(v_full: np.ndarray, m: TriMesh, fam=CONFORMING) -> np.ndarray:
    """Nodal values of an FE function.

    Conforming coefficients are nodal values already.  A nonconforming
    function is evaluated at each vertex from every incident triangle and
    the results are averaged.  Vertices on the closed Dirichlet boundary are
    set to zero in both cases.
    """
    fam = element_family(fam)
    v_full = np.asarray(v_full, dtype=float)
    if fam.kind == "conforming":
        vals = v_full.copy()
    else:
        te = v_full[m.triangle_edges]
        # at local vertex k the basis of the opposite edge is -1, the others +1
        local = te.sum(axis=1, keepdims=True) - 2.0 * te
        acc = np.zeros(m.n_vertices)
        cnt = np.zeros(m.n_vertices)
        np.add.at(acc, m.triangles.ravel(), local.ravel())
        np.add.at(cnt, m.triangles.ravel(), 1.0)
        vals = acc / cnt
    dverts = np.unique(m.boundary_edges[m.boundary_tags == DIRICHLET])
    vals[dverts] = 0.0
    return vals


def fix_sign(v: np.ndarray, B) -> np.ndarray:
    """Flip ``v`` so its positive part carries at least as much lumped mass as its negative part."""
    d = np.asarray(B.diagonal()).ravel()
    pos = float(np.sum(d * np.where(v > 0, v, 0.0) ** 2))
    neg = float(np.sum(d * np.where(v < 0, v, 0.0) ** 2))
    return -v if neg > pos else v


def contour_export(v_full: np.ndarray, m: TriMesh, fam, path, B=None) -> tuple[str, str]:
    """Write ``x,y,value`` per vertex to ``path`` and triangles to a sibling file.

    The triangle file is ``path`` with ``_triangles`` inserted before the
    suffix.  Returns both paths.
    """
    from pathlib import Path

    fam = element_family(fam)
    v = np.asarray(v_full, dtype=float)
    if B is not None:
        v = fix_sign(v, B)
    vals = vertex_values(v, m, fam)
    path = Path(path)
    tri_path = path.with_name(path.stem + "_triangles" + (path.suffix or ".csv"))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "y", "value"])
        for (x, y), val in zip(m.vertices.tolist(), vals.tolist()):
            w.writerow([repr(x), repr(y), repr(val)])
    with open(tri_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["i", "j", "k"])
        w.writerows(m.triangles.tolist())
    return str(path), str(tri_path)


# ---------------------------------------------------------------------------
# writers


def _plain(obj):
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, GradingSpec):
        return {k: _plain(v) for k, v in asdict(obj).items()}
    if isinstance(obj, BoundaryPartition):
        return {"t": obj.t, "swapped": obj.swapped}
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    return obj


def run_id(config: dict) -> str:
    """Short content hash of a configuration (stable across runs)."""
    blob = json.dumps(_plain(config), sort_keys=True, separators=(",", ":"))
    return hashlib.sha1(blob.encode()).hexdigest()[:12]


def _format(v):
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_csv(rows, path, exclude=("wall_time",)) -> None:
    """One row per dataclass instance; header = field names minus ``exclude``."""
    rows = list(rows)
    if not rows:
        raise ConfigurationError("nothing to write")
    names = [f.name for f in fields(rows[0]) if f.name not in exclude]
    extra = ["gap"] if isinstance(rows[0], SwapRow) else []
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(names + extra)
        for r in rows:
            w.writerow([_format(getattr(r, n)) for n in names + extra])


def write_json(obj, path) -> None:
    with open(path, "w") as fh:
        json.dump(_plain(obj), fh, indent=2, sort_keys=True)
        fh.write("\n")
