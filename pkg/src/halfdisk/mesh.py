"""Triangulations of the half-disk.

Initial meshes are built in three steps:

1. a quasi-uniform point set on the quarter disk ``x >= 0`` (polar rings plus
   the axes and the arc, with every junction angle inserted exactly) is
   triangulated by Delaunay and mirrored across ``x = 0``;
2. the mirrored base mesh is graded toward the junction foci with
   newest-vertex bisection, which keeps the mesh conforming and the element
   shapes in finitely many similarity classes;
3. boundary edges are tagged against a :class:`BoundaryPartition`.

Mirroring is done by exact negation, so the base mesh is bitwise symmetric
under ``x -> -x`` and so is any grading driven by a symmetric set of foci.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np
from scipy.spatial import Delaunay

from .errors import ConfigurationError, MeshIntegrityError
from .geometry import (
    BOUNDARY_LENGTH,
    DIRICHLET,
    JUNCTION,
    NEUMANN,
    BoundaryPartition,
    classify_boundary_point,
    point_to_arclength,
)

MESH_HEADER = "halfdisk-mesh v1"
ARC_TOL = 1e-12
MAX_ASPECT = 10.0


@dataclass(frozen=True)
class GradingSpec:
    """Geometric grading toward boundary foci.

    Elements touching a focus are bisected until their diameter drops to
    ``h0 * ratio**n_layers`` (``h0`` the base diameter); away from a focus an
    element of diameter ``h`` is refined while ``h > slope * distance``.
    ``foci=None`` means the junction points of the active partition.

    The default is a single mild layer.  It gives an initial mesh of the
    same accuracy class as a coarse hand-graded mesh of about 300 triangles;
    stronger grading only lowers the error constant, since uniform refinement
    of a fixed mesh keeps the singular convergence rate near one.
    """

    n_layers: int = 1
    ratio: float = 0.7
    foci: tuple | None = None
    slope: float = 1.0

    def __post_init__(self):
        if self.n_layers < 0:
            raise ConfigurationError("n_layers must be >= 0")
        if not (0.0 < self.ratio < 1.0):
            raise ConfigurationError("ratio must lie in (0, 1)")
        if self.slope <= 0:
            raise ConfigurationError("slope must be positive")


NO_GRADING = GradingSpec(n_layers=0)


@dataclass(frozen=True, eq=False)
class TriMesh:
    """Triangle mesh with tagged boundary edges.

    Attributes
    ----------
    vertices : (N, 2) float array
    triangles : (M, 3) int array, counterclockwise
    boundary_edges : (K, 2) int array
    boundary_tags : (K,) array of ``"D"``, ``"N"`` or ``""`` (untagged)
    on_arc : (K,) bool array, edge is a chord of the unit circle
    level : number of uniform refinements applied to the initial mesh
    """

    vertices: np.ndarray
    triangles: np.ndarray
    boundary_edges: np.ndarray
    boundary_tags: np.ndarray
    on_arc: np.ndarray
    level: int = 0
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    @cached_property
    def _edge_data(self):
        tri = self.triangles
        # local edge k is opposite local vertex k
        local = np.stack([tri[:, [1, 2]], tri[:, [2, 0]], tri[:, [0, 1]]], axis=1)
        flat = np.sort(local.reshape(-1, 2), axis=1)
        edges, inverse, counts = np.unique(flat, axis=0, return_inverse=True, return_counts=True)
        return edges, inverse.reshape(-1, 3), counts

    @property
    def edges(self) -> np.ndarray:
        """Unique edges as sorted vertex pairs, in lexicographic order."""
        return self._edge_data[0]

    @property
    def triangle_edges(self) -> np.ndarray:
        """``(M, 3)`` edge indices; column ``k`` is the edge opposite vertex ``k``."""
        return self._edge_data[1]

    @property
    def edge_incidence(self) -> np.ndarray:
        return self._edge_data[2]

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def edge_index(self, pairs) -> np.ndarray:
        """Global indices of the given vertex pairs (any orientation)."""
        pairs = np.sort(np.asarray(pairs, dtype=np.int64).reshape(-1, 2), axis=1)
        edges = self.edges
        n = self.n_vertices
        keys = edges[:, 0] * n + edges[:, 1]
        q = pairs[:, 0] * n + pairs[:, 1]
        idx = np.searchsorted(keys, q)
        if np.any(idx >= len(keys)) or np.any(keys[np.minimum(idx, len(keys) - 1)] != q):
            raise MeshIntegrityError("edge not present in mesh")
        return idx

    def signed_areas(self) -> np.ndarray:
        p = self.vertices[self.triangles]
        d1 = p[:, 1] - p[:, 0]
        d2 = p[:, 2] - p[:, 0]
        return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])

    def edge_lengths(self) -> np.ndarray:
        """``(M, 3)`` lengths, column ``k`` opposite vertex ``k``."""
        p = self.vertices[self.triangles]
        return np.stack([
            np.linalg.norm(p[:, 2] - p[:, 1], axis=1),
            np.linalg.norm(p[:, 0] - p[:, 2], axis=1),
            np.linalg.norm(p[:, 1] - p[:, 0], axis=1),
        ], axis=1)

    def aspect_ratios(self) -> np.ndarray:
        """Circumradius over twice the inradius (1 for equilateral)."""
        ell = self.edge_lengths()
        area = np.abs(self.signed_areas())
        s = 0.5 * ell.sum(axis=1)
        rin = area / s
        rcirc = ell.prod(axis=1) / (4.0 * area)
        return rcirc / (2.0 * rin)

    def diameters(self) -> np.ndarray:
        return self.edge_lengths().max(axis=1)

    def with_tags(self, bp: BoundaryPartition) -> TriMesh:
        return replace(self, boundary_tags=tag_boundary(self, bp),
                       meta={**self.meta, "partition": bp})

    def refine(self) -> TriMesh:
        return refine(self)

    def refined(self, levels: int) -> TriMesh:
        m = self
        for _ in range(levels):
            m = refine(m)
        return m

    def check(self) -> None:
        """Raise :class:`MeshIntegrityError` if an invariant is violated."""
        if np.any(self.signed_areas() <= 0):
            raise MeshIntegrityError("non-positive triangle area")
        inc = self.edge_incidence
        if np.any(inc > 2):
            raise MeshIntegrityError("edge shared by more than two triangles")
        bnd = set(map(tuple, np.sort(self.boundary_edges, axis=1).tolist()))
        single = set(map(tuple, self.edges[inc == 1].tolist()))
        if bnd != single:
            raise MeshIntegrityError("boundary edge list does not match mesh topology")
        arcv = np.unique(self.boundary_edges[self.on_arc])
        if len(arcv) and np.max(np.abs(np.linalg.norm(self.vertices[arcv], axis=1) - 1.0)) > ARC_TOL:
            raise MeshIntegrityError("arc vertex off the unit circle")


# ---------------------------------------------------------------------------
# base mesh


def _fold_angle(psi: float) -> float:
    return psi if psi <= 0.5 * math.pi else math.pi - psi


def _quarter_points(n: int, arc_breaks) -> tuple[np.ndarray, np.ndarray]:
    """Quarter-disk points and a flag marking those on the arc."""
    h = 1.0 / n
    pts = [(0.0, 0.0)]
    on_arc = [False]
    for k in range(1, n):
        pts.append((k * h, 0.0))
        pts.append((0.0, k * h))
        on_arc += [False, False]
    breaks = sorted(set([0.0, 0.5 * math.pi] + [b for b in arc_breaks if 0.0 < b < 0.5 * math.pi]))
    for a, b in zip(breaks[:-1], breaks[1:]):
        m = max(1, math.ceil((b - a) / h - 1e-9))
        for j in range(m):
            psi = a + (b - a) * j / m
            pts.append((1.0, 0.0) if psi == 0.0 else (math.cos(psi), math.sin(psi)))
            on_arc.append(True)
    pts.append((0.0, 1.0))
    on_arc.append(True)
    for k in range(1, n):
        r = k * h
        m = max(1, round(0.5 * math.pi * r / h))
        for j in range(1, m):
            psi = 0.5 * math.pi * j / m
            pts.append((r * math.cos(psi), r * math.sin(psi)))
            on_arc.append(False)
    return np.array(pts), np.array(on_arc)


def _longest_edge_first(p, tri):
    """Rotate each triangle so that its longest edge is (v1, v2)."""
    out = []
    for a, b, c in tri:
        la = np.hypot(*(p[c] - p[b]))
        lb = np.hypot(*(p[a] - p[c]))
        lc = np.hypot(*(p[b] - p[a]))
        k = int(np.argmax([la, lb, lc]))
        t = (a, b, c)
        out.append(t[k:] + t[:k])
    return out


def base_mesh(n: int, arc_breaks=()):
    """Symmetric Delaunay base mesh of the half-disk.

    Returns ``(vertices, triangles, bedges)`` where triangles are
    newest-vertex labelled (refinement edge ``(v1, v2)``) and ``bedges`` maps
    sorted boundary edge pairs to their ``on_arc`` flag.
    """
    folded = []
    for b in sorted(_fold_angle(b) for b in arc_breaks):
        if not folded or b - folded[-1] > 1e-12:
            folded.append(b)
    qp, qarc = _quarter_points(n, folded)
    dt = Delaunay(qp)
    if len(getattr(dt, "coplanar", [])):
        raise MeshIntegrityError("Delaunay dropped points of the base set")
    qtri = dt.simplices.astype(np.int64)
    d1 = qp[qtri[:, 1]] - qp[qtri[:, 0]]
    d2 = qp[qtri[:, 2]] - qp[qtri[:, 0]]
    neg = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0] < 0
    qtri[neg] = qtri[neg][:, [0, 2, 1]]
    qtri = sorted(_longest_edge_first(qp, qtri.tolist()))

    # mirror by exact negation; points on x = 0 are shared
    nq = len(qp)
    mirror = np.empty(nq, dtype=np.int64)
    pts = [tuple(p) for p in qp]
    arc = list(qarc)
    for i, (x, y) in enumerate(qp):
        if x == 0.0:
            mirror[i] = i
        else:
            mirror[i] = len(pts)
            pts.append((-x, y))
            arc.append(qarc[i])
    tris = [tuple(t) for t in qtri]
    tris += [(int(mirror[a]), int(mirror[c]), int(mirror[b])) for a, b, c in qtri]
    p = np.array(pts)
    arc = np.array(arc)

    count = {}
    for a, b, c in tris:
        for e in ((a, b), (b, c), (c, a)):
            k = (min(e), max(e))
            count[k] = count.get(k, 0) + 1
    bedges = {}
    for k, c in count.items():
        if c == 1:
            bedges[k] = bool(arc[k[0]] and arc[k[1]] and not (p[k[0], 1] == 0.0 and p[k[1], 1] == 0.0))
    return p, tris, bedges


# ---------------------------------------------------------------------------
# newest-vertex bisection


def _bisect(pts: list, tris: list, bedges: dict, marked) -> list:
    edge_tris: dict = {}
    for i, (a, b, c) in enumerate(tris):
        for e in ((a, b), (b, c), (c, a)):
            edge_tris.setdefault((min(e), max(e)), []).append(i)

    def refedge(tri):
        return (min(tri[1], tri[2]), max(tri[1], tri[2]))

    marked_edges = set()
    stack = []
    for i in marked:
        e = refedge(tris[i])
        if e not in marked_edges:
            marked_edges.add(e)
            stack.append(e)
    # closure: any triangle holding a marked edge must split its refinement edge
    while stack:
        e = stack.pop()
        for i in edge_tris[e]:
            r = refedge(tris[i])
            if r not in marked_edges:
                marked_edges.add(r)
                stack.append(r)

    mid = {}
    current = tris
    while True:
        nxt = []
        changed = False
        for tri in current:
            a, b, c = tri
            e = (min(b, c), max(b, c))
            if e not in marked_edges:
                nxt.append(tri)
                continue
            m = mid.get(e)
            if m is None:
                x = 0.5 * (pts[b][0] + pts[c][0])
                y = 0.5 * (pts[b][1] + pts[c][1])
                arc = bedges.pop(e, None)
                if arc:
                    r = math.hypot(x, y)
                    x, y = x / r, y / r
                m = len(pts)
                pts.append((x, y))
                mid[e] = m
                if arc is not None:
                    bedges[(min(e[0], m), max(e[0], m))] = arc
                    bedges[(min(e[1], m), max(e[1], m))] = arc
            nxt.append((m, a, b))
            nxt.append((m, c, a))
            changed = True
        current = nxt
        if not changed:
            return current


def _grade(p: np.ndarray, tris: list, bedges: dict, foci: np.ndarray, grading: GradingSpec):
    pts = [tuple(x) for x in p]
    if grading.n_layers == 0 or len(foci) == 0:
        return pts, tris, bedges
    arr = np.asarray(tris)
    h0 = _diameters(np.asarray(pts), arr).max()
    h_min = h0 * grading.ratio**grading.n_layers
    while True:
        P = np.asarray(pts)
        arr = np.asarray(tris)
        diam = _diameters(P, arr)
        dv = np.min(np.linalg.norm(P[:, None, :] - foci[None, :, :], axis=2), axis=1)
        dist = dv[arr].min(axis=1)
        need = (diam > h_min * (1 + 1e-9)) & (diam > grading.slope * dist)
        marked = np.flatnonzero(need)
        if len(marked) == 0:
            return pts, tris, bedges
        tris = _bisect(pts, tris, bedges, marked.tolist())


def _diameters(P, tri):
    q = P[tri]
    return np.max(np.stack([
        np.linalg.norm(q[:, 1] - q[:, 0], axis=1),
        np.linalg.norm(q[:, 2] - q[:, 1], axis=1),
        np.linalg.norm(q[:, 0] - q[:, 2], axis=1),
    ]), axis=0)


def _assemble_mesh(pts, tris, bedges, level=0, meta=None) -> TriMesh:
    keys = sorted(bedges)
    return TriMesh(
        vertices=np.asarray(pts, dtype=float),
        triangles=np.asarray(tris, dtype=np.int64),
        boundary_edges=np.asarray(keys, dtype=np.int64).reshape(-1, 2),
        boundary_tags=np.full(len(keys), "", dtype="<U1"),
        on_arc=np.array([bedges[k] for k in keys], dtype=bool),
        level=level,
        meta=meta or {},
    )


def _arc_breaks(bp: BoundaryPartition) -> list[float]:
    out = []
    for s in bp.junction_arclengths():
        if 1.0 < s < 1.0 + math.pi:
            out.append(s - 1.0)
    return out


def _min_base_resolution(arc_breaks) -> int:
    """Coarsest base resolution whose spacing is at most 3x the smallest arc gap.

    Coarser bases put a short arc edge under a distant apex and the bisection
    grading inherits the resulting slivers.
    """
    pts = sorted({0.0, 0.5 * math.pi, *(_fold_angle(b) for b in arc_breaks)})
    gap = min(b - a for a, b in zip(pts[:-1], pts[1:]) if b - a > 1e-12)
    return max(1, math.ceil(1.0 / (3.0 * gap) - 1e-9))


def generate_initial(bp: BoundaryPartition, target_triangles: int = 288,
                     grading: GradingSpec | None = None, symmetric: bool = False,
                     max_base: int = 40) -> TriMesh:
    """Graded initial mesh of the half-disk with all junctions as vertices.

    The base resolution is chosen so the triangle count is as close as
    possible (in log scale) to ``target_triangles``; a configuration whose
    best count is off by more than a factor two is rejected.

    With ``symmetric=True`` the grading foci are closed under ``x -> -x``,
    which yields a mirror-symmetric mesh.
    """
    if target_triangles < 16:
        raise ConfigurationError("target_triangles must be >= 16")
    grading = GradingSpec() if grading is None else grading
    foci = grading.foci if grading.foci is not None else bp.junction_points()
    foci = np.asarray(foci, dtype=float).reshape(-1, 2)
    if symmetric and len(foci):
        mirrored = foci * np.array([-1.0, 1.0])
        foci = np.unique(np.vstack([foci, mirrored]), axis=0)
    breaks = _arc_breaks(bp)

    best = None
    for n in range(_min_base_resolution(breaks), max_base + 1):
        p, tris, bedges = base_mesh(n, breaks)
        if len(tris) > 2 * target_triangles:
            break
        h0 = float(_diameters(np.asarray(p), np.asarray(tris)).max())
        pts, tris, bedges = _grade(p, tris, bedges, foci, grading)
        err = abs(math.log(len(tris) / target_triangles))
        if best is None or err < best[0]:
            best = (err, n, pts, tris, bedges, h0)
        if len(tris) > 2 * target_triangles:
            break
    if best is None or best[0] > math.log(2.0):
        got = "none" if best is None else len(best[3])
        raise ConfigurationError(
            f"grading infeasible for target {target_triangles} triangles (closest: {got})")
    _, n, pts, tris, bedges, h0 = best
    mesh = _assemble_mesh(pts, tris, bedges, meta={"base_resolution": n, "grading": grading,
                                                   "foci": foci.tolist(), "h0": h0})
    mesh = mesh.with_tags(bp)
    mesh.check()
    return mesh


def unit_square(n: int = 1, tag: str = DIRICHLET) -> TriMesh:
    """Structured ``n x n`` mesh of the unit square (two triangles per cell)."""
    xs = np.linspace(0.0, 1.0, n + 1)
    X, Y = np.meshgrid(xs, xs, indexing="xy")
    pts = np.column_stack([X.ravel(), Y.ravel()])
    tris = []
    for j in range(n):
        for i in range(n):
            a = j * (n + 1) + i
            b, c, d = a + 1, a + n + 2, a + n + 1
            tris += [(a, b, c), (a, c, d)]
    bedges = {}
    for i in range(n):
        for a, b in ((i, i + 1), (n * (n + 1) + i, n * (n + 1) + i + 1),
                     (i * (n + 1), (i + 1) * (n + 1)), (i * (n + 1) + n, (i + 1) * (n + 1) + n)):
            bedges[(min(a, b), max(a, b))] = False
    m = _assemble_mesh(pts, tris, bedges)
    return replace(m, boundary_tags=np.full(len(m.boundary_edges), tag, dtype="<U1"))


# ---------------------------------------------------------------------------
# tagging and refinement


def tag_boundary(m: TriMesh, bp: BoundaryPartition) -> np.ndarray:
    """Tag each boundary edge by the condition at its boundary midpoint."""
    tags = np.empty(len(m.boundary_edges), dtype="<U1")
    for k, (a, b) in enumerate(m.boundary_edges):
        pa, pb = m.vertices[a], m.vertices[b]
        mid = 0.5 * (pa + pb)
        if m.on_arc[k]:
            mid = mid / np.linalg.norm(mid)
        cond = classify_boundary_point(mid, bp)
        if cond == JUNCTION:
            raise MeshIntegrityError(f"junction inside boundary edge ({a}, {b})")
        for q in (pa, pb):
            c = classify_boundary_point(q, bp)
            if c not in (cond, JUNCTION):
                raise MeshIntegrityError(f"boundary edge ({a}, {b}) straddles a junction")
        tags[k] = cond
    return tags


def refine(m: TriMesh) -> TriMesh:
    """Split every triangle into four through its edge midpoints.

    Midpoints of arc chords are projected radially onto the unit circle.
    """
    edges = m.edges
    te = m.triangle_edges
    nv = m.n_vertices
    mids = 0.5 * (m.vertices[edges[:, 0]] + m.vertices[edges[:, 1]])
    bidx = m.edge_index(m.boundary_edges)
    arc_e = bidx[m.on_arc]
    if len(arc_e):
        mids[arc_e] /= np.linalg.norm(mids[arc_e], axis=1)[:, None]
    verts = np.vstack([m.vertices, mids])

    v0, v1, v2 = m.triangles.T
    m0, m1, m2 = (te + nv).T
    tris = np.empty((4 * m.n_triangles, 3), dtype=np.int64)
    tris[0::4] = np.column_stack([v0, m2, m1])
    tris[1::4] = np.column_stack([m2, v1, m0])
    tris[2::4] = np.column_stack([m1, m0, v2])
    tris[3::4] = np.column_stack([m0, m1, m2])

    bm = bidx + nv
    a, b = m.boundary_edges.T
    bedges = np.empty((2 * len(a), 2), dtype=np.int64)
    bedges[0::2] = np.column_stack([a, bm])
    bedges[1::2] = np.column_stack([bm, b])
    return TriMesh(
        vertices=verts,
        triangles=tris,
        boundary_edges=bedges,
        boundary_tags=np.repeat(m.boundary_tags, 2),
        on_arc=np.repeat(m.on_arc, 2),
        level=m.level + 1,
        meta=m.meta,
    )


def boundary_dof_masks(m: TriMesh, element: str = "conforming"):
    """Split degrees of freedom into Dirichlet-constrained and free sets.

    Conforming DOFs are vertices; every vertex of a Dirichlet edge (junctions
    included) is constrained.  Nonconforming DOFs are edges; exactly the
    Dirichlet boundary edges are constrained.
    """
    tags = m.boundary_tags
    if np.any((tags != DIRICHLET) & (tags != NEUMANN)):
        raise MeshIntegrityError("untagged boundary edge")
    dmask = tags == DIRICHLET
    if element == "conforming":
        ndof = m.n_vertices
        dirichlet = np.unique(m.boundary_edges[dmask])
    elif element == "nonconforming":
        ndof = m.n_edges
        dirichlet = np.unique(m.edge_index(m.boundary_edges[dmask])) if dmask.any() else np.array([], dtype=np.int64)
    else:
        raise ConfigurationError(f"unknown element family {element!r}")
    dirichlet = dirichlet.astype(np.int64)
    free = np.setdiff1d(np.arange(ndof, dtype=np.int64), dirichlet)
    return dirichlet, free


@dataclass(frozen=True)
class MeshStatistics:
    n_vertices: int
    n_triangles: int
    n_edges: int
    n_boundary_edges: int
    h_max: float
    h_min: float
    aspect_max: float
    aspect_mean: float
    dirichlet_length: float
    neumann_length: float
    level: int

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def mesh_statistics(m: TriMesh) -> MeshStatistics:
    diam = m.diameters()
    asp = m.aspect_ratios()
    be = m.boundary_edges
    lengths = np.linalg.norm(m.vertices[be[:, 0]] - m.vertices[be[:, 1]], axis=1)
    return MeshStatistics(
        n_vertices=m.n_vertices,
        n_triangles=m.n_triangles,
        n_edges=m.n_edges,
        n_boundary_edges=len(be),
        h_max=float(diam.max()),
        h_min=float(diam.min()),
        aspect_max=float(asp.max()),
        aspect_mean=float(asp.mean()),
        dirichlet_length=float(lengths[m.boundary_tags == DIRICHLET].sum()),
        neumann_length=float(lengths[m.boundary_tags == NEUMANN].sum()),
        level=m.level,
    )


def focus_min_diameter(m: TriMesh, focus) -> float:
    """Smallest diameter among triangles incident to the vertex nearest ``focus``."""
    v = int(np.argmin(np.linalg.norm(m.vertices - np.asarray(focus), axis=1)))
    touching = np.any(m.triangles == v, axis=1)
    return float(m.diameters()[touching].min())


# ---------------------------------------------------------------------------
# text format


def write_mesh(m: TriMesh, path) -> None:
    lines = [MESH_HEADER, str(m.n_vertices)]
    lines += [f"{x!r} {y!r}" for x, y in m.vertices.tolist()]
    lines.append(str(m.n_triangles))
    lines += [f"{i} {j} {k}" for i, j, k in m.triangles.tolist()]
    lines.append(str(len(m.boundary_edges)))
    for (i, j), tag, arc in zip(m.boundary_edges.tolist(), m.boundary_tags, m.on_arc):
        lines.append(f"{i} {j} {tag or '-'} {int(arc)}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_mesh(path) -> TriMesh:
    with open(path) as fh:
        rows = [ln.strip() for ln in fh if ln.strip()]
    if not rows or rows[0] != MESH_HEADER:
        raise MeshIntegrityError(f"{path}: missing '{MESH_HEADER}' header")
    pos = 1
    nv = int(rows[pos]); pos += 1
    verts = np.array([[float(v) for v in rows[pos + i].split()] for i in range(nv)]).reshape(-1, 2)
    pos += nv
    nt = int(rows[pos]); pos += 1
    tris = np.array([[int(v) for v in rows[pos + i].split()] for i in range(nt)], dtype=np.int64).reshape(-1, 3)
    pos += nt
    nb = int(rows[pos]); pos += 1
    be, tags, arc = [], [], []
    for i in range(nb):
        a, b, tag, flag = rows[pos + i].split()
        be.append((int(a), int(b)))
        tags.append("" if tag == "-" else tag)
        arc.append(flag == "1")
    return TriMesh(
        vertices=verts,
        triangles=tris,
        boundary_edges=np.array(be, dtype=np.int64).reshape(-1, 2),
        boundary_tags=np.array(tags, dtype="<U1"),
        on_arc=np.array(arc, dtype=bool),
    )
