"""Symmetries of the genus-two surface ``w^2 = F(z)``.

The surface is the two-sheeted cover of the Riemann sphere

    F(z) = z (z - e^{i pi/4}) (z - e^{3i pi/4}) / ((z + e^{i pi/4}) (z + e^{3i pi/4})),

branched over ``0``, ``infinity`` and the four points ``e^{(2k+1) i pi/4}``.
The lifted reflections are

    s1 : (z, w) -> (conj z, conj z / conj w)
    s2 : (z, w) -> (-conj z, i conj w)
    s3 : (z, w) -> (1 / conj z, conj w / conj z)

together with the sheet swap ``T : (z, w) -> (z, -w)``.  Everything here is
plain complex floating-point arithmetic with explicit tolerances; sheets away
from the four marked points are identified by following ``w`` continuously
along a path in the base.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, VerificationError

SURFACE_TOL = 1e-12
MATCH_TOL = 1e-12
FIXED_TOL = 1e-10

E1 = cmath.exp(1j * math.pi / 4)
E3 = cmath.exp(3j * math.pi / 4)
POLES = (-E1, -E3)
RAMIFICATION = (0j, E1, E3, -E1, -E3)

SQRT2 = math.sqrt(2.0)

# base points z_j and the chosen square roots w_j^(1); w_j^(2) = -w_j^(1)
MARKED_BASE = {1: 1 + 0j, 2: 1j, 3: -1 + 0j, 4: -1j}
MARKED_W1 = {
    1: 1j,
    2: (1 + 1j) / (2 + SQRT2),
    3: 1 + 0j,
    4: (1 - 1j) / (2 - SQRT2),
}

# s_l p_j^(m) = p_k^(n); rows (j, m), columns l = 1, 2, 3
REFERENCE_TABLE = {
    (1, 1): ((1, 1), (3, 1), (1, 2)),
    (1, 2): ((1, 2), (3, 2), (1, 1)),
    (2, 1): ((4, 1), (2, 1), (2, 1)),
    (2, 2): ((4, 2), (2, 2), (2, 2)),
    (3, 1): ((3, 2), (1, 2), (3, 2)),
    (3, 2): ((3, 1), (1, 1), (3, 1)),
    (4, 1): ((2, 1), (4, 2), (4, 1)),
    (4, 2): ((2, 2), (4, 1), (4, 2)),
}

# which lift fixes which preimage of the rays and arcs
FIXED_SETS = {
    "s1": (1,),
    "Ts1": (3,),
    "s2": (2,),
    "Ts2": (4,),
    "s3": (6, 8),
    "Ts3": (5, 7),
}


def covering_value(z: complex) -> complex:
    """``F(z)``; raises :class:`DomainError` at the two finite poles."""
    z = complex(z)
    for p in POLES:
        if abs(z - p) <= SURFACE_TOL:
            raise DomainError(f"z = {z} is a pole of the covering map")
    return z * (z - E1) * (z - E3) / ((z + E1) * (z + E3))


def surface_defect(z: complex, w: complex) -> float:
    """Relative violation ``|w^2 - F(z)| / (1 + |F(z)|)``."""
    f = covering_value(z)
    return abs(w * w - f) / (1.0 + abs(f))


@dataclass(frozen=True)
class SurfacePoint:
    z: complex
    w: complex
    sheet: int | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "z", complex(self.z))
        object.__setattr__(self, "w", complex(self.w))

    def on_surface(self, tol: float = SURFACE_TOL) -> bool:
        return surface_defect(self.z, self.w) <= tol

    def distance(self, other: SurfacePoint) -> float:
        return max(abs(self.z - other.z), abs(self.w - other.w))


def _s1(z, w):
    return z.conjugate(), z.conjugate() / w.conjugate()


def _s2(z, w):
    return -z.conjugate(), 1j * w.conjugate()


def _s3(z, w):
    return 1.0 / z.conjugate(), w.conjugate() / z.conjugate()


def _t(z, w):
    return z, -w


_BASIC = {"s1": _s1, "s2": _s2, "s3": _s3, "T": _t, "id": lambda z, w: (z, w)}
SYMMETRY_NAMES = ("id", "T", "s1", "s2", "s3", "Ts1", "Ts2", "Ts3")


def _parse(name: str) -> list[str]:
    """Split a word like ``"Ts1s2"`` into basic factors, leftmost applied last."""
    out, i = [], 0
    while i < len(name):
        if name[i] == "T":
            out.append("T")
            i += 1
        elif name.startswith("id", i):
            out.append("id")
            i += 2
        elif name[i] == "s" and i + 1 < len(name) and name[i + 1] in "123":
            out.append(name[i:i + 2])
            i += 2
        else:
            raise DomainError(f"unknown symmetry word {name!r}")
    return out


def apply_symmetry(name: str, p: SurfacePoint, check: bool = True) -> SurfacePoint:
    """Apply a word in ``T, s1, s2, s3`` to ``p``.

    Words compose right to left, so ``"Ts1"`` means ``T`` after ``s1``.
    """
    factors = _parse(name)
    if check and not p.on_surface(1e-10):
        raise DomainError(f"point ({p.z}, {p.w}) is not on the surface")
    z, w = p.z, p.w
    for f in reversed(factors):
        if f in ("s1", "s3") and w == 0:
            raise DomainError(f"{f} is undefined at a ramification point with w = 0")
        if f == "s3" and z == 0:
            raise DomainError("s3 is undefined at z = 0")
        z, w = _BASIC[f](z, w)
    return SurfacePoint(z, w)


def marked_point(j: int, m: int) -> SurfacePoint:
    if j not in MARKED_BASE or m not in (1, 2):
        raise DomainError(f"no marked point p_{j}^({m})")
    w = MARKED_W1[j] if m == 1 else -MARKED_W1[j]
    return SurfacePoint(MARKED_BASE[j], w, sheet=m)


def marked_points() -> dict[tuple[int, int], SurfacePoint]:
    return {(j, m): marked_point(j, m) for j in range(1, 5) for m in (1, 2)}


def identify_marked(p: SurfacePoint, tol: float = MATCH_TOL) -> tuple[int, int] | None:
    for key, q in marked_points().items():
        if abs(p.z - q.z) <= tol * (1 + abs(q.z)) and abs(p.w - q.w) <= tol * (1 + abs(q.w)):
            return key
    return None


def reproduce_symmetry_table() -> dict[tuple[int, int], tuple]:
    """Images ``s_l p_j^(m)`` identified as marked points.

    Returns ``{(j, m): ((k, n) for l = 1, 2, 3)}``.  Raises
    :class:`VerificationError` if some image is not a marked point.
    """
    table = {}
    for key, p in marked_points().items():
        row = []
        for l in (1, 2, 3):
            img = apply_symmetry(f"s{l}", p)
            hit = identify_marked(img)
            if hit is None:
                raise VerificationError(f"s{l} p_{key} = ({img.z}, {img.w}) is not a marked point")
            row.append(hit)
        table[key] = tuple(row)
    return table


def table_mismatches(table: dict, reference: dict = REFERENCE_TABLE) -> list[tuple]:
    """Cells ``((j, m), l, computed, expected)`` where ``table`` differs from ``reference``."""
    out = []
    for key in sorted(reference):
        for l in (1, 2, 3):
            got, want = table[key][l - 1], reference[key][l - 1]
            if got != want:
                out.append((key, l, got, want))
    return out


def table_consistency(table: dict) -> list[str]:
    """Internal checks a correct table must pass, independent of any reference.

    Each ``s_l`` is an involution, so the map ``(j, m) -> (k, n)`` in each
    column squares to the identity; and ``T`` commutes with ``s_l``, so
    flipping ``m`` flips ``n``.
    """
    problems = []
    for l in (1, 2, 3):
        col = {key: row[l - 1] for key, row in table.items()}
        for key, img in col.items():
            if col[img] != key:
                problems.append(f"s{l} applied twice sends {key} to {col[img]}")
            j, m = key
            k, n = img
            if col[(j, 3 - m)] != (k, 3 - n):
                problems.append(f"s{l} does not commute with T at {key}")
    return problems


def format_table(table: dict, flagged=()) -> str:
    """Plain-text grid; cells listed in ``flagged`` as ``((j, m), l)`` get a ``*``."""
    flagged = set(flagged)
    lines = ["(j,m)   l=1      l=2      l=3"]
    for key in sorted(table):
        cells = []
        for l, (k, n) in enumerate(table[key], start=1):
            mark = "*" if (key, l) in flagged else " "
            cells.append(f"({k},{n}){mark}")
        lines.append(f"({key[0]},{key[1]})   " + "   ".join(cells))
    return "\n".join(lines)


def principal_lift(z: complex) -> SurfacePoint:
    return SurfacePoint(z, cmath.sqrt(covering_value(z)))


def random_surface_points(n: int, seed: int = 0, r_min: float = 0.25, r_max: float = 4.0,
                          clearance: float = 0.05) -> list[SurfacePoint]:
    """Surface points over an annulus, at least ``clearance`` from branch points and poles.

    ``|z|`` is drawn log-uniformly so the annulus is mapped to itself by
    ``z -> 1/conj z``; the sheet is picked at random.
    """
    rng = np.random.default_rng(seed)
    special = np.array(RAMIFICATION[1:])
    out = []
    while len(out) < n:
        r = math.exp(rng.uniform(math.log(r_min), math.log(r_max)))
        z = r * cmath.exp(1j * rng.uniform(0.0, 2.0 * math.pi))
        if np.min(np.abs(special - z)) < clearance:
            continue
        w = cmath.sqrt(covering_value(z))
        if rng.random() < 0.5:
            w = -w
        out.append(SurfacePoint(z, w))
    return out


RELATIONS = {
    "s1^2 = id": ("s1s1", "id"),
    "s2^2 = id": ("s2s2", "id"),
    "s3^2 = id": ("s3s3", "id"),
    "s1s3 = s3s1": ("s1s3", "s3s1"),
    "s2s3 = s3s2": ("s2s3", "s3s2"),
    "s2s1 = Ts1s2": ("s2s1", "Ts1s2"),
}


def verify_relations(samples: int = 100, seed: int = 0) -> dict[str, float]:
    """Largest deviation of each group relation over random surface points.

    Also reports ``T^2 = id``, commutation of ``T`` with each ``s_j``, and
    the worst surface-equation defect of any image.
    """
    if samples < 1:
        raise DomainError("samples must be >= 1")
    pts = random_surface_points(samples, seed)
    rel = dict(RELATIONS)
    rel["T^2 = id"] = ("TT", "id")
    for j in (1, 2, 3):
        rel[f"Ts{j} = s{j}T"] = (f"Ts{j}", f"s{j}T")
    report = {name: 0.0 for name in rel}
    report["surface defect"] = 0.0
    for p in pts:
        for name, (lhs, rhs) in rel.items():
            a = apply_symmetry(lhs, p)
            b = apply_symmetry(rhs, p)
            scale = 1.0 + abs(a.z) + abs(a.w)
            report[name] = max(report[name], a.distance(b) / scale)
        for s in SYMMETRY_NAMES:
            q = apply_symmetry(s, p)
            report["surface defect"] = max(report["surface defect"], surface_defect(q.z, q.w))
    return report


def fixed_point_membership(name: str, p: SurfacePoint, tol: float = FIXED_TOL) -> bool:
    q = apply_symmetry(name, p)
    return q.distance(p) <= tol * (1.0 + abs(p.z) + abs(p.w))


def lift_path(zs, w0: complex) -> np.ndarray:
    """Follow ``w`` continuously along the base path ``zs`` starting from ``w0``.

    At each step the square root of ``F`` closest to the previous value is
    taken.  Raises :class:`DomainError` if a step is too coarse to decide
    (the two roots are not separated by more than the step).
    """
    zs = np.asarray(zs, dtype=complex)
    if surface_defect(zs[0], w0) > 1e-10:
        raise DomainError("starting value is not on the surface over zs[0]")
    ws = np.empty(len(zs), dtype=complex)
    ws[0] = w0
    for i in range(1, len(zs)):
        r = cmath.sqrt(covering_value(zs[i]))
        prev = ws[i - 1]
        w = r if abs(r - prev) <= abs(r + prev) else -r
        if abs(w - prev) >= abs(w):
            raise DomainError(f"path step {i} too coarse to follow the sheet")
        ws[i] = w
    return ws


def arc_parameter(k: int, s: float) -> complex:
    """Point of ray or arc ``a_k`` at parameter ``s``.

    Rays ``a_1..a_4`` use ``s > 0`` as distance from the origin along
    ``1, i, -1, -i``; arcs ``a_5..a_8`` use ``s`` in ``(2k-3, 2k-1)`` (with
    ``k`` the arc index minus four) and return ``e^{s i pi/4}``.
    """
    if 1 <= k <= 4:
        return s * MARKED_BASE[k]
    if 5 <= k <= 8:
        return cmath.exp(1j * math.pi * s / 4.0)
    raise DomainError(f"no arc a_{k}")


def _arc_range(k: int) -> tuple[float, float]:
    if k <= 4:
        return 0.0, math.inf
    j = k - 4
    return 2 * j - 3.0, 2 * j - 1.0


def _marked_parameter(k: int) -> float:
    # a_k passes through z_{k'} at this parameter
    return 1.0 if k <= 4 else 2.0 * (k - 4) - 2.0


def lift_arc_point(k: int, m: int, s: float, steps: int = 400) -> SurfacePoint:
    """Point of the component ``b_k^(m)`` over ``a_k`` at parameter ``s``.

    The component is the one through ``p_{k'}^(m)``, ``k' = ((k-1) mod 4) + 1``;
    the lift is carried from that marked point to ``s`` by continuity.
    """
    lo, hi = _arc_range(k)
    if not (lo < s < hi):
        raise DomainError(f"parameter {s} outside a_{k}")
    kk = (k - 1) % 4 + 1
    s0 = _marked_parameter(k)
    if k <= 4:
        # geometric spacing along a ray keeps steps small near 0 and infinity
        ss = np.exp(np.linspace(math.log(s0), math.log(s), steps))
    else:
        ss = np.linspace(s0, s, steps)
    zs = np.array([arc_parameter(k, x) for x in ss])
    ws = lift_path(zs, marked_point(kk, m).w)
    return SurfacePoint(zs[-1], ws[-1], sheet=m)


def sample_arc_parameters(k: int, n: int = 6, margin: float = 0.1) -> np.ndarray:
    """``n`` parameters on ``a_k``, skipping the crossing point ``z_{k'}``.

    At ``z_{k'}`` a ray meets an arc, so that point is fixed by two lifts
    and is useless for telling the components apart.
    """
    lo, hi = _arc_range(k)
    if k <= 4:
        ss = np.exp(np.linspace(math.log(0.2), math.log(5.0), n + 1))
    else:
        ss = np.linspace(lo + margin, hi - margin, n + 1)
    keep = np.abs(ss - _marked_parameter(k)) > 1e-6
    return ss[keep][:n]


def verify_fixed_sets(samples_per_arc: int = 6) -> dict[str, bool]:
    """Spot-check which lifts fix which arc components.

    For every arc ``a_k`` and sheet ``m``, sampled points of ``b_k^(m)`` must
    be fixed by exactly the symmetries listed in :data:`FIXED_SETS` for
    ``k`` and by none of the other nontrivial lifts.
    """
    owners = {k: name for name, ks in FIXED_SETS.items() for k in ks}
    result = {}
    for k in range(1, 9):
        ok = True
        for m in (1, 2):
            for s in sample_arc_parameters(k, samples_per_arc):
                p = lift_arc_point(k, m, s)
                for name in FIXED_SETS:
                    if fixed_point_membership(name, p) != (owners[k] == name):
                        ok = False
                if fixed_point_membership("T", p):
                    ok = False
        result[f"b{k}"] = ok
    return result
