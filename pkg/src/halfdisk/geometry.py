"""Half-disk domain, boundary partitions and the conformal weight.

The domain is ``D = {(r, psi): 0 < r < 1, 0 < psi < pi}``.  Its boundary is
parameterized by arc length ``s`` in ``[0, pi + 2)``, starting at the origin:

* ``0 <= s <= 1``        lower diameter ``(s, 0)``, i.e. ``psi = 0``
* ``1 <= s <= 1 + pi``   arc ``psi = s - 1``
* ``1 + pi <= s < 2 + pi`` upper diameter ``(-(2 + pi - s), 0)``, i.e. ``psi = pi``

The stereographic projection used throughout is taken from the north pole
onto the equatorial plane, so the origin is the image of the south pole and
the unit circle is the image of the equator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

JUNCTION_TOL = 1e-12
BOUNDARY_LENGTH = math.pi + 2.0

DIRICHLET = "D"
NEUMANN = "N"
JUNCTION = "J"

LOWER = "diameter-lower"
ARC = "arc"
UPPER = "diameter-upper"


@dataclass(frozen=True)
class HalfDisk:
    radius: float = 1.0

    @property
    def area(self) -> float:
        return 0.5 * math.pi * self.radius**2

    @property
    def perimeter(self) -> float:
        return (math.pi + 2.0) * self.radius


@dataclass(frozen=True)
class Segment:
    """A relatively open boundary piece.

    ``start``/``stop`` are radii for the diameters and angles for the arc.
    """

    kind: str
    start: float
    stop: float

    def arclength_interval(self) -> tuple[float, float]:
        if self.kind == LOWER:
            return self.start, self.stop
        if self.kind == ARC:
            return 1.0 + self.start, 1.0 + self.stop
        if self.kind == UPPER:
            # r runs outward from the origin, s runs inward
            return BOUNDARY_LENGTH - self.stop, BOUNDARY_LENGTH - self.start
        raise DomainError(f"unknown segment kind {self.kind!r}")

    @property
    def length(self) -> float:
        a, b = self.arclength_interval()
        return b - a


@dataclass(frozen=True)
class BoundaryPartition:
    """Split of the half-disk boundary into Dirichlet and Neumann pieces."""

    dirichlet_segments: tuple[Segment, ...]
    neumann_segments: tuple[Segment, ...]
    t: float | None = None
    swapped: bool = False
    _breaks: tuple = field(default=(), repr=False, compare=False)

    def __post_init__(self):
        pieces = [(s.arclength_interval(), DIRICHLET) for s in self.dirichlet_segments]
        pieces += [(s.arclength_interval(), NEUMANN) for s in self.neumann_segments]
        pieces.sort()
        pos = 0.0
        for (a, b), _ in pieces:
            if abs(a - pos) > JUNCTION_TOL or b < a:
                raise DomainError("segments must tile the boundary without gaps or overlaps")
            pos = b
        if abs(pos - BOUNDARY_LENGTH) > JUNCTION_TOL:
            raise DomainError("segments do not cover the whole boundary")
        object.__setattr__(self, "_breaks", tuple(pieces))

    @classmethod
    def uniform(cls, condition: str) -> BoundaryPartition:
        """Whole boundary Dirichlet (``"D"``) or Neumann (``"N"``)."""
        segs = (Segment(LOWER, 0.0, 1.0), Segment(ARC, 0.0, math.pi), Segment(UPPER, 0.0, 1.0))
        if condition == DIRICHLET:
            return cls(segs, ())
        if condition == NEUMANN:
            return cls((), segs)
        raise DomainError(f"condition must be 'D' or 'N', got {condition!r}")

    def swap(self) -> BoundaryPartition:
        return BoundaryPartition(self.neumann_segments, self.dirichlet_segments,
                                 t=self.t, swapped=not self.swapped)

    def condition_at(self, s: float) -> str:
        """Condition of the piece containing arc-length position ``s``."""
        s = s % BOUNDARY_LENGTH
        for (a, b), cond in self._breaks:
            if a <= s <= b:
                return cond
        return self._breaks[-1][1]

    def junction_arclengths(self) -> list[float]:
        out = []
        n = len(self._breaks)
        for i in range(n):
            (_, b), cond = self._breaks[i]
            nxt = self._breaks[(i + 1) % n][1]
            if cond != nxt:
                out.append(b % BOUNDARY_LENGTH)
        return sorted(out)

    def junction_points(self) -> list[tuple[float, float]]:
        return [arclength_to_point(s) for s in self.junction_arclengths()]

    def dirichlet_length(self) -> float:
        return sum(s.length for s in self.dirichlet_segments)

    def neumann_length(self) -> float:
        return sum(s.length for s in self.neumann_segments)

    def classify(self, p) -> str:
        return classify_boundary_point(p, self)


def make_partition(t: float, swapped: bool = False) -> BoundaryPartition:
    """Dirichlet on the lower diameter and on the arc window ``|psi - pi/2| < t``.

    With ``swapped=True`` the roles of the two pieces are exchanged.
    """
    if not (0.0 < t < 0.5 * math.pi):
        raise DomainError(f"t must lie in (0, pi/2), got {t!r}")
    lo, hi = 0.5 * math.pi - t, 0.5 * math.pi + t
    dirichlet = (Segment(LOWER, 0.0, 1.0), Segment(ARC, lo, hi))
    neumann = (Segment(ARC, 0.0, lo), Segment(ARC, hi, math.pi), Segment(UPPER, 0.0, 1.0))
    bp = BoundaryPartition(dirichlet, neumann, t=t)
    return bp.swap() if swapped else bp


def point_to_arclength(p, tol: float = JUNCTION_TOL) -> float:
    """Arc-length coordinate of a boundary point; raises if ``p`` is interior."""
    x, y = float(p[0]), float(p[1])
    r = math.hypot(x, y)
    if abs(y) <= tol and abs(x) <= 1.0 + tol:
        if abs(r - 1.0) <= tol:
            return 1.0 if x > 0 else 1.0 + math.pi
        return x if x >= 0 else BOUNDARY_LENGTH + x
    if abs(r - 1.0) <= tol and y >= -tol:
        return 1.0 + math.atan2(max(y, 0.0), x)
    raise DomainError(f"point {p!r} is not on the half-disk boundary")


def arclength_to_point(s: float) -> tuple[float, float]:
    s = s % BOUNDARY_LENGTH
    if s <= 1.0:
        return (s, 0.0)
    if s <= 1.0 + math.pi:
        psi = s - 1.0
        # exact corner values keep junctions bitwise on the axis
        if psi == math.pi:
            return (-1.0, 0.0)
        return (math.cos(psi), math.sin(psi))
    return (-(BOUNDARY_LENGTH - s), 0.0)


def classify_boundary_point(p, bp: BoundaryPartition) -> str:
    """Return ``"D"``, ``"N"`` or ``"J"`` (junction) for a boundary point."""
    s = point_to_arclength(p)
    for js in bp.junction_arclengths():
        d = abs(s - js)
        if min(d, BOUNDARY_LENGTH - d) <= JUNCTION_TOL:
            return JUNCTION
    return bp.condition_at(s)


def weight_at(r):
    """Conformal factor ``4 / (1 + r^2)^2`` of the round metric."""
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr < 0):
        raise DomainError("radial distance must be non-negative")
    w = 4.0 / (1.0 + r_arr * r_arr) ** 2
    return float(w) if w.ndim == 0 else w


def weight_xy(x, y):
    return 4.0 / (1.0 + x * x + y * y) ** 2


def unit_weight(x, y):
    return np.ones_like(np.asarray(x, dtype=float))


def stereo_to_sphere(z):
    """Point on the unit sphere projecting (from the north pole) to ``z``.

    Returns ``(phi, theta)`` with ``phi`` the azimuth and ``theta`` the polar
    angle measured from the north pole.  ``z = 0`` maps to ``theta = pi``;
    the unit circle maps to the equator ``theta = pi/2``.
    """
    z = np.asarray(z, dtype=complex)
    if np.any(np.abs(z) > 1.0 + JUNCTION_TOL) or np.any(z.imag < -JUNCTION_TOL):
        raise DomainError("z must lie in the closed upper unit half-disk")
    r2 = np.abs(z) ** 2
    zc = (r2 - 1.0) / (r2 + 1.0)
    theta = np.arccos(np.clip(zc, -1.0, 1.0))
    phi = np.angle(z)
    if theta.ndim == 0:
        return float(phi), float(theta)
    return phi, theta


def sphere_to_cartesian(phi, theta):
    st = np.sin(theta)
    return np.stack([st * np.cos(phi), st * np.sin(phi), np.cos(theta)], axis=-1)


def sphere_to_stereo(phi, theta):
    """Inverse of :func:`stereo_to_sphere` (projection from the north pole)."""
    xyz = sphere_to_cartesian(phi, theta)
    return (xyz[..., 0] + 1j * xyz[..., 1]) / (1.0 - xyz[..., 2])
