import cmath
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from halfdisk import symmetry as sym
from halfdisk.errors import DomainError, VerificationError
from halfdisk.symmetry import SurfacePoint, apply_symmetry, covering_value, marked_point


def test_covering_examples():
    assert covering_value(0) == 0
    assert covering_value(1) == pytest.approx(-1, abs=1e-15)
    for m in (1, 2):
        p = marked_point(1, m)
        assert p.w == (1j if m == 1 else -1j)


def test_covering_pole():
    with pytest.raises(DomainError):
        covering_value(-sym.E1)


@given(st.floats(0.1, 3.0), st.floats(0, 2 * math.pi))
def test_inversion_identity(r, a):
    z0 = r * cmath.exp(1j * a)
    if min(abs(z0 - p) for p in sym.POLES + tuple(-p for p in sym.POLES)) < 1e-3:
        return
    lhs = covering_value(1 / z0.conjugate())
    rhs = covering_value(z0).conjugate() / z0.conjugate() ** 2
    assert abs(lhs - rhs) <= 1e-12 * (1 + abs(rhs))


def test_marked_points_on_surface():
    for p in sym.marked_points().values():
        assert p.on_surface(1e-14)


def test_marked_w_closed_forms():
    assert marked_point(2, 1).w == pytest.approx((1 + 1j) / (2 + math.sqrt(2)), rel=1e-14)
    assert marked_point(4, 2).w == pytest.approx(-(1 - 1j) / (2 - math.sqrt(2)), rel=1e-14)


def test_apply_examples():
    p11 = marked_point(1, 1)
    assert sym.identify_marked(apply_symmetry("s1", p11)) == (1, 1)
    img = apply_symmetry("s2", p11)
    assert sym.identify_marked(img) == (3, 1)
    assert img.z == pytest.approx(-1) and img.w == pytest.approx(1)


def test_t_involution():
    for p in sym.random_surface_points(100, seed=3):
        q = apply_symmetry("TT", p)
        assert q == p


def test_apply_rejects_off_surface():
    with pytest.raises(DomainError):
        apply_symmetry("s1", SurfacePoint(0.5, 3.0))


def test_s3_rejects_origin():
    with pytest.raises(DomainError):
        apply_symmetry("s3", SurfacePoint(0, 0))


def test_unknown_word():
    with pytest.raises(DomainError):
        apply_symmetry("s4", marked_point(1, 1))


def test_images_stay_on_surface():
    for p in sym.random_surface_points(200, seed=5):
        for name in sym.SYMMETRY_NAMES:
            q = apply_symmetry(name, p)
            f = covering_value(q.z)
            assert abs(q.w ** 2 - f) <= 1e-10 * (1 + abs(f))


def test_base_projection_commutes():
    base = {"s1": lambda z: z.conjugate(), "s2": lambda z: -z.conjugate(), "s3": lambda z: 1 / z.conjugate()}
    for p in sym.random_surface_points(50, seed=7):
        for name, sigma in base.items():
            assert apply_symmetry(name, p).z == pytest.approx(sigma(p.z), abs=1e-14)
            assert apply_symmetry("T" + name, p).z == pytest.approx(sigma(p.z), abs=1e-14)


def test_relations():
    report = sym.verify_relations(100)
    assert set(sym.RELATIONS) <= set(report)
    assert max(report.values()) <= 1e-10


def test_relations_sample_count():
    with pytest.raises(DomainError):
        sym.verify_relations(0)


def test_random_points_avoid_special_points():
    pts = sym.random_surface_points(300, seed=11)
    for p in pts:
        assert min(abs(p.z - s) for s in sym.RAMIFICATION) >= 0.05
        assert 0.25 <= abs(p.z) <= 4.0


def test_table_shape_and_t_action():
    table = sym.reproduce_symmetry_table()
    assert len(table) == 8 and all(len(row) == 3 for row in table.values())
    for (j, m), row in table.items():
        flipped = table[(j, 3 - m)]
        for (k, n), (k2, n2) in zip(row, flipped):
            assert k2 == k and n2 == 3 - n


def test_table_cells_from_examples():
    table = sym.reproduce_symmetry_table()
    assert table[(3, 1)][0] == (3, 2)
    assert table[(2, 1)][2] == (2, 1)
    assert table[(1, 1)] == ((1, 1), (3, 1), (1, 2))


def test_computed_table_is_consistent():
    assert sym.table_consistency(sym.reproduce_symmetry_table()) == []


def test_consistency_detects_broken_involution():
    table = dict(sym.REFERENCE_TABLE)
    assert any("s2" in msg for msg in sym.table_consistency(table))


def test_mismatch_listing():
    table = sym.reproduce_symmetry_table()
    assert sym.table_mismatches(table, table) == []
    other = dict(table)
    other[(1, 1)] = ((2, 2),) + table[(1, 1)][1:]
    assert sym.table_mismatches(table, other) == [((1, 1), 1, (1, 1), (2, 2))]


def test_identify_failure_raises(monkeypatch):
    monkeypatch.setattr(sym, "identify_marked", lambda p, tol=0: None)
    with pytest.raises(VerificationError):
        sym.reproduce_symmetry_table()


def test_fixed_point_examples():
    p = SurfacePoint(0.5, cmath.sqrt(covering_value(0.5)))
    assert sym.fixed_point_membership("s1", p)
    q = SurfacePoint(-0.5, cmath.sqrt(covering_value(-0.5)))
    assert sym.fixed_point_membership("Ts1", q)
    assert not sym.fixed_point_membership("s1", q)


def test_generic_point_not_fixed():
    for p in sym.random_surface_points(50, seed=13):
        assert not any(sym.fixed_point_membership(n, p) for n in sym.SYMMETRY_NAMES[1:])


def test_fixed_sets():
    assert all(sym.verify_fixed_sets().values())


def test_lift_path_continuity():
    # half circle of radius 0.5, away from every branch point
    zs = 0.5 * np.exp(1j * np.linspace(0.1, 3.0, 200))
    w0 = cmath.sqrt(covering_value(zs[0]))
    ws = sym.lift_path(zs, w0)
    assert np.all(np.abs(np.diff(ws)) < np.abs(ws[1:]))
    for z, w in zip(zs, ws):
        assert sym.surface_defect(z, w) < 1e-12


def test_lift_path_too_coarse():
    with pytest.raises(DomainError):
        sym.lift_path([1.0, -1.0], 1j)


def test_lifted_arc_starts_at_marked_point():
    for k in range(1, 9):
        kk = (k - 1) % 4 + 1
        s0 = sym._marked_parameter(k)
        p = sym.lift_arc_point(k, 2, s0 + (1e-3 if k > 4 else 0.001))
        q = marked_point(kk, 2)
        assert abs(p.w - q.w) < 0.05
