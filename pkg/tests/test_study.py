import csv
import json
import math

import numpy as np
import pytest

from halfdisk import study
from halfdisk.assembly import CONFORMING, NONCONFORMING
from halfdisk.errors import BracketError, ConfigurationError, ConvergenceError
from halfdisk.geometry import make_partition
from halfdisk.study import (
    ConvergenceRecord,
    SwapRow,
    contour_export,
    extrapolate,
    find_critical_t,
    run_convergence,
    solve_mesh,
    sweep_t,
    swap_isospectrality_report,
)


def test_extrapolate_geometric():
    ex = extrapolate([2 + 4.0**-l for l in range(5)])
    assert ex.limit == pytest.approx(2.0, abs=1e-12)
    assert ex.rate == pytest.approx(2.0, abs=1e-12)


def test_extrapolate_published_sequence():
    ex = extrapolate([2.3543, 2.3060, 2.2853, 2.2790, 2.2768])
    assert ex.limit == pytest.approx(2.2752, abs=5e-4)
    assert 0.8 < ex.rate < 1.8


def test_extrapolate_declines_non_monotone():
    ex = extrapolate([2.30, 2.29, 2.295])
    assert ex.limit is None
    assert extrapolate([2.4, 2.35, 2.31]).limit is not None  # q = 1.25
    assert extrapolate([2.3, 2.29, 2.27]).limit is None  # q = 0.5, growing steps


def test_extrapolate_needs_three():
    with pytest.raises(ConfigurationError):
        extrapolate([2.3, 2.29])


def test_convergence_early_stop():
    recs = run_convergence(CONFORMING, err_stop=1.0)
    assert len(recs) == 1 and recs[0].level == 0


def test_convergence_memory_cap():
    with pytest.raises(ConfigurationError):
        run_convergence(CONFORMING, max_levels=6)
    with pytest.raises(ConfigurationError):
        run_convergence(CONFORMING, max_levels=0)


def test_convergence_records():
    recs = run_convergence(CONFORMING, max_levels=3)
    assert [r.level for r in recs] == [0, 1, 2]
    for a, b in zip(recs, recs[1:]):
        assert b.triangles == 4 * a.triangles
        assert b.eigenvalue < a.eigenvalue
        assert b.n_dofs > a.n_dofs
    assert all(r.iterations > 0 and r.wall_time >= 0 for r in recs)


def test_convergence_level_in_error(monkeypatch):
    calls = {"n": 0}
    real = study.solve_mesh

    def flaky(m, fam, cfg=None):
        calls["n"] += 1
        if calls["n"] == 2:
            raise ConvergenceError("no convergence", 1e-3)
        return real(m, fam, cfg)

    monkeypatch.setattr(study, "solve_mesh", flaky)
    with pytest.raises(ConvergenceError) as info:
        run_convergence(CONFORMING, max_levels=3)
    assert info.value.level == 1
    assert "level 1" in str(info.value)


def test_nonconforming_below_conforming(mesh2):
    a = solve_mesh(mesh2, CONFORMING).first.eigenvalue
    b = solve_mesh(mesh2, NONCONFORMING).first.eigenvalue
    assert b < a


def test_certify_lowest(mesh0):
    assert solve_mesh(mesh0, CONFORMING).certify()


def test_sweep_branches():
    recs = sweep_t([0.4, 0.6, 1.0, 1.2], level=1)
    assert [r.t for r in recs] == [0.4, 0.6, 1.0, 1.2]
    assert all(not r.error for r in recs)
    # below pi/4 the window problem is the smaller one, above it the swap
    assert recs[0].eigenvalue_dirichlet_window < recs[0].eigenvalue_swapped
    assert recs[-1].eigenvalue_dirichlet_window > recs[-1].eigenvalue_swapped
    win = [r.eigenvalue_dirichlet_window for r in recs]
    swp = [r.eigenvalue_swapped for r in recs]
    assert win == sorted(win)
    assert swp == sorted(swp, reverse=True)


def test_sweep_rejects_bad_t():
    with pytest.raises(ConfigurationError):
        sweep_t([0.0])
    with pytest.raises(ConfigurationError):
        sweep_t([math.pi / 2])


def test_sweep_records_failures(monkeypatch):
    real = study._both_problems

    def flaky(t, *rest):
        if t == 0.5:
            raise ConvergenceError("boom", 1.0)
        return real(t, *rest)

    monkeypatch.setattr(study, "_both_problems", flaky)
    recs = sweep_t([0.3, 0.5, 0.7], level=0)
    assert recs[1].error.startswith("ConvergenceError")
    assert math.isnan(recs[1].lambda1)
    assert not recs[0].error and not recs[2].error


def test_sweep_parallel_matches_serial():
    ts = [0.5, 0.9]
    assert sweep_t(ts, level=0, jobs=2) == sweep_t(ts, level=0, jobs=1)


def test_canonical_gap_small():
    rec = sweep_t([math.pi / 4], level=3)[0]
    assert abs(rec.eigenvalue_dirichlet_window - rec.eigenvalue_swapped) < 5e-3


def test_find_t_bracket_error():
    with pytest.raises(BracketError):
        find_critical_t(3.0, level=1)


def test_find_t_near_bracket_edge():
    lo = 0.1
    f_lo = study.lambda1(lo, level=1)
    res = find_critical_t(f_lo + 1e-3, bracket=(lo, math.pi / 4), level=1, tol_t=1e-3)
    assert res.t - lo < 0.05
    assert res.t_hi - res.t_lo <= 1e-3


def test_find_t_rejects_bad_bracket():
    with pytest.raises(ConfigurationError):
        find_critical_t(2.0, bracket=(0.5, 0.4), level=0)


def test_swap_report_shrinking_gap():
    rows = swap_isospectrality_report(level=2, n_eigs=2)
    assert [(r.index, r.level) for r in rows] == [(1, 1), (2, 1), (1, 2), (2, 2)]
    assert rows[2].gap < rows[0].gap


def test_swap_report_validation():
    with pytest.raises(ConfigurationError):
        swap_isospectrality_report(level=2, n_eigs=11)
    with pytest.raises(ConfigurationError):
        swap_isospectrality_report(level=0)


@pytest.mark.parametrize("fam", [CONFORMING, NONCONFORMING])
def test_contour_export(tmp_path, mesh0, fam):
    out = solve_mesh(mesh0, fam)
    v = -out.full_vector()
    p, tp = contour_export(v, mesh0, fam, tmp_path / "c.csv", out.B)
    with open(p) as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == mesh0.n_vertices
    xy = np.array([[float(r["x"]), float(r["y"])] for r in rows])
    vals = np.array([float(r["value"]) for r in rows])
    # the junction vertex carries zero, the function is single-signed
    j = np.argmin(np.linalg.norm(xy - [math.cos(math.pi / 4), math.sin(math.pi / 4)], axis=1))
    assert vals[j] == 0.0
    assert vals.min() >= -1e-3 * vals.max()
    if fam is CONFORMING:
        assert vals.max() == pytest.approx(np.max(np.abs(v)), rel=1e-14)
    with open(tp) as fh:
        assert sum(1 for _ in fh) == mesh0.n_triangles + 1


def test_contour_unwritable(tmp_path, mesh0):
    out = solve_mesh(mesh0)
    with pytest.raises(OSError):
        contour_export(out.full_vector(), mesh0, CONFORMING, tmp_path / "missing" / "c.csv")


def test_run_id_stable():
    cfg = {"a": 1, "b": [0.5, 2.0], "c": {"d": None}}
    assert study.run_id(cfg) == study.run_id(json.loads(json.dumps(cfg)))
    assert study.run_id(cfg) != study.run_id({**cfg, "a": 2})
    assert len(study.run_id(cfg)) == 12


def test_csv_writer(tmp_path):
    recs = [ConvergenceRecord(0, 2.4, 1e-5, 100, 288, 30, 0.5)]
    p = tmp_path / "r.csv"
    study.write_csv(recs, p)
    lines = p.read_text().splitlines()
    assert lines[0] == "level,eigenvalue,err,n_dofs,triangles,iterations"
    rows = [SwapRow(1, 3, 2.3, 2.31)]
    study.write_csv(rows, p)
    assert p.read_text().splitlines()[0].endswith(",gap")
    with pytest.raises(ConfigurationError):
        study.write_csv([], p)


def test_json_writer_handles_numpy(tmp_path):
    p = tmp_path / "x.json"
    study.write_json({"a": np.float64(1.5), "b": np.arange(2), "c": math.nan,
                      "bp": make_partition(0.5)}, p)
    data = json.loads(p.read_text())
    assert data == {"a": 1.5, "b": [0, 1], "bp": {"swapped": False, "t": 0.5}, "c": "nan"}
