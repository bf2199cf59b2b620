"""Command-line interface.

Every subcommand reads an optional TOML config (tables ``[mesh]``,
``[solver]``, ``[study]`` plus a top-level ``output_dir``), applies command
line flags on top, validates the merged configuration, runs, and writes its
outputs together with a ``<command>-manifest.json`` into the output
directory.  The output directory defaults to ``$HALFDISK_OUTPUT_DIR`` or
``./halfdisk-output``.

Exit codes: 0 success, 1 verification mismatch, 2 configuration error,
3 solver error, 4 I/O error.
"""

from __future__ import annotations

import argparse
import copy
import datetime as _dt
import logging
import math
import os
import platform
import sys
import time
from pathlib import Path

import numpy as np
import scipy

try:
    import tomllib
except ImportError:  # Python < 3.11
    import tomli as tomllib

from . import __version__
from . import study, symmetry
from .assembly import element_family, write_coo
from .eigensolve import SolverConfig
from .errors import (
    BracketError,
    ConfigurationError,
    DomainError,
    HalfDiskError,
    VerificationError,
)
from .geometry import make_partition
from .mesh import GradingSpec, mesh_statistics, write_mesh

log = logging.getLogger("halfdisk")

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_IO = 4

OUTPUT_ENV = "HALFDISK_OUTPUT_DIR"
DEFAULT_OUTPUT = "halfdisk-output"

DEFAULT_CONFIG = {
    "output_dir": None,
    "mesh": {
        "target_triangles": 288,
        "grading_layers": GradingSpec().n_layers,
        "grading_ratio": GradingSpec().ratio,
        "grading_slope": GradingSpec().slope,
        "symmetric": False,
    },
    "solver": {
        "shift": None,
        "num_eigenpairs": 5,
        "tolerance": 1e-12,
        "max_iterations": 5000,
        "restart_dimension": None,
    },
    "study": {
        "family": "conforming",
        "t": math.pi / 4,
        "swapped": False,
        "levels": 2,
        "max_levels": 5,
        "err_stop": study.DEFAULT_ERR_STOP,
        "sweep_t": [round(0.5 * math.pi * (i + 1) / 10, 12) for i in range(9)],
        "level": 3,
        "target": 2.0,
        "bracket": [0.05, math.pi / 4],
        "tol_t": 1e-3,
        "n_eigs": 1,
        "swap_level": 4,
        "jobs": 1,
    },
}

# expected type per config path; None-valued defaults need it spelled out
TYPES = {
    "output_dir": (str, type(None)),
    "mesh.target_triangles": int,
    "mesh.grading_layers": int,
    "mesh.grading_ratio": float,
    "mesh.grading_slope": float,
    "mesh.symmetric": bool,
    "solver.shift": (float, type(None)),
    "solver.num_eigenpairs": int,
    "solver.tolerance": float,
    "solver.max_iterations": int,
    "solver.restart_dimension": (int, type(None)),
    "study.family": str,
    "study.t": float,
    "study.swapped": bool,
    "study.levels": int,
    "study.max_levels": int,
    "study.err_stop": float,
    "study.sweep_t": list,
    "study.level": int,
    "study.target": float,
    "study.bracket": list,
    "study.tol_t": float,
    "study.n_eigs": int,
    "study.swap_level": int,
    "study.jobs": int,
}


# ---------------------------------------------------------------------------
# configuration


def _check_type(path: str, value):
    want = TYPES[path]
    want = want if isinstance(want, tuple) else (want,)
    if float in want and isinstance(value, int) and not isinstance(value, bool):
        return float(value)
    if bool not in want and isinstance(value, bool):
        raise ConfigurationError(f"{path}: expected {want[0].__name__}, got bool")
    if not isinstance(value, want):
        raise ConfigurationError(f"{path}: expected {want[0].__name__}, got {type(value).__name__}")
    return value


def merge_config(base: dict, override: dict, prefix: str = "") -> dict:
    """Merge ``override`` into a copy of ``base``, rejecting unknown keys."""
    out = copy.deepcopy(base)
    for key, value in override.items():
        path = f"{prefix}{key}"
        if key not in base:
            raise ConfigurationError(f"{path}: unknown key")
        if isinstance(base[key], dict):
            if not isinstance(value, dict):
                raise ConfigurationError(f"{path}: expected a table")
            out[key] = merge_config(base[key], value, prefix=f"{path}.")
        else:
            out[key] = _check_type(path, value)
    return out


def load_config(path) -> dict:
    p = Path(path)
    if not p.is_file():
        raise ConfigurationError(f"config file not found: {p}")
    try:
        with open(p, "rb") as fh:
            raw = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigurationError(f"{p}: {exc}") from exc
    return merge_config(DEFAULT_CONFIG, raw)


def validate_config(cfg: dict) -> None:
    """Semantic checks with field-path diagnostics; raises :class:`ConfigurationError`."""
    m, s, st = cfg["mesh"], cfg["solver"], cfg["study"]
    checks = [
        ("mesh.target_triangles", m["target_triangles"] >= 16, "must be >= 16"),
        ("mesh.grading_layers", m["grading_layers"] >= 0, "must be >= 0"),
        ("mesh.grading_ratio", 0.0 < m["grading_ratio"] < 1.0, "must lie in (0, 1)"),
        ("mesh.grading_slope", m["grading_slope"] > 0, "must be positive"),
        ("solver.num_eigenpairs", s["num_eigenpairs"] >= 1, "must be >= 1"),
        ("solver.tolerance", s["tolerance"] >= 1e-14, "must be >= 1e-14"),
        ("solver.max_iterations", s["max_iterations"] >= 1, "must be >= 1"),
        ("solver.restart_dimension",
         s["restart_dimension"] is None or s["restart_dimension"] > s["num_eigenpairs"],
         "must exceed solver.num_eigenpairs"),
        ("study.family", st["family"] in ("conforming", "nonconforming"),
         "must be 'conforming' or 'nonconforming'"),
        ("study.t", 0.0 < st["t"] < 0.5 * math.pi, "must lie in (0, pi/2) radians"),
        ("study.levels", 0 <= st["levels"] <= study.MEMORY_CAP_LEVELS - 1,
         f"must lie in 0..{study.MEMORY_CAP_LEVELS - 1}"),
        ("study.max_levels", 1 <= st["max_levels"] <= study.MEMORY_CAP_LEVELS,
         f"must lie in 1..{study.MEMORY_CAP_LEVELS}"),
        ("study.err_stop", st["err_stop"] > 0, "must be positive"),
        ("study.level", 0 <= st["level"] <= study.MEMORY_CAP_LEVELS - 1,
         f"must lie in 0..{study.MEMORY_CAP_LEVELS - 1}"),
        ("study.swap_level", 1 <= st["swap_level"] <= study.MEMORY_CAP_LEVELS - 1,
         f"must lie in 1..{study.MEMORY_CAP_LEVELS - 1}"),
        ("study.tol_t", st["tol_t"] > 0, "must be positive"),
        ("study.n_eigs", 1 <= st["n_eigs"] <= 10, "must lie in 1..10"),
        ("study.jobs", st["jobs"] >= 1, "must be >= 1"),
        ("study.sweep_t", len(st["sweep_t"]) > 0
         and all(isinstance(t, (int, float)) and 0 < t < 0.5 * math.pi for t in st["sweep_t"]),
         "must be a non-empty list of angles in (0, pi/2) radians"),
        ("study.bracket", len(st["bracket"]) == 2
         and all(isinstance(t, (int, float)) for t in st["bracket"])
         and 0 < st["bracket"][0] < st["bracket"][1] < 0.5 * math.pi,
         "must be [t_lo, t_hi] with 0 < t_lo < t_hi < pi/2"),
    ]
    for path, ok, msg in checks:
        if not ok:
            raise ConfigurationError(f"{path}: {msg}")


def grading_of(cfg: dict) -> GradingSpec:
    m = cfg["mesh"]
    return GradingSpec(n_layers=m["grading_layers"], ratio=m["grading_ratio"], slope=m["grading_slope"])


def solver_of(cfg: dict, fam) -> SolverConfig:
    s = cfg["solver"]
    shift = element_family(fam).default_shift if s["shift"] is None else s["shift"]
    return SolverConfig(shift=shift, num_eigenpairs=s["num_eigenpairs"], tolerance=s["tolerance"],
                        max_iterations=s["max_iterations"], restart_dimension=s["restart_dimension"])


# ---------------------------------------------------------------------------
# commands; each returns (list of written files, summary dict)


def cmd_solve(cfg: dict, out: Path, args):
    st = cfg["study"]
    fam = element_family(st["family"])
    bp = make_partition(st["t"], swapped=st["swapped"])
    m = study.initial_mesh(bp, grading_of(cfg), cfg["mesh"]["target_triangles"],
                           cfg["mesh"]["symmetric"]).refined(st["levels"])
    res = study.solve_mesh(m, fam, solver_of(cfg, fam))
    first = res.first
    summary = {
        "family": fam.kind,
        "t": st["t"],
        "swapped": st["swapped"],
        "level": st["levels"],
        "eigenvalues": [r.eigenvalue for r in res.results],
        "eigenvalue": first.eigenvalue,
        "residual": first.residual,
        "iterations": first.iterations,
        "shift": first.shift,
        "n_dofs": res.n_dofs,
        "err": res.err(),
        "certified_lowest": res.certify(),
        "mesh": mesh_statistics(m).as_dict(),
    }
    print(f"lambda_1 = {first.eigenvalue:.11f}  (level {st['levels']}, {fam.kind}, "
          f"{res.n_dofs} dofs, residual {first.residual:.2e})")
    files = [out / "solve.json"]
    study.write_json(summary, files[0])
    if args.contour:
        files += [Path(p) for p in study.contour_export(res.full_vector(), m, fam,
                                                         out / "contour.csv", res.B)]
    if args.dump_matrices:
        write_coo(res.A, out / "stiffness.coo")
        write_coo(res.B, out / "mass.coo")
        files += [out / "stiffness.coo", out / "mass.coo"]
    return files, summary


def cmd_converge(cfg: dict, out: Path, args):
    st = cfg["study"]
    fam = element_family(st["family"])
    bp = make_partition(st["t"], swapped=st["swapped"])
    recs = study.run_convergence(fam, bp, st["max_levels"], st["err_stop"], grading_of(cfg),
                                 cfg["mesh"]["target_triangles"], cfg["mesh"]["symmetric"],
                                 solver_of(cfg, fam))
    print(f"{'level':>5} {'lambda_h':>15} {'Err':>11} {'N_h':>7} {'triangles':>9} {'iters':>5}")
    for r in recs:
        print(f"{r.level:5d} {r.eigenvalue:15.11f} {r.err:11.2e} {r.n_dofs:7d} {r.triangles:9d} {r.iterations:5d}")
    summary = {"family": fam.kind, "records": [dict(r.__dict__) for r in recs]}
    for r in summary["records"]:
        r.pop("wall_time")
    if len(recs) >= 3:
        ex = study.extrapolate(recs)
        summary["extrapolation"] = {"limit": ex.limit, "rate": ex.rate, "ratio": ex.ratio}
        if ex.limit is not None:
            print(f"extrapolated limit {ex.limit:.6f} (observed rate {ex.rate:.3f})")
        else:
            print(f"extrapolation declined: tail not monotone (rate {ex.rate:.3f})")
    csv_path = out / f"converge-{fam.kind}.csv"
    json_path = out / f"converge-{fam.kind}.json"
    study.write_csv(recs, csv_path)
    study.write_json(summary, json_path)
    timings = {f"level_{r.level}": r.wall_time for r in recs}
    return [csv_path, json_path], {"timings": timings}


def cmd_sweep(cfg: dict, out: Path, args):
    st = cfg["study"]
    recs = study.sweep_t(st["sweep_t"], st["level"], st["family"], grading_of(cfg),
                         cfg["mesh"]["target_triangles"], jobs=st["jobs"])
    print(f"{'t':>10} {'window':>13} {'swapped':>13} {'Lambda_1':>13}")
    for r in recs:
        note = f"  {r.error}" if r.error else ""
        print(f"{r.t:10.6f} {r.eigenvalue_dirichlet_window:13.8f} {r.eigenvalue_swapped:13.8f} "
              f"{r.lambda1:13.8f}{note}")
    path = out / "sweep.csv"
    study.write_csv(recs, path)
    return [path], {"failed_points": sum(1 for r in recs if r.error)}


def cmd_find_t(cfg: dict, out: Path, args):
    st = cfg["study"]
    res = study.find_critical_t(st["target"], tuple(st["bracket"]), st["level"], st["tol_t"],
                                st["family"], grading_of(cfg), cfg["mesh"]["target_triangles"])
    print(f"t* = {res.t:.6f} rad, Lambda_1(t*) = {res.eigenvalue:.8f} "
          f"(bracket [{res.t_lo:.6f}, {res.t_hi:.6f}], {res.evaluations} evaluations)")
    path = out / "find-t.json"
    study.write_json(dict(res.__dict__), path)
    return [path], {}


def cmd_swap_check(cfg: dict, out: Path, args):
    st = cfg["study"]
    rows = study.swap_isospectrality_report(st["swap_level"], st["n_eigs"], st["family"],
                                            grading_of(cfg), cfg["mesh"]["target_triangles"])
    print(f"{'k':>3} {'level':>5} {'lambda':>15} {'swapped':>15} {'gap':>10}")
    for r in rows:
        print(f"{r.index:3d} {r.level:5d} {r.eigenvalue:15.10f} {r.eigenvalue_swapped:15.10f} {r.gap:10.2e}")
    path = out / "swap-check.csv"
    study.write_csv(rows, path)
    return [path], {}


def cmd_symmetry(cfg: dict, out: Path, args):
    table = symmetry.reproduce_symmetry_table()
    mism = symmetry.table_mismatches(table)
    print("s_l p_j^(m) = p_k^(n)")
    print(symmetry.format_table(table, [(key, l) for key, l, *_ in mism]))
    rel = symmetry.verify_relations(args.samples, seed=args.seed)
    print("\nrelation deviations over %d random points:" % args.samples)
    for name, dev in rel.items():
        print(f"  {name:<16} {dev:.2e}")
    fixed = symmetry.verify_fixed_sets()
    print("\nfixed-point sets: " + ", ".join(f"{k} {'ok' if v else 'FAIL'}" for k, v in fixed.items()))
    consistency = symmetry.table_consistency(table)
    if mism:
        print("\ncells differing from the reference table (marked *):")
        for key, l, got, want in mism:
            print(f"  row {key}, l={l}: computed {got}, reference {want}")
        ref_issues = symmetry.table_consistency(symmetry.REFERENCE_TABLE)
        if ref_issues:
            print("  the reference table itself fails the involution check: " + "; ".join(ref_issues[:2]))
    report = {
        "table": {f"{j},{m}": [list(c) for c in row] for (j, m), row in table.items()},
        "mismatches": [{"row": list(key), "l": l, "computed": list(got), "reference": list(want)}
                       for key, l, got, want in mism],
        "relations": rel,
        "fixed_sets": fixed,
        "internal_consistency": consistency,
    }
    path = out / "symmetry.json"
    study.write_json(report, path)
    ok = (not mism and not consistency and all(fixed.values())
          and max(v for k, v in rel.items()) <= 1e-10)
    if not ok:
        exc = VerificationError("symmetry verification found mismatches")
        exc.files = [path]
        raise exc
    return [path], {}


def cmd_mesh_dump(cfg: dict, out: Path, args):
    st = cfg["study"]
    bp = make_partition(st["t"], swapped=st["swapped"])
    m = study.initial_mesh(bp, grading_of(cfg), cfg["mesh"]["target_triangles"],
                           cfg["mesh"]["symmetric"]).refined(st["levels"])
    path = out / f"mesh-level{st['levels']}.txt"
    write_mesh(m, path)
    stats = mesh_statistics(m).as_dict()
    print(f"wrote {path}: {stats['n_vertices']} vertices, {stats['n_triangles']} triangles, "
          f"max aspect {stats['aspect_max']:.2f}")
    return [path], {"mesh": stats}


COMMANDS = {
    "solve": cmd_solve,
    "converge": cmd_converge,
    "sweep": cmd_sweep,
    "find-t": cmd_find_t,
    "swap-check": cmd_swap_check,
    "symmetry-verify": cmd_symmetry,
    "mesh-dump": cmd_mesh_dump,
}


# ---------------------------------------------------------------------------
# argument parsing

# flag dest -> config path
FLAG_KEYS = {}


def _default(path: str):
    node = DEFAULT_CONFIG
    for part in path.split("."):
        node = node[part]
    return node


def _opt(p, flag: str, path: str, help: str, **kw):
    # dest follows the config path so one flag name may map to different keys per command
    dest = "cfg_" + path.replace(".", "__")
    FLAG_KEYS[dest] = path
    default = _default(path)
    if isinstance(default, float):
        shown = repr(default)
    elif default is None:
        shown = "family default" if path == "solver.shift" else "none"
    else:
        shown = default
    if "choices" not in kw and kw.get("action") != "store_const":
        kw.setdefault("metavar", flag.lstrip("-").replace("-", "_").upper())
    p.add_argument(flag, dest=dest, default=None, help=f"{help} (default: {shown})", **kw)


def _mesh_opts(p):
    _opt(p, "--target-triangles", "mesh.target_triangles", "approximate triangle count of the initial mesh", type=int)
    _opt(p, "--grading-layers", "mesh.grading_layers", "bisection layers toward junctions", type=int)
    _opt(p, "--grading-ratio", "mesh.grading_ratio", "size ratio per grading layer", type=float)


def _family_opt(p):
    _opt(p, "--family", "study.family", "element family", choices=("conforming", "nonconforming"))


def _problem_opts(p):
    _opt(p, "--t", "study.t", "half-width of the arc window, radians", type=float)
    _opt(p, "--swapped", "study.swapped", "exchange Dirichlet and Neumann pieces", action="store_const", const=True)
    _opt(p, "--symmetric", "mesh.symmetric", "mirror-symmetric grading", action="store_const", const=True)


def _solver_opts(p):
    _opt(p, "--shift", "solver.shift", "shift for shift-invert (2.6 conforming, 2.2 nonconforming)", type=float)
    _opt(p, "--num-eigenpairs", "solver.num_eigenpairs", "eigenpairs requested", type=int)
    _opt(p, "--tolerance", "solver.tolerance", "backward-error tolerance", type=float)


def build_parser() -> argparse.ArgumentParser:
    FLAG_KEYS.clear()
    parser = argparse.ArgumentParser(
        prog="halfdisk",
        description="First eigenvalue of the weighted mixed Dirichlet-Neumann problem on the half-disk.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML config file; flags override its values")
    common.add_argument("--output-dir", help=f"output directory (default: ${OUTPUT_ENV} or ./{DEFAULT_OUTPUT})")
    common.add_argument("-v", "--verbose", action="count", default=0, help="more logging")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("solve", parents=[common], help="solve on one refinement level")
    _family_opt(p); _problem_opts(p); _mesh_opts(p); _solver_opts(p)
    _opt(p, "--levels", "study.levels", "uniform refinements of the initial mesh", type=int)
    p.add_argument("--contour", action="store_true", help="also write contour CSV files")
    p.add_argument("--dump-matrices", action="store_true", help="also write A and B in coordinate format")

    p = sub.add_parser("converge", parents=[common], help="convergence study over refinement levels")
    _family_opt(p); _problem_opts(p); _mesh_opts(p); _solver_opts(p)
    _opt(p, "--max-levels", "study.max_levels", "number of levels (level 0 included)", type=int)
    _opt(p, "--err-stop", "study.err_stop", "stop once |Err| falls below this", type=float)

    p = sub.add_parser("sweep", parents=[common], help="first eigenvalues of both problems over t")
    _family_opt(p); _mesh_opts(p)
    _opt(p, "--t-values", "study.sweep_t", "angles in radians", type=float, nargs="+")
    _opt(p, "--level", "study.level", "refinement level", type=int)
    _opt(p, "--jobs", "study.jobs", "worker processes", type=int)

    p = sub.add_parser("find-t", parents=[common], help="bisection for Lambda_1(t) = target")
    _family_opt(p); _mesh_opts(p)
    _opt(p, "--target", "study.target", "target eigenvalue", type=float)
    _opt(p, "--bracket", "study.bracket", "bracket T_LO T_HI in radians", type=float, nargs=2)
    _opt(p, "--level", "study.level", "refinement level", type=int)
    _opt(p, "--tol-t", "study.tol_t", "bracket width at which bisection stops", type=float)

    p = sub.add_parser("swap-check", parents=[common], help="compare the canonical problem with its swap")
    _family_opt(p); _mesh_opts(p)
    _opt(p, "--level", "study.swap_level", "finer of the two levels compared", type=int)
    _opt(p, "--n-eigs", "study.n_eigs", "eigenvalues compared", type=int)

    p = sub.add_parser("symmetry-verify", parents=[common], help="check the lifted symmetries and their table")
    p.add_argument("--samples", type=int, default=100, help="random surface points (default: 100)")
    p.add_argument("--seed", type=int, default=0, help="seed for the random points (default: 0)")

    p = sub.add_parser("mesh-dump", parents=[common], help="write a mesh in text format")
    _problem_opts(p); _mesh_opts(p)
    _opt(p, "--levels", "study.levels", "uniform refinements of the initial mesh", type=int)
    return parser


def resolve_config(args) -> dict:
    cfg = load_config(args.config) if args.config else copy.deepcopy(DEFAULT_CONFIG)
    for dest, path in FLAG_KEYS.items():
        value = getattr(args, dest, None)
        if value is None:
            continue
        section, _, key = path.rpartition(".")
        target = cfg[section] if section else cfg
        target[key] = _check_type(path, list(value) if isinstance(value, (list, tuple)) else value)
    if args.output_dir:
        cfg["output_dir"] = args.output_dir
    validate_config(cfg)
    return cfg


def output_dir(cfg: dict) -> Path:
    return Path(cfg["output_dir"] or os.environ.get(OUTPUT_ENV) or DEFAULT_OUTPUT)


def write_manifest(path: Path, command: str, cfg: dict, files, extra: dict, elapsed: float, status: str):
    manifest = {
        "command": command,
        "run_id": study.run_id({"command": command, "config": cfg}),
        "status": status,
        "config": cfg,
        "outputs": [str(f) for f in files],
        "versions": {
            "halfdisk": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
        },
        "timings": {"total_seconds": elapsed, **extra.pop("timings", {})},
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        **extra,
    }
    study.write_json(manifest, path)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve_config(args)
    except (ConfigurationError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = output_dir(cfg)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(f"error: cannot create output directory {out}: {exc}", file=sys.stderr)
        return EXIT_IO

    start = time.perf_counter()
    files, extra, status, code = [], {}, "ok", EXIT_OK
    try:
        files, extra = COMMANDS[args.command](cfg, out, args)
    except VerificationError as exc:
        files = getattr(exc, "files", [])
        status, code = f"verification failed: {exc}", EXIT_VERIFY
    except (ConfigurationError, DomainError, BracketError) as exc:
        status, code = f"configuration error: {exc}", EXIT_CONFIG
    except HalfDiskError as exc:
        status, code = f"solver error: {exc}", EXIT_SOLVER
    except OSError as exc:
        status, code = f"I/O error: {exc}", EXIT_IO
    if code:
        sys.stdout.flush()
        print(f"error: {status}", file=sys.stderr)
    try:
        write_manifest(out / f"{args.command}-manifest.json", args.command, cfg, files, extra,
                       time.perf_counter() - start, status)
    except OSError as exc:
        print(f"error: cannot write manifest: {exc}", file=sys.stderr)
        return code or EXIT_IO
    return code


if __name__ == "__main__":
    sys.exit(main())
