"""Command-line experiment runner.

Every run writes ``manifest.json`` (resolved inputs, defaults table, library
version, backend, wall time, result hashes) next to its result tables. A
manifest passed back through ``--config`` reproduces the result files
byte for byte.

Exit codes: 0 success, 2 validation error, 3 numerical failure.
"""

import argparse
import csv
import hashlib
import io
import json
import os
import sys
import time

import numpy as np

from . import __version__, kernels
from .errors import NumericalError, SymreebError, ValidationError

DEFAULTS = {
    "integrator_rtol": 1e-11,
    "energy_drift_tol": 1e-9,
    "closure_tol": 1e-8,
    "endpoint_tol": 1e-9,
    "symmetry_tol": 1e-6,
    "degeneracy_tol": 1e-8,
    "spectral_modes": 256,
    "loop_samples": 256,
    "path_samples": 512,
    "return_time_tol": 1e-8,
    "return_horizon_periods": 1000,
    "linking_integrality_tol": 0.05,
    "section_grid": 20,
    "orbit_seeds": 64,
    "orbit_crossings": 2,
}

SYSTEM_KEYS = ("r1sq", "r2sq", "theta1", "theta2", "mu", "c", "p")
TASKS = ("index", "orbit-search", "section", "linking", "predicate", "critical-values")


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------

def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, np.integer):
        return str(int(v))
    if v is None:
        return ""
    return str(v)


def _write_csv(path, header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(row.get(h)) for h in header])
    with open(path, "w") as fh:
        fh.write(buf.getvalue())


def _sha256(path):
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def _report_value(rep, attr):
    if rep is None or isinstance(rep, str):
        return None
    return getattr(rep, attr)


def _error_text(rep):
    return rep if isinstance(rep, str) else ""


# ---------------------------------------------------------------------------
# tasks
# ---------------------------------------------------------------------------

def _model(cfg):
    from .systems import from_config
    return from_config(cfg["system"])


def task_index(cfg, out):
    from .orbits import named_orbit, orbit_indices
    model = _model(cfg)
    args = cfg["args"]
    names = [args.get("orbit") or "P1"] if args.get("orbit") != "all" else ["P1", "P2"]
    rows = []
    for name in names:
        rec = named_orbit(model, name)
        for k in range(1, int(args.get("iterate", 1)) + 1):
            res = orbit_indices(model, rec, involution="rho", iterate=k,
                                loop_samples=DEFAULTS["loop_samples"], path_samples=DEFAULTS["path_samples"])
            errors = {key: _error_text(v) for key, v in res.items() if isinstance(v, str)}
            row = {"orbit": name, "iterate": k, "period": rec.period,
                   "mu_cz_spectral": _report_value(res.get("cz_spectral"), "mu_cz"),
                   "mu_cz_rotation": _report_value(res.get("cz_rotation"), "mu_cz"),
                   "rotation_number": _report_value(res.get("cz_rotation"), "rotation_number"),
                   "mu_rs_spectral": _report_value(res.get("rs_spectral"), "mu_rs"),
                   "mu_rs_crossing": _report_value(res.get("rs_crossing"), "mu_rs"),
                   "degeneracy_tol": DEFAULTS["degeneracy_tol"],
                   "closure_residual": rec.closure_residual, "closure_tol": DEFAULTS["closure_tol"],
                   "errors": json.dumps(errors, sort_keys=True) if errors else ""}
            rows.append(row)
            if errors:
                _write_csv(os.path.join(out, "results.csv"), list(rows[0]), rows)
                first = sorted(errors.items())[0]
                raise NumericalError(f"{first[0]}: {first[1]}", stage="index")
    _write_csv(os.path.join(out, "results.csv"), list(rows[0]), rows)
    return ["results.csv"]


def task_orbit_search(cfg, out):
    from .orbits import classify_symmetry, search_orbits, write_catalog
    from .errors import SearchFailure
    model = _model(cfg)
    args = cfg["args"]
    c = cfg["system"].get("c")
    if c is None:
        raise ValidationError("orbit search needs an energy --c")
    start = args.get("start") or "rho"
    end = args.get("end") or start
    records, failures = search_orbits(model, start, end, c, n_seeds=int(args.get("seeds", DEFAULTS["orbit_seeds"])),
                                      crossings=int(args.get("crossings", DEFAULTS["orbit_crossings"])),
                                      jobs=int(cfg.get("jobs", 1)))
    if model.name in ("pcr3bp", "hill"):
        for rec in records:
            try:
                classify_symmetry(rec)
            except SymreebError as exc:
                rec.notes["classification_error"] = str(exc)
    if not records:
        raise SearchFailure(f"no orbit found; {len(failures)} seed failures", stage="orbit_search")
    write_catalog(records, os.path.join(out, "results.jsonl"))
    rows = [{"index": i, "period": r.period, "x0_q1": r.x0[0], "x0_q2": r.x0[1], "x0_p1": r.x0[2],
             "x0_p2": r.x0[3], "sym_type": r.sym_type, "symmetry": " ".join(r.symmetry),
             "symmetry_class": r.notes.get("symmetry_class", ""),
             "closure_residual": r.closure_residual, "closure_tol": DEFAULTS["closure_tol"],
             "energy_drift": r.energy_drift, "energy_drift_tol": DEFAULTS["energy_drift_tol"]}
            for i, r in enumerate(records)]
    _write_csv(os.path.join(out, "results.csv"), list(rows[0]), rows)
    return ["results.csv", "results.jsonl"]


def task_section(cfg, out):
    from .sections import grid_to_csv, grid_to_svg, page, return_grid
    model = _model(cfg)
    args = cfg["args"]
    disk = page(model, float(args.get("theta", 0.0)))
    samples = return_grid(disk, int(args.get("grid", DEFAULTS["section_grid"])))
    grid_to_csv(samples, os.path.join(out, "results.csv"), DEFAULTS["return_time_tol"])
    grid_to_svg(samples, os.path.join(out, "plot.svg"))
    return ["results.csv", "plot.svg"]


def task_linking(cfg, out):
    from .orbits import linking_number, named_orbit, self_linking
    model = _model(cfg)
    p1, p2 = named_orbit(model, "P1"), named_orbit(model, "P2")
    lk, raw = linking_number(p1, p2)
    rows = [{"pair": "P1,P2", "kind": "linking", "value": lk, "raw": raw,
             "tolerance": DEFAULTS["linking_integrality_tol"], "scale": None}]
    for name, rec in (("P1", p1), ("P2", p2)):
        sl, raw, eps = self_linking(rec)
        rows.append({"pair": name, "kind": "self_linking", "value": sl, "raw": raw,
                     "tolerance": DEFAULTS["linking_integrality_tol"], "scale": eps})
    _write_csv(os.path.join(out, "results.csv"), list(rows[0]), rows)
    return ["results.csv"]


def task_predicate(cfg, out):
    from .orbits import named_orbit, orbit_indices, predicate_report, self_linking
    model = _model(cfg)
    name = cfg["args"].get("orbit") or "P1"
    rec = named_orbit(model, name)
    orbit_indices(model, rec, involution="rho")
    try:
        sl = self_linking(rec)[0]
    except NumericalError as exc:
        sl = None
        rec.notes["self_linking_error"] = str(exc)
    rep = predicate_report(rec, sl)
    rep["orbit"] = name
    rep["period"] = rec.period
    with open(os.path.join(out, "results.jsonl"), "w") as fh:
        fh.write(json.dumps(rep, sort_keys=True, default=str) + "\n")
    return ["results.jsonl"]


def task_critical_values(cfg, out):
    from .systems import critical_points, critical_values
    model = _model(cfg)
    values = critical_values(model)
    points = critical_points(model)
    rows = []
    for x, v in points:
        rows.append({"value": v, "q1": x[0], "q2": x[1], "p1": x[2], "p2": x[3],
                     "gradient_norm": float(np.linalg.norm(model.gradient(x))), "tolerance": 1e-10,
                     "distinct_index": int(np.argmin([abs(v - u) for u in values]))})
    _write_csv(os.path.join(out, "results.csv"), list(rows[0]), rows)
    return ["results.csv"]


RUNNERS = {"index": task_index, "orbit-search": task_orbit_search, "section": task_section,
           "linking": task_linking, "predicate": task_predicate, "critical-values": task_critical_values}


# ---------------------------------------------------------------------------
# argument handling
# ---------------------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(prog="symreeb", description="Symmetric Reeb dynamics experiments")
    sub = parser.add_subparsers(dest="task", required=True)
    for name in TASKS:
        p = sub.add_parser(name)
        p.add_argument("--system", help="hopf, ellipsoid, henon_heiles, hill, pcr3bp")
        p.add_argument("--config", help="JSON config or manifest of a previous run")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--jobs", type=int, default=None)
        p.add_argument("--rng-seed", type=int, default=None)
        for key in SYSTEM_KEYS:
            p.add_argument(f"--{key}", type=int if key == "p" else float, default=None)
        if name in ("index", "predicate"):
            p.add_argument("--orbit", default=None, help="P1, P2 (or 'all' for index)")
        if name == "index":
            p.add_argument("--iterate", type=int, default=None)
        if name == "orbit-search":
            p.add_argument("--start", default=None)
            p.add_argument("--end", default=None)
            p.add_argument("--seeds", type=int, default=None)
            p.add_argument("--crossings", type=int, default=None)
        if name == "section":
            p.add_argument("--theta", type=float, default=None)
            p.add_argument("--grid", type=int, default=None)
    # accept the underscore spelling too
    sub._name_parser_map["orbit_search"] = sub._name_parser_map["orbit-search"]
    sub._name_parser_map["critical_values"] = sub._name_parser_map["critical-values"]
    return parser


_TASK_ARGS = {"index": ("orbit", "iterate"), "predicate": ("orbit",),
              "orbit-search": ("start", "end", "seeds", "crossings"), "section": ("theta", "grid"),
              "linking": (), "critical-values": ()}


def resolve_config(ns):
    """Merge a config/manifest file with command-line flags (flags win)."""
    task = ns.task.replace("_", "-")
    cfg = {"task": task, "system": {}, "args": {}, "jobs": 1, "rng_seed": 0}
    if ns.config:
        try:
            with open(ns.config) as fh:
                loaded = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ValidationError(f"cannot read config {ns.config}: {exc}")
        loaded = loaded.get("inputs", loaded)
        if loaded.get("task", task) != task:
            raise ValidationError(f"config is for task {loaded.get('task')}, not {task}")
        for key in ("system", "args"):
            if key in loaded and not isinstance(loaded[key], dict):
                raise ValidationError(f"config field {key!r} must be an object")
            cfg[key].update(loaded.get(key, {}))
        for key in ("jobs", "rng_seed"):
            if key in loaded:
                cfg[key] = loaded[key]
        unknown = set(loaded) - {"task", "system", "args", "jobs", "rng_seed"}
        if unknown:
            raise ValidationError(f"unknown config fields {sorted(unknown)}")
    if ns.system:
        cfg["system"]["system"] = ns.system
    for key in SYSTEM_KEYS:
        val = getattr(ns, key, None)
        if val is not None:
            cfg["system"][key] = val
    for key in _TASK_ARGS[task]:
        val = getattr(ns, key, None)
        if val is not None:
            cfg["args"][key] = val
    if ns.jobs is not None:
        cfg["jobs"] = ns.jobs
    if ns.rng_seed is not None:
        cfg["rng_seed"] = ns.rng_seed
    if "system" not in cfg["system"]:
        raise ValidationError("no system given (use --system or a config file)")
    return cfg


def run(cfg, out):
    """Execute a resolved config, writing results and the manifest into ``out``."""
    os.makedirs(out, exist_ok=True)
    np.random.seed(int(cfg.get("rng_seed", 0)) % (2 ** 32))
    t0 = time.perf_counter()
    files = RUNNERS[cfg["task"]](cfg, out)
    wall = time.perf_counter() - t0
    manifest = {"inputs": cfg, "defaults": DEFAULTS, "version": __version__, "backend": kernels.BACKEND,
                "wall_time_s": wall, "results": {f: _sha256(os.path.join(out, f)) for f in files}}
    with open(os.path.join(out, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest


def main(argv=None):
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        cfg = resolve_config(ns)
        out = ns.out or os.path.join("runs", cfg["task"])
        manifest = run(cfg, out)
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return 2
    except SymreebError as exc:
        stage = getattr(exc, "stage", None)
        print(f"numerical failure{f' in {stage}' if stage else ''}: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 2
    for name, digest in manifest["results"].items():
        print(f"{os.path.join(out, name)}  sha256={digest[:16]}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
