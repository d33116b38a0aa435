"""Command line front end.

Exit codes: 0 success, 2 when the mathematics says no solution exists
(mean of w outside the open cone, or a moment-map level that is not
attained), 1 on any operational error.
"""
import argparse
import json
import os
import sys

import numpy as np

from . import report as rpt
from .energy import ExponentOverflow, Problem, check_solvability
from .gitmm import Level, OrbitDatum, classify_orbit, minimize_kempf_ness, moment_map
from .grid import TorusGrid, field_generator, read_field, write_field
from .models import classical_kw, cyclic_higgs_A, toda
from .solver import MaxIterations, NotSolvable, SolverOptions, solve, verify
from .torus import WeightSystem

EXIT_OK, EXIT_ERROR, EXIT_NOT_SOLVABLE = 0, 1, 2
MODEL_KINDS = ("classical_kw", "toda", "cyclic_higgs_A")


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------- config


def load_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    if not isinstance(cfg, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    cfg.setdefault("_base", os.path.dirname(os.path.abspath(path)))
    return cfg


def _get(cfg, key, where, kind=None):
    if key not in cfg:
        raise ConfigError(f"missing field '{where}{key}'")
    val = cfg[key]
    if kind is not None and not isinstance(val, kind):
        raise ConfigError(f"field '{where}{key}' must be {kind.__name__ if isinstance(kind, type) else kind}")
    return val


def _resolve(cfg, path):
    return path if os.path.isabs(path) else os.path.join(cfg.get("_base", "."), path)


def _resolve_spec(cfg, spec):
    if isinstance(spec, dict) and "file" in spec:
        return {"file": _resolve(cfg, spec["file"])}
    return spec


def build_grid(cfg):
    g = _get(cfg, "grid", "", dict)
    dims = _get(g, "dims", "grid.", list)
    try:
        return TorusGrid(tuple(dims), tuple(g.get("lengths", [1.0] * len(dims))))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"field 'grid': {exc}") from None


def _vector_source(cfg, grid, rank, seed):
    src = _get(cfg, "source", "", dict)
    if "constant" in src:
        c = np.array(src["constant"], dtype=float).reshape(-1)
        if c.shape != (rank,):
            raise ConfigError(f"field 'source.constant' must have {rank} entries")
        return c
    if "components" in src:
        comps = src["components"]
        if len(comps) != rank:
            raise ConfigError(f"field 'source.components' must list {rank} field specs")
        return np.stack([field_generator(grid, _resolve_spec(cfg, s), seed) for s in comps], axis=-1)
    if "file" in src:
        dims, values = read_field(_resolve(cfg, src["file"]))
        if dims != grid.dims or values.shape[-1] != rank:
            raise ConfigError(f"field 'source.file': dims {dims} rank {values.shape[-1]} do not match grid/rank")
        return values
    raise ConfigError("field 'source' needs one of 'constant', 'components', 'file'")


def build_problem(cfg, seed=None):
    """Problem from a config; a ``model`` entry is expanded first."""
    seed = int(cfg.get("seed", 0)) if seed is None else seed
    if "model" in cfg:
        cfg = {**cfg, **expand_model(cfg, seed)}
    grid = build_grid(cfg)
    try:
        ws = WeightSystem.from_dict(_get(cfg, "weights", "", dict))
    except ValueError as exc:
        raise ConfigError(f"field 'weights': {exc}") from None
    specs = _get(cfg, "coefficients", "", list)
    if len(specs) != ws.d:
        raise ConfigError(f"field 'coefficients' has {len(specs)} entries for {ws.d} weights")
    try:
        a = [field_generator(grid, _resolve_spec(cfg, s), seed + j) for j, s in enumerate(specs)]
        w = _vector_source(cfg, grid, ws.rank, seed)
        return Problem(ws, grid, a, w)
    except ConfigError:
        raise
    except (ValueError, OSError) as exc:
        raise ConfigError(str(exc)) from None


def expand_model(cfg, seed=0):
    """Turn ``{"model": {...}}`` into explicit weights, coefficient specs and source."""
    model = dict(_get(cfg, "model", "", dict))
    kind = _get(model, "kind", "model.", str)
    grid = build_grid(cfg)
    if kind == "classical_kw":
        h = model.get("h", 1.0)
        c = model.get("c", 1.0)
        field_generator(grid, _resolve_spec(cfg, h), seed)  # validates the spec
        p = classical_kw(grid, np.ones(grid.shape), np.ones(grid.shape))
        coeffs = [h if isinstance(h, dict) else {"constant": float(h)}]
        source = {"components": [c]} if isinstance(c, dict) else {"constant": [float(c)]}
        ws = p.ws
    elif kind == "toda":
        d = int(model.get("d", 3))
        a_value = float(model.get("a_value", 4.0))
        p = toda(grid, d, a_value)
        coeffs = [{"constant": a_value}] * d
        source = {"constant": [0.0] * (d - 1)}
        ws = p.ws
    elif kind == "cyclic_higgs_A":
        l = int(model.get("l", 2))
        ql = model.get("ql_sq", 0.0)
        ql_field = field_generator(grid, _resolve_spec(cfg, ql), seed)
        m = cyclic_higgs_A(grid, l, mean=model.get("mean"), ql_sq=ql_field, genus=int(model.get("genus", 2)))
        ws = m.problem.ws
        coeffs = [{"constant": float(ri)} for ri in m.r] + [ql if isinstance(ql, dict) else {"constant": float(ql)}]
        source = {"constant": [float(v) for v in m.problem.w.reshape(-1, ws.rank)[0]]}
    else:
        raise ConfigError(f"field 'model.kind': unknown model {kind!r}; expected one of {', '.join(MODEL_KINDS)}")
    return {"weights": ws.to_dict(), "coefficients": coeffs, "source": source, "origin": model}


def solver_options(cfg, args, p):
    raw = dict(cfg.get("solver", {}))
    initial = raw.pop("initial", None)
    known = {"tol_residual", "max_newton", "cg_tol", "cg_max", "armijo_c", "backtrack"}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown solver options {sorted(unknown)}")
    if args.tol is not None:
        raw["tol_residual"] = args.tol
    if args.max_newton is not None:
        raw["max_newton"] = args.max_newton
    init = None
    if isinstance(initial, dict) and "file" in initial:
        dims, init = read_field(_resolve(cfg, initial["file"]))
    elif isinstance(initial, dict) and "perturb" in initial:
        rng = np.random.default_rng(_seed(cfg, args))
        init = float(initial["perturb"]) * rng.standard_normal(p.field_shape)
    elif initial is not None:
        raise ConfigError("field 'solver.initial' must be {\"file\": path} or {\"perturb\": amplitude}")
    try:
        return SolverOptions(initial=init, cone_mode=_cone_mode(cfg, args), **raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"field 'solver': {exc}") from None


def _seed(cfg, args):
    return args.seed if getattr(args, "seed", None) is not None else int(cfg.get("seed", 0))


def _cone_mode(cfg, args):
    return "rational" if getattr(args, "rational_cone", False) else cfg.get("cone_mode", "auto")


# ---------------------------------------------------------------- output


def _problem_summary(p):
    return {"dims": list(p.grid.dims), "rank": p.rank, "d": p.ws.d}


def _emit(args, name, obj):
    text = rpt.dumps(obj)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, name), "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------- commands


def cmd_check(args):
    cfg = load_config(args.config)
    p = build_problem(cfg, _seed(cfg, args))
    rep = check_solvability(p, mode=_cone_mode(cfg, args))
    body = {"problem": _problem_summary(p), "solvability": rep.to_dict()}
    _emit(args, "check_report.json", rpt.envelope("check", body, not args.no_timestamp))
    return EXIT_OK if rep.solvable else EXIT_NOT_SOLVABLE


def cmd_solve(args):
    cfg = load_config(args.config)
    p = build_problem(cfg, _seed(cfg, args))
    opts = solver_options(cfg, args, p)
    body = {"problem": _problem_summary(p), "solution_file": None}
    code = EXIT_OK
    try:
        res = solve(p, opts)
        body.update(status="converged", result=res.to_dict(), solvability=res.solvability.to_dict())
        if args.out:
            os.makedirs(args.out, exist_ok=True)
            write_field(os.path.join(args.out, "solution.csv"), p.grid, res.solution)
            body["solution_file"] = "solution.csv"
    except NotSolvable as exc:
        body.update(status="not_solvable", result=None, solvability=exc.report.to_dict())
        code = EXIT_NOT_SOLVABLE
    except MaxIterations as exc:
        body.update(status="max_iterations", result=exc.report.to_dict(), solvability=exc.report.solvability.to_dict())
        print(f"error: {exc}", file=sys.stderr)
        code = EXIT_ERROR
    if body["result"] is not None:
        body["result"].pop("solvability", None)
    _emit(args, "solve_report.json", rpt.envelope("solve", body, not args.no_timestamp))
    return code


def cmd_verify(args):
    cfg = load_config(args.config)
    p = build_problem(cfg, _seed(cfg, args))
    if not args.field:
        raise ConfigError("verify needs --field PATH")
    dims, xi = read_field(args.field)
    if dims != p.grid.dims or xi.shape[-1] != p.rank:
        raise ConfigError(f"field {args.field} has dims {dims} rank {xi.shape[-1]}; problem needs {p.grid.dims} rank {p.rank}")
    v = verify(p, xi)
    tol = args.tol if args.tol is not None else float(cfg.get("solver", {}).get("tol_residual", 1e-10))
    body = {"problem": _problem_summary(p), "field_file": os.path.basename(args.field), "tol": tol,
            "passed": bool(v.residual_norm <= tol), **v.to_dict()}
    _emit(args, "verify_report.json", rpt.envelope("verify", body, not args.no_timestamp))
    return EXIT_OK


def _orbit_from_config(cfg):
    raw = _get(cfg, "weights", "")
    try:
        ws = WeightSystem.from_dict(raw) if isinstance(raw, dict) else WeightSystem(np.array(raw, dtype=float))
        od = OrbitDatum(ws, _get(cfg, "sq_moduli", "", list))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if "level_coords" in cfg:
        # integral level alpha = sum_j n_j q_j / 2 pi, given by the integers n
        n = _get(cfg, "level_coords", "", list)
        if len(n) != ws.d or not all(isinstance(k, int) and not isinstance(k, bool) for k in n):
            raise ConfigError(f"field 'level_coords' must be {ws.d} integers")
        return od, Level.integral(ws, n)
    level = np.array(_get(cfg, "level", "", list), dtype=float)
    if level.shape != (ws.rank,):
        raise ConfigError(f"field 'level' must have {ws.rank} entries")
    return od, level


def cmd_git_classify(args):
    cfg = load_config(args.config)
    od, alpha = _orbit_from_config(cfg)
    two_pi = bool(cfg.get("two_pi", True))
    res = classify_orbit(od, alpha, two_pi=two_pi, mode=_cone_mode(cfg, args))
    body = {**res.to_dict(), "J_z": list(od.J_z), "two_pi": two_pi,
            "moment_map": [float(v) for v in moment_map(od)]}
    _emit(args, "git_classify_report.json", rpt.envelope("git-classify", body, not args.no_timestamp))
    return EXIT_OK


def cmd_git_minimize(args):
    cfg = load_config(args.config)
    od, lam = _orbit_from_config(cfg)
    if isinstance(lam, Level):
        lam = lam.scaled_target(od.ws)
    res = minimize_kempf_ness(od, lam, mode=_cone_mode(cfg, args))
    mm = None if not res.attained else [float(v) for v in moment_map(od.act(res.v_star))]
    body = {**res.to_dict(), "lambda": [float(v) for v in lam], "J_z": list(od.J_z), "moment_map_at_minimum": mm}
    _emit(args, "git_minimize_report.json", rpt.envelope("git-minimize", body, not args.no_timestamp))
    return EXIT_OK if res.attained else EXIT_NOT_SOLVABLE


def _spec_arg(text):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        raise argparse.ArgumentTypeError(f"expected a number or JSON field spec, got {text!r}") from None


def cmd_model(args):
    dims = args.dims or [16, 16]
    lengths = args.lengths or [1.0] * len(dims)
    model = {"kind": args.kind}
    if args.kind == "classical_kw":
        model.update(h=args.h if args.h is not None else 1.0, c=args.c if args.c is not None else 1.0)
    elif args.kind == "toda":
        model.update(d=args.d, a_value=args.a_value)
    else:
        model.update(l=args.l, genus=args.genus, ql_sq=args.ql_sq if args.ql_sq is not None else 0.0)
        if args.mean is not None:
            model["mean"] = args.mean
    cfg = {"grid": {"dims": dims, "lengths": lengths}, "model": model, "seed": args.seed or 0}
    expanded = expand_model(cfg, cfg["seed"])
    full = {"schema": rpt.SCHEMA_VERSION, "kind": "config", "seed": cfg["seed"], "grid": cfg["grid"], **expanded}
    if args.emit_config:
        _emit(args, "config.json", full)
        return EXIT_OK
    p = build_problem(full)
    rep = check_solvability(p)
    body = {"problem": _problem_summary(p), "solvability": rep.to_dict()}
    _emit(args, "check_report.json", rpt.envelope("check", body, not args.no_timestamp))
    return EXIT_OK if rep.solvable else EXIT_NOT_SOLVABLE


# ---------------------------------------------------------------- parser


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="problem config (JSON)")
    common.add_argument("--out", help="output directory (default: report to stdout)")
    common.add_argument("--tol", type=float, help="residual tolerance (L2 on the grid)")
    common.add_argument("--max-newton", type=int, help="Newton iteration cap")
    common.add_argument("--seed", type=int, help="seed for generated fields and random starts")
    common.add_argument("--rational-cone", action="store_true", help="exact rational cone classification")
    common.add_argument("--no-timestamp", action="store_true", help="omit timestamps for byte-stable reports")

    ap = argparse.ArgumentParser(prog="gkw", description="generalized Kazdan-Warner equations on flat tori")
    sub = ap.add_subparsers(dest="command", required=True)
    sub.add_parser("check", parents=[common], help="solvability test").set_defaults(func=cmd_check)
    sub.add_parser("solve", parents=[common], help="solve and write the solution").set_defaults(func=cmd_solve)
    pv = sub.add_parser("verify", parents=[common], help="residual report for a field file")
    pv.add_argument("--field", help="field CSV to verify")
    pv.set_defaults(func=cmd_verify)

    pg = sub.add_parser("git", help="finite-dimensional GIT / moment-map tools")
    gsub = pg.add_subparsers(dest="git_command", required=True)
    gsub.add_parser("classify", parents=[common], help="alpha-stability of an orbit").set_defaults(func=cmd_git_classify)
    gsub.add_parser("minimize", parents=[common], help="minimize the Kempf-Ness function").set_defaults(func=cmd_git_minimize)

    pm = sub.add_parser("model", parents=[common], help="built-in model problems")
    pm.add_argument("kind", choices=MODEL_KINDS)
    pm.add_argument("--emit-config", action="store_true", help="write the full problem config")
    pm.add_argument("--dims", type=int, nargs="+")
    pm.add_argument("--lengths", type=float, nargs="+")
    pm.add_argument("--d", type=int, default=3, help="toda: number of weights")
    pm.add_argument("--a-value", type=float, default=4.0, help="toda: coefficient value")
    pm.add_argument("--l", type=int, default=2, help="cyclic_higgs_A: rank")
    pm.add_argument("--genus", type=int, default=2, help="cyclic_higgs_A: genus g in (2g-2)x")
    pm.add_argument("--mean", type=float, nargs="+", help="cyclic_higgs_A: source mean in weight coordinates")
    pm.add_argument("--ql-sq", type=_spec_arg, help="cyclic_higgs_A: |q_l|^2 as number or field spec")
    pm.add_argument("--h", type=_spec_arg, help="classical_kw: coefficient h")
    pm.add_argument("--c", type=_spec_arg, help="classical_kw: source c")
    pm.set_defaults(func=cmd_model)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.func is not cmd_model and not args.config:
        print("error: --config is required", file=sys.stderr)
        return EXIT_ERROR
    try:
        return args.func(args)
    except (ConfigError, ValueError, OSError, ExponentOverflow) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
