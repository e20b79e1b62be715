"""Command-line entry point: ``lbperiodic <command> [flags]``.

Exit codes: 0 on success, 1 when ``check`` finds a failing check, 2 on
usage or configuration errors.
"""

import argparse
import json
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import landscape as ls
from .diagnostics import run_suite
from .model import ModelParams, constant_state_floor
from .optimize import minimize_constrained, minimize_lagrangian
from .persist import (
    ConfigError,
    build_config,
    cache_load,
    cache_store,
    dual_csv,
    landscape_csv,
    phase_csv,
    write_text,
)

log = logging.getLogger("lbperiodic")

COMMANDS = ("minimize", "sweep-mean", "sweep-lambda", "condition", "conjecture", "phase-diagram", "check")

# a-grid used per phase-diagram cell; it only has to contain 0 and two neighbours
PHASE_CELL_GRID = (-0.1, 0.0, 0.1)


def _parser():
    p = argparse.ArgumentParser(prog="lbperiodic", description="Periodic minimizers of the Landau-Brazovskii energy.")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("model and solver")
    g.add_argument("--config", help="JSON config file; flags override its values")
    g.add_argument("--xi", type=float)
    g.add_argument("--tau", type=float)
    g.add_argument("--gamma", type=float)
    g.add_argument("--harmonics", type=int)
    g.add_argument("--grid", type=int, help="quadrature points per period")
    g.add_argument("--grad-tol", type=float)
    g.add_argument("--max-iters", type=int)
    g.add_argument("--starts", type=int)
    g.add_argument("--omega-min", type=float)
    g.add_argument("--omega-max", type=float)
    g.add_argument("--seed", type=int)
    g.add_argument("-o", "--output", help="output file (default: standard output)")
    g.add_argument("--no-cache", action="store_true", default=None)
    g.add_argument("--jobs", type=int, help="worker processes for grid commands")

    def grid_flags(parser, name, label):
        parser.add_argument(f"--{name}-min", type=float)
        parser.add_argument(f"--{name}-max", type=float)
        parser.add_argument(f"--{name}-steps", type=int, help=f"number of {label} grid points")

    helps = {
        "minimize": "one constrained (--mean) or Lagrangian (--lambda) solve",
        "sweep-mean": "constrained value over a grid of means (CSV)",
        "sweep-lambda": "Lagrangian value over a grid of multipliers (CSV)",
        "condition": "existence-condition report at a = 0",
        "conjecture": "gap between the convex envelope of h* and the computed value",
        "phase-diagram": "trivial/nontrivial classification over a (tau, gamma) grid (CSV)",
        "check": "run the self-consistency suite",
    }
    for name in COMMANDS:
        sp = sub.add_parser(name, parents=[common], help=helps[name])
        if name == "minimize":
            sp.add_argument("--mean", type=float)
            sp.add_argument("--lambda", dest="lam", type=float)
        if name in ("sweep-mean", "condition", "conjecture"):
            grid_flags(sp, "a", "mean")
            sp.add_argument("--no-resolve", action="store_true", default=None,
                            help="skip the convexity re-solve of flagged points")
        if name == "sweep-lambda":
            grid_flags(sp, "lambda", "multiplier")
        if name == "phase-diagram":
            grid_flags(sp, "tau", "tau")
            grid_flags(sp, "gamma", "gamma")
    return p


def _load_file(path):
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError([f"cannot read config {path}: {exc.strerror or exc}"]) from None
    except json.JSONDecodeError as exc:
        raise ConfigError([f"config {path} is not valid JSON: {exc.msg} (line {exc.lineno})"]) from None
    if not isinstance(data, dict):
        raise ConfigError([f"config {path} must hold a JSON object"])
    return data


def _merge(args):
    data = _load_file(args.config) if args.config else {}
    data = json.loads(json.dumps(data))  # deep copy

    def put(block, key, value):
        if value is None:
            return
        if block is None:
            data[key] = value
        else:
            if not isinstance(data.get(block), dict):
                data[block] = {}
            data[block][key] = value

    v = vars(args)
    for k in ("xi", "tau", "gamma"):
        put("params", k, v.get(k))
    for k in ("harmonics", "grid", "grad_tol", "max_iters", "starts"):
        put("solver", k, v.get(k))
    if v.get("omega_min") is not None or v.get("omega_max") is not None:
        lo, hi = (data.get("solver") or {}).get("omega_bounds", (0.2, 3.0))
        put("solver", "omega_bounds", [
            v["omega_min"] if v.get("omega_min") is not None else lo,
            v["omega_max"] if v.get("omega_max") is not None else hi,
        ])
    put(None, "seed", v.get("seed"))
    put(None, "output", v.get("output"))
    put(None, "jobs", v.get("jobs"))
    put(None, "mean", v.get("mean"))
    put(None, "lambda", v.get("lam"))
    if v.get("no_cache"):
        data["cache"] = False
    if v.get("no_resolve"):
        data["resolve"] = False
    for flag, block in (("a", "mean_grid"), ("lambda", "lambda_grid"), ("tau", "tau_grid"), ("gamma", "gamma_grid")):
        for part in ("min", "max", "steps"):
            put(block, part, v.get(f"{flag}_{part}"))
    return data


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return float(x) if math.isfinite(x) else None
    return x


def config_block(cfg):
    """Human-readable reproducibility block embedded in every result file."""
    block = {
        "command": cfg.command,
        "params": cfg.params.as_dict(),
        "solver": cfg.opts.as_dict(),
        "seed": cfg.seed,
    }
    if cfg.mean is not None:
        block["mean"] = cfg.mean
    if cfg.lam is not None:
        block["lambda"] = cfg.lam
    if cfg.grids:
        block.update(cfg.grids)
    if cfg.command in ("sweep-mean", "condition", "conjecture"):
        block["resolve"] = cfg.resolve
    return block


def _dump(obj):
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def _sweep(cfg):
    table = ls.sweep_mean(cfg.params, cfg.grid("mean_grid"), cfg.opts)
    report = ls.check_convexity(table, resolve=cfg.resolve)
    return report.table, report


def _convexity_dict(report):
    return {
        "ok": report.ok,
        "initial_violations": list(report.initial_violations),
        "remaining_violations": list(report.violations),
        "resolved": list(report.resolved),
        "rounds": report.rounds,
    }


def _phase_cell(args):
    xi, tau, gamma, opts = args
    params = ModelParams(xi, tau, gamma)
    table = ls.sweep_mean(params, np.array(PHASE_CELL_GRID), opts)
    rep = ls.existence_condition(params, table)
    r = table.results[table.index_of(0.0)]
    return (tau, gamma, rep.psi_at_zero, rep.m_f, rep.condition_holds, rep.is_trivial,
            math.nan if r.is_trivial else r.profile.omega)


def _compute(cfg):
    """Run the command; returns ``(main_text, sidecar_text_or_None, exit_code)``."""
    head = {"config": config_block(cfg)}
    if cfg.command == "minimize":
        if cfg.mean is not None:
            res = minimize_constrained(cfg.params, cfg.mean, cfg.opts)
        else:
            res = minimize_lagrangian(cfg.params, cfg.lam, cfg.opts)
        return _dump({**head, "result": res.to_dict()}), None, 0

    if cfg.command == "sweep-mean":
        table, report = _sweep(cfg)
        side = _dump({**head, "convexity": _convexity_dict(report)})
        return landscape_csv(table), side, 0

    if cfg.command == "sweep-lambda":
        dual = ls.sweep_lambda(cfg.params, cfg.grid("lambda_grid"), cfg.opts)
        return dual_csv(dual), _dump(head), 0

    if cfg.command == "condition":
        table, report = _sweep(cfg)
        rep = ls.existence_condition(cfg.params, table)
        return _dump({**head, "result": rep.as_dict(), "convexity": _convexity_dict(report)}), None, 0

    if cfg.command == "conjecture":
        table, report = _sweep(cfg)
        rep = ls.conjecture_gap(table, solver_tol=cfg.opts.grad_tol * 100)
        return _dump({**head, "result": rep.as_dict(), "convexity": _convexity_dict(report)}), None, 0

    if cfg.command == "phase-diagram":
        cells = [(cfg.params.xi, float(t), float(g), cfg.opts)
                 for t in cfg.grid("tau_grid") for g in cfg.grid("gamma_grid")]
        if cfg.jobs > 1:
            with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
                rows = list(pool.map(_phase_cell, cells))  # map keeps input order
        else:
            rows = [_phase_cell(c) for c in cells]
        return phase_csv(rows), _dump(head), 0

    if cfg.command == "check":
        suite = run_suite(cfg.params, cfg.opts)
        print(suite.summary(), file=sys.stderr if cfg.output is None else sys.stdout)
        return _dump({**head, "result": suite.as_dict()}), None, 0 if suite.passed else 1

    raise AssertionError(cfg.command)


def _emit(cfg, main, side):
    if cfg.output is None:
        sys.stdout.write(main)
        return
    write_text(cfg.output, main)
    if side is not None:
        write_text(f"{cfg.output}.config.json", side)


def cli_main(argv=None):
    """Parse ``argv``, run the command and return the process exit code."""
    logging.basicConfig(level=logging.WARNING, format="warning: %(message)s", stream=sys.stderr)
    try:
        args = _parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "minimize":
            args.no_resolve = None
        # the phase diagram varies tau itself
        if args.command == "phase-diagram" and args.tau is None:
            args.tau = 0.0
        cfg = build_config(args.command, _merge(args))
    except ConfigError as exc:
        for problem in exc.problems:
            print(f"error: {problem}", file=sys.stderr)
        return 2

    outputs = cache_load(cfg) if cfg.cache else None
    if outputs is not None:
        code = int(outputs.get("exit_code", 0))
        main, side = outputs["main"], outputs.get("sidecar")
    else:
        main, side, code = _compute(cfg)
        if cfg.cache:
            cache_store(cfg, {"main": main, "sidecar": side, "exit_code": code})
    try:
        _emit(cfg, main, side)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return code


def main():
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
