"""
Result files, run configuration and the on-disk result cache.

CSV layouts are a compatibility contract:

* landscape: ``a,psi,hstar,envelope,nontrivial,omega,energy_residual_rms,converged``
* dual: ``lambda,psi_dual,mean_at_opt,omega,converged``
* phase diagram: ``tau,gamma,psi0,m_f,condition_holds,is_trivial,omega``

Floats are written with 17 significant digits so they read back bit for bit.
"""

import csv
import hashlib
import io
import json
import logging
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

from .model import ModelParams
from .optimize import MinimizeOptions

log = logging.getLogger(__name__)

LANDSCAPE_COLUMNS = ["a", "psi", "hstar", "envelope", "nontrivial", "omega", "energy_residual_rms", "converged"]
DUAL_COLUMNS = ["lambda", "psi_dual", "mean_at_opt", "omega", "converged"]
PHASE_COLUMNS = ["tau", "gamma", "psi0", "m_f", "condition_holds", "is_trivial", "omega"]


class ConfigError(ValueError):
    """Invalid run configuration; carries one message per problem."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


def fmt(x):
    if isinstance(x, (bool,)) or x is None:
        return {True: "true", False: "false", None: ""}[x]
    return format(float(x), ".17g")


def parse_bool(s):
    return {"true": True, "false": False}[s]


def _csv_text(columns, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def landscape_rows(table):
    for i in range(len(table)):
        r = table.results[i] if table.results else None
        yield (
            table.a_grid[i],
            table.psi[i],
            table.hstar[i],
            table.envelope[i],
            bool(table.nontrivial[i]),
            r.profile.omega if r else math.nan,
            r.residual.rms if r else math.nan,
            bool(r.converged) if r else False,
        )


def landscape_csv(table):
    return _csv_text(LANDSCAPE_COLUMNS, landscape_rows(table))


def dual_csv(dual):
    rows = []
    for j in range(dual.lambda_grid.size):
        r = dual.results[j] if dual.results else None
        rows.append((
            dual.lambda_grid[j],
            dual.psi_dual[j],
            dual.mean_at_opt[j],
            r.profile.omega if r else math.nan,
            bool(r.converged) if r else False,
        ))
    return _csv_text(DUAL_COLUMNS, rows)


def phase_csv(rows):
    return _csv_text(PHASE_COLUMNS, rows)


def write_text(path, text):
    path = Path(path)
    try:
        path.write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def write_landscape_csv(table, path):
    write_text(path, landscape_csv(table))


def read_landscape_csv(path):
    """Rows of the landscape CSV as dicts with floats and bools restored."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != LANDSCAPE_COLUMNS:
            raise ValueError(f"{path}: unexpected header {reader.fieldnames}")
        out = []
        for row in reader:
            rec = {}
            for key, value in row.items():
                rec[key] = parse_bool(value) if key in ("nontrivial", "converged") else float(value)
            out.append(rec)
        return out


# --- configuration -------------------------------------------------------

_GRID_KEYS = {"min", "max", "steps"}
_SOLVER_KEYS = {"harmonics", "grid", "grad_tol", "max_iters", "starts", "omega_bounds"}
_TOP_KEYS = {
    "params", "solver", "seed", "mean", "lambda", "mean_grid", "lambda_grid",
    "tau_grid", "gamma_grid", "output", "cache", "jobs", "resolve",
}

DEFAULT_GRIDS = {
    "mean_grid": {"min": -1.5, "max": 1.5, "steps": 31},
    "lambda_grid": {"min": -0.5, "max": 0.5, "steps": 21},
    "tau_grid": {"min": -2.0, "max": 1.0, "steps": 13},
    "gamma_grid": {"min": -1.0, "max": 1.0, "steps": 9},
}


@dataclass
class RunConfig:
    """Validated configuration of one CLI run."""

    command: str
    params: ModelParams
    opts: MinimizeOptions
    seed: int = 0
    mean: float = None
    lam: float = None
    grids: dict = field(default_factory=dict)
    output: str = None
    cache: bool = True
    jobs: int = 1
    resolve: bool = True

    def grid(self, name):
        import numpy as np

        g = self.grids[name]
        return np.linspace(g["min"], g["max"], g["steps"])

    def canonical(self):
        """Everything that determines the computed result (not output path, cache, jobs)."""
        data = {
            "command": self.command,
            "params": self.params.as_dict(),
            "solver": self.opts.as_dict(),
            "seed": self.seed,
            "resolve": self.resolve,
        }
        if self.mean is not None:
            data["mean"] = self.mean
        if self.lam is not None:
            data["lambda"] = self.lam
        if self.grids:
            data["grids"] = self.grids
        return _normalize(data)

    def key(self):
        blob = json.dumps(self.canonical(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def _normalize(obj):
    if isinstance(obj, dict):
        return {k: _normalize(v) for k, v in sorted(obj.items())}
    if isinstance(obj, (list, tuple)):
        return [_normalize(v) for v in obj]
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, (int, float)):
        f = float(obj)
        return int(f) if f.is_integer() and abs(f) < 2**53 else repr(f)
    return obj


def _finite(problems, name, value, positive=False, integer=False, minimum=None):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        problems.append(f"{name} must be a number, got {value!r}")
        return False
    if not math.isfinite(value):
        problems.append(f"{name} must be finite, got {value!r}")
        return False
    if integer and float(value) != int(value):
        problems.append(f"{name} must be an integer, got {value!r}")
        return False
    if positive and value <= 0:
        problems.append(f"{name} must be positive, got {value!r}")
        return False
    if minimum is not None and value < minimum:
        problems.append(f"{name} must be >= {minimum}, got {value!r}")
        return False
    return True


def build_config(command, data):
    """Validate a merged config dict and build a :class:`RunConfig`.

    Raises
    ------
    ConfigError
        With one message per problem found.
    """
    problems = []
    unknown = sorted(set(data) - _TOP_KEYS)
    problems += [f"unknown config key {k!r}" for k in unknown]

    params_in = data.get("params") or {}
    if not isinstance(params_in, dict):
        problems.append("params must be an object")
        params_in = {}
    problems += [f"unknown params key {k!r}" for k in sorted(set(params_in) - {"xi", "tau", "gamma"})]
    pvals = {}
    for name, default in (("xi", None), ("tau", None), ("gamma", 0.0)):
        v = params_in.get(name, default)
        if v is None:
            problems.append(f"missing parameter {name}")
        elif _finite(problems, name, v, positive=(name == "xi")):
            pvals[name] = float(v)

    solver_in = data.get("solver") or {}
    if not isinstance(solver_in, dict):
        problems.append("solver must be an object")
        solver_in = {}
    problems += [f"unknown solver key {k!r}" for k in sorted(set(solver_in) - _SOLVER_KEYS)]
    svals = {}
    for name, minimum, integer in (("harmonics", 1, True), ("grid", 6, True), ("max_iters", 1, True), ("starts", 1, True)):
        if name in solver_in and _finite(problems, name, solver_in[name], integer=integer, minimum=minimum):
            svals[name] = int(solver_in[name])
    if "grad_tol" in solver_in and _finite(problems, "grad_tol", solver_in["grad_tol"], positive=True):
        svals["grad_tol"] = float(solver_in["grad_tol"])
    if "omega_bounds" in solver_in:
        ob = solver_in["omega_bounds"]
        if (not isinstance(ob, (list, tuple)) or len(ob) != 2
                or not all(_finite(problems, "omega_bounds", w, positive=True) for w in ob)):
            problems.append(f"omega_bounds must be two positive numbers, got {ob!r}")
        elif not ob[0] < ob[1]:
            problems.append(f"omega_bounds must satisfy low < high, got {ob!r}")
        else:
            svals["omega_bounds"] = (float(ob[0]), float(ob[1]))

    seed = data.get("seed", 0)
    if _finite(problems, "seed", seed, integer=True, minimum=0):
        seed = int(seed)

    opts = None
    try:
        opts = MinimizeOptions(seed=seed if isinstance(seed, int) else 0, **svals)
    except ValueError as exc:
        problems.append(str(exc))

    grids = {}
    needed = {
        "sweep-mean": ["mean_grid"],
        "conjecture": ["mean_grid"],
        "condition": ["mean_grid"],
        "sweep-lambda": ["lambda_grid"],
        "phase-diagram": ["tau_grid", "gamma_grid"],
    }.get(command, [])
    for name in needed:
        g = dict(DEFAULT_GRIDS[name])
        given = data.get(name) or {}
        if not isinstance(given, dict):
            problems.append(f"{name} must be an object")
            given = {}
        problems += [f"unknown {name} key {k!r}" for k in sorted(set(given) - _GRID_KEYS)]
        g.update({k: v for k, v in given.items() if k in _GRID_KEYS})
        ok = _finite(problems, f"{name}.min", g["min"]) & _finite(problems, f"{name}.max", g["max"])
        min_steps = 3 if name == "mean_grid" else 1
        ok &= _finite(problems, f"{name}.steps", g["steps"], integer=True, minimum=min_steps)
        if ok and g["steps"] > 1 and not g["min"] < g["max"]:
            problems.append(f"{name}.min must be below {name}.max")
        grids[name] = {"min": float(g["min"]), "max": float(g["max"]), "steps": int(g["steps"])}
    if command in ("condition", "conjecture") and not problems:
        import numpy as np

        g = grids["mean_grid"]
        if not np.any(np.abs(np.linspace(g["min"], g["max"], g["steps"])) <= 1e-12):
            problems.append("mean_grid must contain a = 0 (use an odd number of steps over a symmetric range)")

    mean = lam = None
    if command == "minimize":
        has_mean, has_lam = data.get("mean") is not None, data.get("lambda") is not None
        if has_mean == has_lam:
            problems.append("minimize needs exactly one of --mean or --lambda")
        elif has_mean and _finite(problems, "mean", data["mean"]):
            mean = float(data["mean"])
        elif has_lam and _finite(problems, "lambda", data["lambda"]):
            lam = float(data["lambda"])

    jobs = data.get("jobs", 1)
    if _finite(problems, "jobs", jobs, integer=True, minimum=1):
        jobs = int(jobs)

    if problems:
        raise ConfigError(problems)
    return RunConfig(
        command=command,
        params=ModelParams(**pvals),
        opts=opts,
        seed=seed,
        mean=mean,
        lam=lam,
        grids=grids,
        output=data.get("output"),
        cache=bool(data.get("cache", True)),
        jobs=jobs,
        resolve=bool(data.get("resolve", True)),
    )


# --- cache ---------------------------------------------------------------

def cache_dir():
    return Path(os.environ.get("LB_CACHE_DIR", ".lb-cache"))


def cache_load(config):
    """Stored outputs for ``config``, or None on a miss or a corrupt entry."""
    path = cache_dir() / f"{config.key()}.json"
    if not path.exists():
        return None
    try:
        entry = json.loads(path.read_text())
        if entry.get("config") != config.canonical() or not isinstance(entry.get("outputs"), dict):
            raise ValueError("entry does not match config")
        return entry["outputs"]
    except (OSError, ValueError) as exc:
        log.warning("ignoring corrupt cache entry %s (%s); recomputing", path, exc)
        return None


def cache_store(config, outputs):
    directory = cache_dir()
    try:
        directory.mkdir(parents=True, exist_ok=True)
        path = directory / f"{config.key()}.json"
        tmp = path.with_suffix(".tmp")
        tmp.write_text(json.dumps({"config": config.canonical(), "outputs": outputs}, sort_keys=True))
        tmp.replace(path)
    except OSError as exc:
        log.warning("cache directory %s is not writable (%s); result not cached", directory, exc)
