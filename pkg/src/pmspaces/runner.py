"""Experiment runner: config validation, task dispatch and result files.

A config is a JSON object::

    {
      "schema": 1,
      "space": {"builder": "path", "params": {"n": 4}, "omega": ["v1", "v2", "v3"]},
      "mode": "rational",
      "seed": 0,
      "out": "results",
      "tasks": ["axioms", {"cheeger": {"N": 2}}, {"kappa-scan": {"step": "1/20"}}]
    }

``space`` may instead be ``{"file": "space.json"}`` in the interchange
format.  A task is a bare name or a one-key object mapping the name to its
parameters.  Every output except ``timings.json`` is a pure function of the
config, so identical configs give byte-identical files.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import catalog
from . import numeric as num
from .axioms import EXHAUSTIVE_LIMIT, check_axioms
from .cheeger import (BRUTE_LIMIT, ClusterTable, brute_force_hN, dinkelbach_h1, local_search_hN,
                      maximal_minimal_cheeger, verify_cluster_inequalities)
from .curvature import kappa_grid, kappa_threshold_scan, minimize_Jkappa
from .errors import ConfigError, PMSpaceError, TheoremViolationError
from .space import FiniteSpace, load_space
from .spectral import h1_value, lambda_11, lambda_1p, lambda_N, torsion

SCHEMA = 1
VERSION = "0.1.0"
TASKS = ("axioms", "cheeger", "kappa-scan", "spectral", "torsion", "converge")
STOCHASTIC = {"axioms", "spectral", "cheeger"}

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_THEOREM = 0, 2, 3, 4


@dataclass
class Task:
    name: str
    params: dict = field(default_factory=dict)


@dataclass
class ExperimentConfig:
    space: dict | None
    tasks: list[Task]
    mode: str = "float"
    seed: int | None = None
    out: str = "results"
    jobs: int = 1
    raw: dict = field(default_factory=dict)

    @property
    def exact(self) -> bool:
        return self.mode == "rational"

    def digest(self) -> str:
        """sha256 of the canonical config, without the output location and job count."""
        doc = {k: v for k, v in self.raw.items() if k not in ("out", "jobs")}
        doc.update(mode=self.mode, seed=self.seed)
        text = json.dumps(doc, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode("utf-8")).hexdigest()


@dataclass
class TaskRecord:
    index: int
    name: str
    params: dict
    status: str
    files: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    seconds: float = 0.0
    error: Exception | None = None


@dataclass
class RunManifest:
    config_hash: str
    version: str
    tasks: list[TaskRecord]
    out: Path

    @property
    def ok(self) -> bool:
        return all(t.status == "ok" for t in self.tasks)

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA,
            "tool": "pmspaces",
            "version": self.version,
            "config_hash": self.config_hash,
            "status": "ok" if self.ok else "failed",
            "tasks": [{"index": t.index, "name": t.name, "params": t.params, "status": t.status,
                       "files": t.files, "summary": t.summary} for t in self.tasks],
            "outputs": sorted(f for t in self.tasks for f in t.files),
        }


# ---------------------------------------------------------------------------
# config parsing


def _task(entry, path) -> Task:
    if isinstance(entry, str):
        name, params = entry, {}
    elif isinstance(entry, dict) and len(entry) == 1:
        (name, params), = entry.items()
        if params is None:
            params = {}
        if not isinstance(params, dict):
            raise ConfigError("task parameters must be an object", path)
    else:
        raise ConfigError("a task is a name or a one-key object", path)
    if name not in TASKS:
        raise ConfigError(f"unknown task {name!r}; expected one of {', '.join(TASKS)}", path)
    return Task(name, dict(params))


def parse_config(doc: dict, base: Path | None = None) -> ExperimentConfig:
    """Validate a config object; errors name the offending field."""
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(doc) - {"schema", "space", "mode", "seed", "out", "tasks", "jobs"}
    if unknown:
        raise ConfigError(f"unknown keys {sorted(unknown)}")
    if doc.get("schema", SCHEMA) != SCHEMA:
        raise ConfigError(f"unsupported schema {doc.get('schema')!r}", "schema")
    mode = doc.get("mode", "float")
    if mode not in ("float", "rational"):
        raise ConfigError("mode must be 'float' or 'rational'", "mode")
    tasks_doc = doc.get("tasks")
    if not isinstance(tasks_doc, list) or not tasks_doc:
        raise ConfigError("tasks must be a nonempty list", "tasks")
    tasks = [_task(e, f"tasks[{i}]") for i, e in enumerate(tasks_doc)]
    seed = doc.get("seed")
    if seed is not None and (not isinstance(seed, int) or isinstance(seed, bool) or seed < 0):
        raise ConfigError("seed must be a non-negative integer", "seed")
    if seed is None and any(t.name in STOCHASTIC for t in tasks):
        raise ConfigError("a seed is required for sampled tasks", "seed")
    space = doc.get("space")
    needs_space = any(t.name != "converge" for t in tasks)
    if space is None and needs_space:
        raise ConfigError("missing space", "space")
    if space is not None:
        if not isinstance(space, dict) or not (("builder" in space) ^ ("file" in space)):
            raise ConfigError("space needs exactly one of 'builder' or 'file'", "space")
        if "builder" in space and space["builder"] not in catalog.BUILDERS:
            raise ConfigError(f"unknown builder {space['builder']!r}", "space.builder")
        if "file" in space and base is not None:
            space = dict(space, file=str((base / space["file"]).resolve()))
    for i, t in enumerate(tasks):
        if t.name == "converge":
            fam = t.params.get("family")
            if fam not in catalog.BUILDERS:
                raise ConfigError(f"unknown family {fam!r}", f"tasks[{i}].converge.family")
            levels = t.params.get("levels")
            if not isinstance(levels, list) or not levels:
                raise ConfigError("levels must be a nonempty list", f"tasks[{i}].converge.levels")
        if t.name == "cheeger":
            N = t.params.get("N", 1)
            if not isinstance(N, int) or N < 1:
                raise ConfigError("N must be a positive integer", f"tasks[{i}].cheeger.N")
        if t.name in ("spectral", "torsion"):
            ps = t.params.get("p", [])
            if not isinstance(ps, list) or any(not isinstance(p, (int, float)) or p <= 1 for p in ps):
                raise ConfigError("p must be a list of numbers above 1", f"tasks[{i}].{t.name}.p")
    jobs = doc.get("jobs", 1)
    if not isinstance(jobs, int) or jobs < 1:
        raise ConfigError("jobs must be a positive integer", "jobs")
    return ExperimentConfig(space, tasks, mode, seed, str(doc.get("out", "results")), jobs, dict(doc))


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    return parse_config(doc, path.parent)


def build_space(spec: dict, exact: bool) -> tuple[FiniteSpace, np.ndarray]:
    if "file" in spec:
        try:
            space, omega = load_space(spec["file"])
        except (OSError, ValueError, KeyError) as exc:
            raise ConfigError(f"cannot load space: {exc}", "space.file") from exc
        if space.exact != exact:
            space = _convert(space, exact)
    else:
        try:
            space, omega = catalog.build(spec["builder"], spec.get("params", {}), exact)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc), "space.params") from exc
    if "omega" in spec:
        try:
            omega = space.mask(spec["omega"])
        except (ValueError, KeyError, IndexError) as exc:
            raise ConfigError(f"bad omega: {exc}", "space.omega") from exc
    if omega is None:
        omega = space.full()
    return space, omega


def _convert(space: FiniteSpace, exact: bool) -> FiniteSpace:
    from .space import space_from_dict, space_to_dict
    doc = space_to_dict(space)
    doc["exact"] = exact
    return space_from_dict(doc)[0]


# ---------------------------------------------------------------------------
# output helpers


def jsonable(x):
    """Plain JSON data; Fractions become ``"p/q"`` strings."""
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return [jsonable(v) for v in x.tolist()]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if np.isfinite(x) else str(x)
    return x


def dump_json(obj) -> str:
    return json.dumps(jsonable(obj), indent=1, sort_keys=True, ensure_ascii=False) + "\n"


def csv_text(rows: list[dict], columns: list[str]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n", extrasaction="ignore")
    w.writeheader()
    for r in rows:
        w.writerow({k: ("" if r.get(k) is None else r[k]) for k in columns})
    return buf.getvalue()


# ---------------------------------------------------------------------------
# tasks; each returns {file suffix: text} plus a short summary


def _value(x):
    return {"decimal": num.fmt(x), "exact": str(x)} if isinstance(x, Fraction) else float(x)


def task_axioms(space, omega, params, seed):
    mode = params.get("mode") or ("exhaustive" if space.n <= EXHAUSTIVE_LIMIT else "randomized")
    report = check_axioms(space, mode=mode, seed=seed, trials=int(params.get("trials", 2000)))
    doc = report.to_dict(space)
    summary = {"mode": report.mode, "violated": report.violated()}
    return {"json": dump_json(doc)}, summary


def task_cheeger(space, omega, params, seed):
    N = int(params.get("N", 1))
    k = int(omega.sum())
    out: dict = {"N": N}
    if k <= BRUTE_LIMIT:
        table = ClusterTable(space, omega, N)
        cert = brute_force_hN(space, omega, N, table)
        out["certificate"] = cert.to_dict(space)
        out["hierarchy"] = {str(M): _value(table.exact_H(M, table.full)) for M in range(1, N + 1)}
        out["verification"] = verify_cluster_inequalities(space, omega, N, table)
        out["Lambda_N"] = _value(lambda_N(space, omega, N, table).value)
        h1 = table.exact_H(1, table.full)
    else:
        cert = dinkelbach_h1(space, omega) if N == 1 else local_search_hN(space, omega, N, seed=seed)
        out["certificate"] = cert.to_dict(space)
        h1 = cert.value if N == 1 else dinkelbach_h1(space, omega).value
    if space.is_cut:
        dk = dinkelbach_h1(space, omega)
        if not num.close(dk.value, h1, scale=abs(float(h1)), tol=1e-10):
            raise TheoremViolationError("parametric and enumerated h_1 disagree",
                                        witness={"dinkelbach": dk.value, "enumerated": h1})
        E_max, minimal = maximal_minimal_cheeger(space, omega, dk.value)
        out["h1"] = _value(dk.value)
        out["dinkelbach_trace"] = out["certificate"]["trace"] if N == 1 and k > BRUTE_LIMIT else dk.to_dict(space)["trace"]
        out["maximal_cheeger_set"] = space.members(E_max)
        out["minimal_cheeger_sets"] = [space.members(E) for E in minimal]
    summary = {"N": N, "value": out["certificate"]["value"]["decimal"], "optimal": out["certificate"]["optimal"]}
    return {"json": dump_json(out)}, summary


def task_kappa_scan(space, omega, params, seed):
    step = params.get("step")
    upper = params.get("upper")
    grid = kappa_grid(space, omega, step=None if step is None else num.number(num.to_fraction(step), space.exact),
                      points=int(params.get("points", 41)),
                      upper=None if upper is None else num.number(num.to_fraction(upper), space.exact))
    scan = kappa_threshold_scan(space, omega, grid)
    h1 = h1_value(space, omega).value
    lo, hi = scan.threshold
    tol = 0 if space.exact else 1e-9 * (1 + abs(float(h1)))
    inside = hi is not None and (lo is None or float(lo) - tol <= float(h1)) and float(h1) <= float(hi) + tol
    if hi is not None and not inside:
        raise TheoremViolationError("threshold bracket misses h_1",
                                    witness={"bracket": [lo, hi], "h1": h1})
    doc = {"h1": _value(h1), "bracket": [None if lo is None else _value(lo), None if hi is None else _value(hi)],
           "grid_points": len(grid)}
    if space.exact:
        res = minimize_Jkappa(space, omega, h1)
        doc["at_h1"] = {"min_value": str(res.value), "maximal": space.members(res.maximal),
                        "minimal": space.members(res.minimal)}
    cols = ["kappa", "min_value", "nontrivial", "min_size", "max_size"]
    return {"csv": csv_text(scan.to_rows(), cols), "json": dump_json(doc)}, {"bracket": doc["bracket"]}


def task_spectral(space, omega, params, seed):
    samples = int(params.get("samples", 1000))
    res = lambda_11(space, omega, samples=samples, seed=seed)
    doc = {"lambda_11": {"value": _value(res.value), "mode": res.mode,
                         "min_sampled_quotient": _value(res.meta["min_sampled_quotient"])
                         if res.meta["min_sampled_quotient"] is not None else None,
                         "samples": samples, "cheeger_set": space.members(res.minimizer != 0)}}
    h1 = float(res.value)
    rows = []
    for p in params.get("p", []):
        r = lambda_1p(space, omega, float(p), seed=seed, restarts=int(params.get("restarts", 16)), h1=h1)
        row = {k: v for k, v in r.meta.items()}
        row["value"] = r.value
        row["eigenfunction"] = r.minimizer
        rows.append(row)
    doc["lambda_1p"] = rows
    return {"json": dump_json(doc)}, {"lambda_11": doc["lambda_11"]["value"],
                                      "lambda_1p": [float(r["value"]) for r in rows]}


def task_torsion(space, omega, params, seed):
    h1 = float(h1_value(space, omega).value)
    rows = []
    for p in params.get("p", [2]):
        r = torsion(space, omega, float(p), tolerance=float(params.get("tolerance", 1e-9)), h1=h1)
        rows.append(r.to_dict())
    return {"json": dump_json({"torsion": rows})}, {"energies": [r["energy"] for r in rows]}


CONVERGE_COLUMNS = ["level", "points", "omega_size", "h1", "lambda_11", "p", "lambda_1p",
                    "eig_bound_hard", "eig_margin_hard", "eig_margin_sharp", "torsion_l1",
                    "torsion_bound_hard", "torsion_margin_hard", "torsion_margin_sharp", "h1_trend", "status"]


def converge(family: str, levels, exact: bool = False, seed: int = 0, fixed=None, p=None,
             param=None, restarts: int = 4, jobs: int = 1) -> list[dict]:
    """Refinement study: one row per level of a catalog family.

    ``p`` (optional) adds the p-eigenvalue and torsion columns.  A level
    that fails yields a row with ``status`` set to the error.  ``h1_trend``
    compares each level with the previous one (``down``, ``flat``, ``up``).
    """
    param = param or catalog.LEVEL_PARAM.get(family, "n")

    def one(level):
        row: dict = {"level": level}
        try:
            params = dict(fixed or {})
            params[param] = level
            space, omega = catalog.build(family, params, exact)
            row["points"], row["omega_size"] = space.n, int(omega.sum())
            h1 = dinkelbach_h1(space, omega).value if space.is_cut else brute_force_hN(space, omega).value
            row["h1"] = num.fmt(h1)
            row["lambda_11"] = num.fmt(h1)
            row["_h1"] = float(h1)
            if p is not None:
                row["p"] = p
                eig = lambda_1p(space, omega, float(p), seed=seed, restarts=restarts, h1=float(h1))
                row["lambda_1p"] = repr(float(eig.value))
                row["eig_bound_hard"] = repr(eig.meta["bound_hard"])
                row["eig_margin_hard"] = repr(eig.meta["margin_hard"])
                row["eig_margin_sharp"] = repr(eig.meta["margin_sharp"])
                tor = torsion(space, omega, float(p), h1=float(h1))
                row["torsion_l1"] = repr(tor.l1_mass)
                row["torsion_bound_hard"] = repr(tor.bounds["bound_hard"])
                row["torsion_margin_hard"] = repr(tor.bounds["margin_hard"])
                row["torsion_margin_sharp"] = repr(tor.bounds["margin_sharp"])
            row["status"] = "ok"
        except TheoremViolationError:
            raise
        except (PMSpaceError, ValueError, TypeError) as exc:
            row["status"] = f"error: {type(exc).__name__}: {exc}"
        return row

    if jobs > 1:
        with ThreadPoolExecutor(jobs) as ex:
            rows = list(ex.map(one, levels))
    else:
        rows = [one(level) for level in levels]
    prev = None
    for row in rows:
        cur = row.pop("_h1", None)
        if cur is not None and prev is not None:
            d = cur - prev
            scale = 1e-9 * (1 + abs(prev))
            row["h1_trend"] = "flat" if abs(d) <= scale else ("down" if d < 0 else "up")
        prev = cur if cur is not None else prev
    return rows


def task_converge(space, omega, params, seed, exact=False, jobs=1):
    rows = converge(params["family"], params["levels"], exact=exact, seed=seed or 0,
                    fixed=params.get("fixed"), p=params.get("p"), param=params.get("param"),
                    restarts=int(params.get("restarts", 4)), jobs=jobs)
    trends = [r.get("h1_trend") for r in rows if r.get("h1_trend")]
    summary = {"levels": len(rows), "failed": sum(r["status"] != "ok" for r in rows),
               "monotone_down": bool(trends) and all(t == "down" for t in trends),
               "constant": bool(trends) and all(t == "flat" for t in trends)}
    return {"csv": csv_text(rows, CONVERGE_COLUMNS)}, summary


RUNNERS = {"axioms": task_axioms, "cheeger": task_cheeger, "kappa-scan": task_kappa_scan,
           "spectral": task_spectral, "torsion": task_torsion}


# ---------------------------------------------------------------------------
# driver


def run(config: ExperimentConfig, out=None, jobs: int | None = None) -> RunManifest:
    """Run every task and write results, ``manifest.json`` and ``timings.json``.

    Tasks are evaluated as a parallel map bounded by ``jobs``; files are
    written afterwards in task order.  On the first failing task (in task
    order) the later tasks are marked ``skipped``, the manifest is written
    and the error is re-raised; a theorem violation also leaves
    ``witness.json``.
    """
    out = Path(out or config.out)
    jobs = jobs or config.jobs
    out.mkdir(parents=True, exist_ok=True)
    space = omega = None
    if any(t.name != "converge" for t in config.tasks):
        space, omega = build_space(config.space, config.exact)

    def one(i_task):
        i, task = i_task
        t0 = time.perf_counter()
        try:
            if task.name == "converge":
                files, summary = task_converge(space, omega, task.params, config.seed, config.exact, jobs)
            else:
                files, summary = RUNNERS[task.name](space, omega, task.params, config.seed or 0)
            return TaskRecord(i, task.name, task.params, "ok", summary=summary,
                              seconds=time.perf_counter() - t0), files
        except PMSpaceError as exc:
            return TaskRecord(i, task.name, task.params, "error", summary={"error": f"{type(exc).__name__}: {exc}"},
                              seconds=time.perf_counter() - t0, error=exc), {}

    items = list(enumerate(config.tasks))
    if jobs > 1 and len(items) > 1:
        with ThreadPoolExecutor(jobs) as ex:
            results = list(ex.map(one, items))
    else:
        results = [one(it) for it in items]

    records, failure = [], None
    for rec, files in results:
        if failure is not None:
            rec.status, rec.summary, rec.files = "skipped", {}, []
            records.append(rec)
            continue
        for suffix, text in files.items():
            name = f"{rec.index:02d}-{rec.name}.{suffix}"
            (out / name).write_text(text, encoding="utf-8", newline="\n")
            rec.files.append(name)
        if rec.error is not None:
            failure = rec
            if isinstance(rec.error, TheoremViolationError):
                witness = {"task": rec.name, "index": rec.index, "message": str(rec.error),
                           "witness": rec.error.witness}
                (out / "witness.json").write_text(dump_json(witness), encoding="utf-8", newline="\n")
                rec.files.append("witness.json")
        records.append(rec)

    manifest = RunManifest(config.digest(), VERSION, records, out)
    (out / "manifest.json").write_text(dump_json(manifest.to_dict()), encoding="utf-8", newline="\n")
    timings = {"tasks": [{"index": r.index, "name": r.name, "seconds": round(r.seconds, 6)} for r in records],
               "total_seconds": round(sum(r.seconds for r in records), 6)}
    (out / "timings.json").write_text(dump_json(timings), encoding="utf-8", newline="\n")
    if failure is not None:
        raise failure.error
    return manifest


def exit_code(exc: BaseException | None) -> int:
    if exc is None:
        return EXIT_OK
    if isinstance(exc, ConfigError):
        return EXIT_CONFIG
    if isinstance(exc, TheoremViolationError):
        return EXIT_THEOREM
    return EXIT_SOLVER


__all__ = [
    "CONVERGE_COLUMNS", "ExperimentConfig", "RunManifest", "Task", "TaskRecord", "build_space",
    "converge", "dump_json", "exit_code", "load_config", "parse_config", "run",
]
