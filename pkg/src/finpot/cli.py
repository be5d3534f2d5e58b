"""Command-line front end: ``finpot <task> [options]``.

Every task can be driven by a JSON config (``--config``) and/or flags;
flags override the config.  Exit codes: 0 success, 1 validation or parse
error, 2 solver failure, 3 failed property check (``verify``).
"""

from __future__ import annotations

import argparse
import datetime as _dt
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import io as fio
from .capacity import capacity, check_duality, g_capacity, set_capacity
from .errors import FinpotError, SolverError, ValidationError
from .kernelspace import (
    CellSelfEnergy,
    Constant,
    KernelMatrix,
    as_field,
    as_index_set,
    build_riesz_kernel,
)
from .principles import principle_summary
from .study import COLUMNS as STUDY_COLUMNS
from .study import SphereScenario, emit_convergence_study
from .sweep import balayage, equilibrium
from .verify import run_invariants

TASKS = ("Capacity", "Equilibrium", "Sweep", "Principles", "Verify", "Study")
EXIT_OK, EXIT_VALIDATION, EXIT_SOLVER, EXIT_PROPERTY = 0, 1, 2, 3
MAX_SEED = 2 ** 64


@dataclass
class ExperimentConfig:
    task: str
    kernel_source: dict | None = None
    task_params: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)
    base_dir: Path = Path(".")

    @classmethod
    def from_dict(cls, data: dict, base_dir=".") -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise ValidationError("config must be a JSON object")
        unknown = set(data) - {"task", "kernel_source", "task_params", "output"}
        if unknown:
            raise ValidationError(f"unknown config keys: {sorted(unknown)}")
        task = _normalize_task(data.get("task"))
        cfg = cls(task=task, kernel_source=data.get("kernel_source"),
                  task_params=dict(data.get("task_params") or {}),
                  output=dict(data.get("output") or {}), base_dir=Path(base_dir))
        cfg.validate()
        return cfg

    def validate(self):
        if self.task != "Study":
            src = self.kernel_source
            if not isinstance(src, dict) or len(src) != 1 or next(iter(src)) not in ("matrix_csv", "riesz"):
                raise ValidationError("kernel_source needs exactly one of 'matrix_csv' or 'riesz'")
            if "riesz" in src:
                riesz = src["riesz"]
                if not isinstance(riesz, dict) or "points_csv" not in riesz or "alpha" not in riesz:
                    raise ValidationError("riesz kernel_source needs 'points_csv' and 'alpha'")
        p = self.task_params
        required = {"Equilibrium": ("A",), "Sweep": ("A", "omega")}.get(self.task, ())
        missing = [k for k in required if k not in p]
        if self.task == "Capacity" and "A" not in p and "f" not in p:
            missing.append("A or f")
        if missing:
            raise ValidationError(f"task {self.task} is missing task_params {missing}")

    def path(self, value) -> Path:
        path = Path(value)
        return path if path.is_absolute() else self.base_dir / path


def _normalize_task(task) -> str:
    if not isinstance(task, str):
        raise ValidationError(f"task must be one of {list(TASKS)}")
    for name in TASKS:
        if task.lower() == name.lower():
            return name
    raise ValidationError(f"unknown task {task!r}; expected one of {list(TASKS)}")


def parse_diag_rule(value):
    """``"cell"``, ``"cell:<h>"``, ``"constant:<v>"`` or a dict with ``kind``."""
    if value is None:
        return None
    if isinstance(value, dict):
        kind = str(value.get("kind", "")).lower()
        if kind in ("cell", "cellselfenergy"):
            return CellSelfEnergy(value.get("h"))
        if kind == "constant":
            return Constant(float(value["value"]))
        raise ValidationError(f"unknown diag_rule {value!r}")
    kind, _, arg = str(value).partition(":")
    kind = kind.lower()
    try:
        if kind in ("cell", "cellselfenergy"):
            return CellSelfEnergy(float(arg) if arg else None)
        if kind == "constant":
            return Constant(float(arg))
    except ValueError:
        pass
    raise ValidationError(f"unknown diag_rule {value!r}")


def load_kernel(cfg: ExperimentConfig) -> KernelMatrix:
    src = cfg.kernel_source
    if "matrix_csv" in src:
        return KernelMatrix(fio.read_matrix_csv(cfg.path(src["matrix_csv"])))
    riesz = src["riesz"]
    points = fio.read_points_csv(cfg.path(riesz["points_csv"]))
    return build_riesz_kernel(points, float(riesz["alpha"]), parse_diag_rule(riesz.get("diag_rule")))


def _parse_index_list(value):
    if isinstance(value, str):
        text = value.strip().strip("[]")
        if not text:
            return []
        try:
            return [int(v) for v in text.split(",")]
        except ValueError:
            raise ValidationError(f"bad index list {value!r}") from None
    return value


def _parse_vector(value, n):
    if isinstance(value, str):
        text = value.strip()
        if text.startswith("["):
            return fio.measure_from_json(text, n)
        try:
            value = [float(v) for v in text.split(",")]
        except ValueError:
            raise ValidationError(f"bad vector {value!r}") from None
    return as_field(value, n)


def _sets(value) -> list:
    if value and all(isinstance(v, (list, tuple, str)) for v in value):
        return [_parse_index_list(v) for v in value]
    return [_parse_index_list(value)]


def _set_label(idx) -> str:
    return ";".join(str(int(i)) for i in idx)


def task_capacity(K, params, tol, seed):
    rows, results = [], []
    if "f" in params:
        targets = [("f", None, _parse_vector(params["f"], K.n))]
    else:
        targets = [(None, as_index_set(A, K.n), None) for A in _sets(params["A"])]
    for label, idx, f in targets:
        label = label or _set_label(idx)
        if K.is_strictly_pd:
            rep = check_duality(K, f, tol=tol if tol is not None else 1e-7, A=idx)
            entry = rep.to_dict()
            c, gamma, gap, gc = rep.c, rep.gamma, rep.duality_gap, rep.gcapa
        else:
            c = set_capacity(K, idx) if f is None else capacity(K, f)
            gc = g_capacity(K, idx) if f is None else None
            gamma = gap = None
            entry = {"c": c, "c_squared": c * c, "gamma": None, "gcapa": gc, "duality_gap": None}
        entry["set"] = label
        results.append(entry)
        rows.append([label, c, c * c, gamma, gc, gap])
    return {"reports": results}, (["set", "c", "c_squared", "gamma", "gcapa", "gap"], rows), EXIT_OK


def _site_rows(K, measure):
    p = K.entries @ measure
    return ["index", "weight", "potential"], [[i, measure[i], p[i]] for i in range(K.n)]


def task_equilibrium(K, params, tol, seed):
    rep = equilibrium(K, _parse_index_list(params["A"]), tol=tol if tol is not None else 1e-8)
    return rep.to_dict(), _site_rows(K, rep.swept), EXIT_OK


def task_sweep(K, params, tol, seed):
    omega = fio.parse_measure(params["omega"], K.n)
    rep = balayage(K, omega, _parse_index_list(params["A"]), tol=tol if tol is not None else 1e-8)
    g_omega = K.entries @ omega
    g_swept = K.entries @ rep.swept
    rows = [[i, rep.swept[i], g_swept[i], g_omega[i]] for i in range(K.n)]
    return rep.to_dict(), (["index", "swept", "potential_swept", "potential_omega"], rows), EXIT_OK


def task_principles(K, params, tol, seed):
    trials = int(params.get("trials", 200))
    reports = principle_summary(K, trials=trials, seed=seed, tol=tol if tol is not None else 1e-8)
    rows = [[r.principle.value, r.holds, r.method.value, r.k, r.checked] for r in reports]
    return ({"reports": [r.to_dict() for r in reports]},
            (["principle", "holds", "method", "k", "checked"], rows), EXIT_OK)


def task_verify(K, params, tol, seed):
    checks = run_invariants(K, trials=int(params.get("trials", 20)), seed=seed)
    rows = [[c.name, c.passed, c.worst, c.threshold, c.trials] for c in checks]
    ok = all(c.passed for c in checks)
    return ({"passed": ok, "checks": [c.to_dict() for c in checks]},
            (["check", "passed", "worst", "threshold", "trials"], rows),
            EXIT_OK if ok else EXIT_PROPERTY)


def task_study(params):
    known = {"sphere_radius", "point_counts", "alpha", "exterior_distance"}
    unknown = set(params) - known - {"seed", "tol", "trials"}
    if unknown:
        raise ValidationError(f"unknown study parameters: {sorted(unknown)}")
    kwargs = {k: params[k] for k in known if k in params}
    if "point_counts" in kwargs:
        kwargs["point_counts"] = tuple(_parse_index_list(kwargs["point_counts"]))
    scenario = SphereScenario(**kwargs)
    rows = emit_convergence_study(scenario)
    table = (list(STUDY_COLUMNS), [[r[c] for c in STUDY_COLUMNS] for r in rows])
    deterministic = [{k: v for k, v in r.items() if k != "runtime_ms"} for r in rows]
    result = {"scenario": {"sphere_radius": scenario.sphere_radius,
                           "point_counts": list(scenario.point_counts),
                           "alpha": scenario.alpha,
                           "exterior_distance": scenario.exterior_distance},
              "rows": deterministic}
    return result, table, EXIT_OK


HANDLERS = {
    "Capacity": task_capacity,
    "Equilibrium": task_equilibrium,
    "Sweep": task_sweep,
    "Principles": task_principles,
    "Verify": task_verify,
}


def _format_table(header, rows) -> str:
    def cell(v):
        if isinstance(v, float):
            return f"{v:.10g}"
        return "" if v is None else str(v)
    cells = [[cell(v) for v in header]] + [[cell(v) for v in r] for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    return "\n".join("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in cells)


def run(cfg: ExperimentConfig, seed: int = 0, tol: float | None = None,
        stdout=None, stderr=None) -> int:
    """Execute one task and write its reports.  Returns the exit code."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    if cfg.task == "Study":
        result, table, code = task_study(cfg.task_params)
        kernel_info = None
    else:
        K = load_kernel(cfg)
        params = cfg.task_params
        if tol is None and "tol" in params:
            tol = float(params["tol"])
        result, table, code = HANDLERS[cfg.task](K, params, tol, seed)
        kernel_info = {"n": K.n, "source": fio.to_jsonable(cfg.kernel_source)}
    report = {
        "task": cfg.task,
        "kernel": kernel_info,
        "params": fio.to_jsonable(cfg.task_params),
        "seed": seed,
        "tol": tol,
        "exit_code": code,
        "result": result,
        "generated_at": _dt.datetime.now(_dt.timezone.utc).isoformat(),
    }
    json_path = cfg.output.get("json_path")
    csv_path = cfg.output.get("csv_path")
    if csv_path:
        fio.write_csv(csv_path, *table)
    summary = _format_table(*table)
    if json_path:
        fio.write_json(json_path, report)
        print(summary, file=stdout)
    else:
        stdout.write(fio.dumps(report))
        print(summary, file=stderr)
    return code


def _seed(text: str) -> int:
    value = int(text)
    if not 0 <= value < MAX_SEED:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


class _Parser(argparse.ArgumentParser):
    # usage errors are validation errors, not solver failures
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_VALIDATION, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    S = argparse.SUPPRESS
    common.add_argument("--config", default=S, help="JSON experiment config")
    common.add_argument("--seed", type=_seed, default=S)
    common.add_argument("--tol", type=float, default=S)
    common.add_argument("--out", default=S, help="JSON report path (stdout if omitted)")
    common.add_argument("--csv", default=S, help="CSV table path")

    kernel = _Parser(add_help=False)
    kernel.add_argument("--matrix", default=S, help="kernel matrix CSV")
    kernel.add_argument("--points", default=S, help="point cloud CSV for a Riesz kernel")
    kernel.add_argument("--alpha", type=float, default=S)
    kernel.add_argument("--diag", default=S, help="cell, cell:<h> or constant:<v>")

    parser = _Parser(prog="finpot", description="Finite-space potential theory.",
                                     parents=[common])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("capacity", parents=[common, kernel], help="energy, dual and G-capacity")
    p.add_argument("--set", dest="A", action="append", default=S, help="index list, e.g. 0,2 (repeatable)")
    p.add_argument("--f", dest="f", default=S, help="field as JSON array or comma list")

    p = sub.add_parser("equilibrium", parents=[common, kernel], help="equilibrium measure of a set")
    p.add_argument("--set", dest="A", default=S)

    p = sub.add_parser("sweep", parents=[common, kernel], help="balayage of omega onto a set")
    p.add_argument("--set", dest="A", default=S)
    p.add_argument("--omega", default=S, help='JSON array or "unit_at:<i>"')

    for name, text in (("principles", "energy, maximum and domination principles"),
                       ("verify", "invariant suite")):
        p = sub.add_parser(name, parents=[common, kernel], help=text)
        p.add_argument("--trials", type=int, default=S)

    p = sub.add_parser("study", parents=[common], help="Newtonian sphere convergence table")
    p.add_argument("--radius", dest="sphere_radius", type=float, default=S)
    p.add_argument("--counts", dest="point_counts", default=S, help="comma list of N")
    p.add_argument("--alpha", type=float, default=S)
    p.add_argument("--exterior-distance", dest="exterior_distance", type=float, default=S)
    return parser


def config_from_args(args: argparse.Namespace) -> tuple[ExperimentConfig, int, float | None]:
    opts = vars(args)
    task = _normalize_task(opts["command"])
    data: dict = {}
    base_dir = Path(".")
    if "config" in opts:
        config_path = Path(opts["config"])
        data = fio.read_json(config_path)
        if not isinstance(data, dict):
            raise ValidationError("config must be a JSON object")
        base_dir = config_path.parent
        if "task" in data and _normalize_task(data["task"]) != task:
            raise ValidationError(f"config task {data['task']!r} does not match subcommand {opts['command']!r}")
    data["task"] = task
    params = dict(data.get("task_params") or {})
    for key in ("A", "f", "omega", "trials", "sphere_radius", "point_counts", "exterior_distance"):
        if key in opts:
            params[key] = opts[key]
    if task == "Study" and "alpha" in opts:
        params["alpha"] = opts["alpha"]
    if task == "Capacity" and "A" in opts:
        params["A"] = [_parse_index_list(a) for a in opts["A"]]
    elif "A" in params:
        params["A"] = _parse_index_list(params["A"])
    data["task_params"] = params

    if task != "Study":
        flags = {k: opts[k] for k in ("matrix", "points", "alpha", "diag") if k in opts}
        if "matrix" in flags and "points" in flags:
            raise ValidationError("give either --matrix or --points, not both")
        cwd = Path.cwd()
        if "matrix" in flags:
            data["kernel_source"] = {"matrix_csv": str(cwd / flags["matrix"])}
        elif "points" in flags:
            if "alpha" not in flags:
                raise ValidationError("--points needs --alpha")
            riesz = {"points_csv": str(cwd / flags["points"]), "alpha": flags["alpha"]}
            if "diag" in flags:
                riesz["diag_rule"] = flags["diag"]
            data["kernel_source"] = {"riesz": riesz}
    output = {k: str(base_dir / v) if not Path(v).is_absolute() else v
              for k, v in dict(data.get("output") or {}).items()}
    if "out" in opts:
        output["json_path"] = opts["out"]
    if "csv" in opts:
        output["csv_path"] = opts["csv"]
    data["output"] = output
    cfg = ExperimentConfig.from_dict(data, base_dir=base_dir)

    seed = opts.get("seed", params.get("seed", 0))
    seed = _seed(str(seed)) if not isinstance(seed, int) else seed
    tol = opts.get("tol", params.get("tol"))
    return cfg, int(seed), None if tol is None else float(tol)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg, seed, tol = config_from_args(args)
        return run(cfg, seed=seed, tol=tol)
    except SolverError as exc:
        print(f"error: solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (FinpotError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
